#include "support.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace hamkrr;

TEST(Integrate, ZeroFieldKeepsState) {
    PhasePoint z0(3);
    z0 << 0.3, -0.2, 0.9;
    const auto traj = integrate([](const PhasePoint &) { return Vector::Zero(3); }, z0, 0.1, 1.0);
    ASSERT_EQ(traj.size(), 11u);
    EXPECT_NEAR(traj.times.back(), 1.0, 1e-15);
    for (const auto &z : traj.states) { EXPECT_EQ(z, z0); }
    EXPECT_FALSE(traj.truncated);
}

TEST(Integrate, IsotropicBodyStaysPut) {
    const auto rb = rigid_body({1, 1, 1});
    PhasePoint z0(3);
    z0 << 1, 2, 3;
    const auto traj = integrate([&](const PhasePoint &z) { return rb.field(z); }, z0, 1e-2, 1.0);
    EXPECT_LT((traj.states.back() - z0).norm(), 1e-14);
}

TEST(Integrate, LinearFieldMatchesExponential) {
    // dz/dt = z: RK4 per step is the degree-4 Taylor polynomial of e^dt.
    PhasePoint z0 = PhasePoint::Ones(1);
    const double dt = 0.1;
    const auto traj = integrate([](const PhasePoint &z) { return Vector(z); }, z0, dt, 1.0);
    const double step = 1.0 + dt + dt * dt / 2 + dt * dt * dt / 6 + dt * dt * dt * dt / 24;
    EXPECT_NEAR(traj.states.back()(0), std::pow(step, 10), 1e-13);
}

TEST(Integrate, RejectsBadSteps) {
    const auto f = [](const PhasePoint &z) { return Vector(z); };
    EXPECT_THROW(integrate(f, PhasePoint::Ones(1), 0.0, 1.0), std::invalid_argument);
    EXPECT_THROW(integrate(f, PhasePoint::Ones(1), 0.5, 0.1), std::invalid_argument);
}

TEST(Integrate, TruncatesOnChartExit) {
    // Constant drift in theta leaves the chart near theta = pi.
    const auto tv = two_vortex(1.0, 1.0);
    PhasePoint z0(4);
    z0 << 3.0, 1.0, 1.0, 3.0;
    const auto traj = integrate([](const PhasePoint &) { Vector v = Vector::Zero(4); v(0) = 1.0; return v; }, z0,
                                1e-2, 1.0, "drift", [&](const PhasePoint &z) { return tv.admissible(z); });
    EXPECT_TRUE(traj.truncated);
    EXPECT_FALSE(traj.truncation_reason.empty());
    EXPECT_LT(traj.size(), 101u);
    for (const auto &z : traj.states) { EXPECT_TRUE(tv.admissible(z)); }
}

TEST(Integrate, FourthOrderConvergence) {
    const auto rb = rigid_body({1, 10, 0.1});
    PhasePoint z0(3);
    z0 << 0.6, -0.4, 0.7;
    const auto field = [&](const PhasePoint &z) { return rb.field(z); };
    const double coarse = conservation_drift(integrate(field, z0, 2e-2, 1.0), rb.hamiltonian);
    const double fine = conservation_drift(integrate(field, z0, 1e-2, 1.0), rb.hamiltonian);
    ASSERT_GT(fine, 0.0);
    EXPECT_GE(coarse / fine, 8.0);
}

TEST(Integrate, CasimirDriftOfTrueAndLearnedFlows) {
    const auto rb = rigid_body({1, 10, 0.1});
    ExperimentConfig cfg = preset_config("rigid_body");
    const auto outcome = run_fit(cfg, rb, 2.5, 2.5e-5, 150, 11, make_test_points(cfg, rb));
    Rng rng(50, "drift");
    for (int n = 0; n < 3; ++n) {
        const PhasePoint z0 = test::random_point(rng, 3);
        const auto truth = integrate([&](const PhasePoint &z) { return rb.field(z); }, z0, 1e-3, 1.0);
        const auto learned =
            integrate([&](const PhasePoint &z) { return outcome.estimator.evaluate_field(z); }, z0, 1e-3, 1.0);
        EXPECT_LE(conservation_drift(truth, rb.casimirs[0].value), 1e-7);
        EXPECT_LE(conservation_drift(learned, rb.casimirs[0].value), 1e-6);
    }
}

TEST(FlowDistance, Values) {
    Trajectory a, b;
    for (int k = 0; k < 5; ++k) {
        a.times.push_back(0.1 * k);
        b.times.push_back(0.1 * k);
        a.states.push_back(PhasePoint::Constant(3, 0.1 * k));
        b.states.push_back(PhasePoint::Constant(3, 0.1 * k));
    }
    EXPECT_EQ(flow_distance(a, b), 0.0);
    b.states[3](1) += 0.25;
    EXPECT_NEAR(flow_distance(a, b), 0.25, 1e-15);
    b.times.pop_back();
    b.states.pop_back();
    EXPECT_THROW((void)flow_distance(a, b), std::invalid_argument);
}

TEST(FlowDistance, SphereFactorsUseGeodesics) {
    PhasePoint p(2), q(2);
    p << sphere::kPi / 2, 0.0;
    q << sphere::kPi / 2, sphere::kPi;
    EXPECT_NEAR(sphere_product_distance(p, q), sphere::kPi, 1e-15);
    PhasePoint p2(4), q2(4);
    p2 << p, p;
    q2 << q, p;
    EXPECT_NEAR(sphere_product_distance(p2, q2), sphere::kPi, 1e-15);
    q2 << q, q;
    EXPECT_NEAR(sphere_product_distance(p2, q2), std::sqrt(2.0) * sphere::kPi, 1e-14);
    EXPECT_THROW((void)sphere_product_distance(p, q2), DimensionError);
}

TEST(ConservationDrift, ConstantFunctionHasNoDrift) {
    Trajectory t;
    t.times = {0.0, 1.0};
    t.states = {PhasePoint::Zero(2), PhasePoint::Ones(2)};
    EXPECT_EQ(conservation_drift(t, [](const PhasePoint &) { return 3.0; }), 0.0);
    EXPECT_EQ(conservation_drift(t, [](const PhasePoint &z) { return z.sum(); }), 2.0);
}

TEST(TrajectoryCsv, Format) {
    Trajectory t;
    t.times = {0.0, 0.5};
    t.states = {PhasePoint::Zero(2), PhasePoint::Ones(2)};
    std::ostringstream os;
    write_trajectory_csv(os, t);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "time,z0,z1");
    std::istringstream in(os.str());
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) { ++lines; }
    EXPECT_EQ(lines, 3);
}
