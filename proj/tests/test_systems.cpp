#include "support.hpp"

#include <gtest/gtest.h>

using namespace hamkrr;

namespace {

PhasePoint vec(std::initializer_list<double> v) {
    PhasePoint p(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) { p(i++) = x; }
    return p;
}

}  // namespace

TEST(RigidBody, EnergyValues) {
    const auto rb = rigid_body({1, 10, 0.1});
    // 1/2 (1 + 4/10 + 9/0.1) = 45.7; with P = (1, 1, 1): 1/2 (1 + 0.1 + 10) = 5.55.
    EXPECT_NEAR(rb.energy(vec({1, 1, 1})), 5.55, 1e-14);
    EXPECT_EQ(rb.energy(vec({0, 0, 0})), 0.0);
    EXPECT_EQ(rb.field(vec({0, 0, 0})), Vector::Zero(3));
    EXPECT_THROW(rigid_body({1, 0, 1}), std::invalid_argument);
    EXPECT_THROW((void)rb.energy(vec({1, 2})), DimensionError);
}

TEST(RigidBody, IsotropicBodyIsAtRest) {
    const auto rb = rigid_body({2, 2, 2});
    Rng rng(20, "iso-rest");
    for (int n = 0; n < 20; ++n) { EXPECT_LT(rb.field(test::random_point(rng, 3)).norm(), 1e-15); }
}

TEST(UnderwaterVehicle, EnergyValues) {
    const auto uv = underwater_vehicle({1, 2, 3}, {3, 2, 1}, 1.0, 9.8, {1, 1, 1});
    PhasePoint z = PhasePoint::Zero(9);
    z(0) = 1.0;
    EXPECT_NEAR(uv.energy(z), 0.5, 1e-15);
    EXPECT_EQ(uv.energy(PhasePoint::Zero(9)), 0.0);
    z.setZero();
    z(6) = 1.0;
    EXPECT_NEAR(uv.energy(z), -9.8, 1e-14);
}

TEST(UnderwaterVehicle, OnlyFirstThreeListedInvariantsAreCasimirs) {
    const auto uv = underwater_vehicle({1, 2, 3}, {3, 2, 1}, 1.0, 9.8, {1, 1, 1});
    const auto listed = underwater_vehicle_listed_invariants();
    ASSERT_EQ(listed.size(), 6u);
    Rng rng(21, "vehicle-casimir");
    std::vector<double> worst(6, 0.0);
    for (int n = 0; n < 200; ++n) {
        const PhasePoint z = test::random_point(rng, 9);
        for (std::size_t k = 0; k < 6; ++k) {
            worst[k] = std::max(worst[k], (uv.structure.poisson_matrix(z) * listed[k].gradient(z)).norm());
        }
    }
    for (std::size_t k = 0; k < 3; ++k) { EXPECT_LT(worst[k], 1e-12) << listed[k].name; }
    // P.Q, P.G and |P|^2 are conserved by no tensor of this block form.
    for (std::size_t k = 3; k < 6; ++k) { EXPECT_GT(worst[k], 1e-2) << listed[k].name; }
}

TEST(GaussianSection, EnergyValues) {
    const auto gs = gaussian_section(1.0);
    EXPECT_NEAR(gs.energy(vec({1, 1, 0})), std::exp(-2.0), 1e-15);
    EXPECT_EQ(gs.energy(vec({0, 0, 0})), 0.0);
    const auto gs2 = gaussian_section(2.0);
    EXPECT_NEAR(gs2.energy(vec({1, 1, 1})), std::exp(-0.75), 1e-15);
    EXPECT_THROW(gaussian_section(0.0), std::invalid_argument);
}

TEST(TwoVortex, EnergyValues) {
    const auto tv = two_vortex(1.0, 1.0);
    const double h = sphere::kPi / 2;
    EXPECT_NEAR(tv.energy(vec({h, 0, h, h})), 0.0, 1e-15);                         // orthogonal
    EXPECT_NEAR(tv.energy(vec({h, 0, h, sphere::kPi})), -std::log(2.0), 1e-15);     // antipodal
    const auto tv2 = two_vortex(2.0, -0.5);
    EXPECT_NEAR(tv2.energy(vec({h, 0, h, sphere::kPi})), std::log(2.0), 1e-15);
    EXPECT_THROW((void)tv.energy(vec({h, 0, h, 0})), SingularityError);
    EXPECT_FALSE(tv.admissible(vec({h, 0, h, 1e-4})));
    EXPECT_TRUE(tv.admissible(vec({h, 0, h, 0.1})));
    EXPECT_THROW(two_vortex(0.0, 1.0), std::invalid_argument);
}

TEST(TwoVortex, FieldMatchesPointVortexEquations) {
    Rng rng(22, "vortex-oracle");
    for (auto [l1, l2] : {std::pair{1.0, 1.0}, std::pair{2.0, -0.5}}) {
        const auto tv = two_vortex(l1, l2);
        for (int n = 0; n < 100; ++n) {
            const PhasePoint z = test::random_state(rng, tv);
            const Vector oracle = test::vortex_chart_oracle(z, l1, l2);
            EXPECT_LT((tv.field(z) - oracle).norm(), 1e-8 * (1.0 + oracle.norm()));
        }
    }
}

TEST(SphericalNorm3, EnergyValues) {
    const auto sn = spherical_norm3();
    const double h = sphere::kPi / 2;
    // Both factors at (1, 0, 0): cbrt(2).
    EXPECT_NEAR(sn.energy(vec({h, 0, h, 0})), std::cbrt(2.0), 1e-14);
    // Both at (-1, 0, 0): signed cube root gives -cbrt(2).
    EXPECT_NEAR(sn.energy(vec({h, sphere::kPi, h, sphere::kPi})), -std::cbrt(2.0), 1e-14);
    // (1, 0, 0) and (-1, 0, 0): sum of cubes vanishes; H = 0 but no gradient.
    EXPECT_NEAR(sn.energy(vec({h, 0, h, sphere::kPi})), 0.0, 1e-14);
    EXPECT_THROW((void)sn.field(vec({h, 0, h, sphere::kPi})), SingularityError);
}

TEST(SystemInvariants, GradientsMatchFiniteDifferences) {
    Rng rng(23, "grad-fd");
    for (const auto &sys : test::all_systems()) {
        int checked = 0;
        while (checked < 100) {
            const PhasePoint z = test::random_state(rng, sys);
            if (sys.name == "spherical_norm3" && std::abs(sys.energy(z)) < 0.1) { continue; }
            EXPECT_LT(fd::relative_error(sys.grad_h(z), fd::gradient(sys.hamiltonian, z)), 1e-6) << sys.name;
            ++checked;
        }
    }
}

TEST(SystemInvariants, EnergyIsConservedPointwise) {
    // dH(X_H) = 0 at every state (antisymmetry of the structure).
    Rng rng(24, "dh-xh");
    for (const auto &sys : test::all_systems()) {
        int checked = 0;
        while (checked < 1000) {
            const PhasePoint z = test::random_state(rng, sys);
            if (sys.name == "spherical_norm3" && std::abs(sys.energy(z)) < 0.1) { continue; }
            const Vector dh = sys.grad_h(z);
            const Vector x = sys.field(z);
            EXPECT_LT(std::abs(dh.dot(x)), 1e-10 * (1.0 + dh.squaredNorm())) << sys.name;
            ++checked;
        }
    }
}

TEST(SystemInvariants, Rk4EnergyDrift) {
    const auto rb = rigid_body({1, 10, 0.1});
    Rng rng(25, "rk4-energy");
    for (int n = 0; n < 5; ++n) {
        const PhasePoint z0 = test::random_point(rng, 3);
        const auto traj = integrate([&](const PhasePoint &z) { return rb.field(z); }, z0, 1e-3, 1.0);
        ASSERT_FALSE(traj.truncated);
        EXPECT_LE(conservation_drift(traj, rb.hamiltonian), 1e-7 * std::max(1.0, rb.energy(z0)));
        EXPECT_LE(conservation_drift(traj, rb.casimirs[0].value), 1e-7);
    }
}

TEST(NullSystem, VanishingData) {
    const auto ns = null_system();
    Rng rng(26, "null");
    for (int n = 0; n < 10; ++n) {
        const PhasePoint z = test::random_point(rng, 3);
        EXPECT_EQ(ns.energy(z), 0.0);
        EXPECT_EQ(ns.field(z), Vector::Zero(3));
    }
}
