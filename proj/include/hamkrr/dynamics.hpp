#pragma once

#include "hamkrr/geometry.hpp"
#include "hamkrr/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace hamkrr {

using VectorField = std::function<Vector(const PhasePoint &)>;
using ScalarFunction = std::function<double(const PhasePoint &)>;
using Distance = std::function<double(const PhasePoint &, const PhasePoint &)>;

struct Trajectory {
    std::vector<double> times;
    PointSet states;
    std::string field_tag;
    /// Set when integration stopped early at a chart exit or singularity.
    bool truncated = false;
    std::string truncation_reason;

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
};

/// Classical fixed-step RK4 from t = 0 to T.
///
/// `admissible` is checked at every stage; a rejected state, or a DomainError
/// thrown by the field, truncates the trajectory at the last accepted step.
inline Trajectory integrate(const VectorField &field, const PhasePoint &z0, double dt, double horizon,
                            std::string field_tag = {},
                            const std::function<bool(const PhasePoint &)> &admissible = {}) {
    if (!(dt > 0.0)) { throw std::invalid_argument("integrate: dt must be positive"); }
    if (!(horizon >= dt)) { throw std::invalid_argument("integrate: horizon must be at least one step"); }
    const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));

    Trajectory traj;
    traj.field_tag = std::move(field_tag);
    traj.times.reserve(steps + 1);
    traj.states.reserve(steps + 1);
    traj.times.push_back(0.0);
    traj.states.push_back(z0);

    auto check = [&](const PhasePoint &z) {
        if (admissible && !admissible(z)) { throw DomainError("state left the admissible region"); }
    };

    PhasePoint z = z0;
    try {
        check(z);
        for (std::size_t s = 1; s <= steps; ++s) {
            const Vector k1 = field(z);
            const PhasePoint z2 = z + 0.5 * dt * k1;
            check(z2);
            const Vector k2 = field(z2);
            const PhasePoint z3 = z + 0.5 * dt * k2;
            check(z3);
            const Vector k3 = field(z3);
            const PhasePoint z4 = z + dt * k3;
            check(z4);
            const Vector k4 = field(z4);
            PhasePoint next = z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            check(next);
            if (!next.allFinite()) { throw DomainError("non-finite state"); }
            z = std::move(next);
            traj.times.push_back(static_cast<double>(s) * dt);
            traj.states.push_back(z);
        }
    } catch (const DomainError &e) {
        traj.truncated = true;
        traj.truncation_reason = e.what();
    }
    return traj;
}

inline double euclidean_distance(const PhasePoint &a, const PhasePoint &b) { return (a - b).norm(); }

/// Riemannian distance on a product of round spheres in (theta, phi) charts:
/// square root of the sum of squared per-factor great-circle distances.
inline double sphere_product_distance(const PhasePoint &a, const PhasePoint &b) {
    if (a.size() != b.size() || a.size() % 2 != 0) { throw DimensionError("sphere_product_distance: bad dimensions"); }
    double sum = 0.0;
    for (Eigen::Index f = 0; f < a.size() / 2; ++f) {
        const double dist = sphere::geodesic_distance(sphere::embed(a(2 * f), a(2 * f + 1)),
                                                      sphere::embed(b(2 * f), b(2 * f + 1)));
        sum += dist * dist;
    }
    return std::sqrt(sum);
}

/// max over the shared time grid of dist(a(t), b(t)).
inline double flow_distance(const Trajectory &a, const Trajectory &b, const Distance &dist = euclidean_distance) {
    if (a.times.size() != b.times.size()) { throw std::invalid_argument("flow_distance: time grids differ in length"); }
    double worst = 0.0;
    for (std::size_t k = 0; k < a.times.size(); ++k) {
        if (std::abs(a.times[k] - b.times[k]) > 1e-12 * std::max(1.0, std::abs(a.times[k]))) {
            throw std::invalid_argument("flow_distance: time grids differ");
        }
        worst = std::max(worst, dist(a.states[k], b.states[k]));
    }
    return worst;
}

/// max_t |f(z_t) - f(z_0)|.
inline double conservation_drift(const Trajectory &traj, const ScalarFunction &f) {
    if (traj.states.empty()) { return 0.0; }
    const double f0 = f(traj.states.front());
    double worst = 0.0;
    for (const auto &z : traj.states) { worst = std::max(worst, std::abs(f(z) - f0)); }
    return worst;
}

/// CSV with a `time` column followed by one column per state coordinate.
inline void write_trajectory_csv(std::ostream &os, const Trajectory &traj) {
    os << "time";
    const Eigen::Index d = traj.states.empty() ? 0 : traj.states.front().size();
    for (Eigen::Index i = 0; i < d; ++i) { os << ",z" << i; }
    os << '\n' << std::setprecision(17);
    for (std::size_t k = 0; k < traj.size(); ++k) {
        os << traj.times[k];
        for (Eigen::Index i = 0; i < d; ++i) { os << ',' << traj.states[k](i); }
        os << '\n';
    }
}

}  // namespace hamkrr
