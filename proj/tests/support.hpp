#pragma once

#include "hamkrr/hamkrr.hpp"

#include <cmath>
#include <cstdint>
#include <string>

namespace hamkrr::test {

/// Uniform point in [lo, hi]^d.
inline PhasePoint random_point(Rng &rng, Eigen::Index d, double lo = -1.0, double hi = 1.0) {
    PhasePoint p(d);
    for (Eigen::Index i = 0; i < d; ++i) { p(i) = rng.uniform(lo, hi); }
    return p;
}

/// Uniform chart point on a product of spheres, away from the chart boundary.
inline PhasePoint random_sphere_point(Rng &rng, int factors, double margin = 0.05) {
    PhasePoint p(2 * factors);
    for (int f = 0; f < factors; ++f) {
        p(2 * f) = rng.uniform(margin, sphere::kPi - margin);
        p(2 * f + 1) = rng.uniform(margin, 2.0 * sphere::kPi - margin);
    }
    return p;
}

/// Random admissible state for a benchmark system.
inline PhasePoint random_state(Rng &rng, const SystemModel &system) {
    if (!system.chart) { return random_point(rng, system.dim); }
    for (;;) {
        PhasePoint z = random_sphere_point(rng, static_cast<int>(system.dim / 2));
        if (test_admissible(system, z)) { return z; }
    }
}

/// Every benchmark system with its reference parameters.
inline std::vector<SystemModel> all_systems() {
    return {rigid_body({1.0, 10.0, 0.1}),
            underwater_vehicle({1.0, 2.0, 3.0}, {3.0, 2.0, 1.0}, 1.0, 9.8, {1.0, 1.0, 1.0}),
            gaussian_section(2.0),
            two_vortex(1.0, 1.0),
            spherical_norm3()};
}

/// Point-vortex field pushed into chart coordinates: the chart velocity v with
/// D iota(z) v equal to the ambient field (least squares on the tangent space).
inline Vector vortex_chart_oracle(const PhasePoint &z, double l1, double l2) {
    const Chart chart = sphere_product_chart(2);
    const Vector x = chart.embed(z);
    const Vector amb = vortex::ambient_field(x.head<3>(), x.tail<3>(), l1, l2);
    const Matrix jac = chart.jacobian(z);
    return (jac.transpose() * jac).ldlt().solve(jac.transpose() * amb);
}

}  // namespace hamkrr::test
