#pragma once

#include "hamkrr/types.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <utility>

namespace hamkrr {

/// The standard isomorphism R^3 -> so(3): hat(v) * w == v.cross(w).
inline Eigen::Matrix3d hat(const Eigen::Vector3d &v) {
    Eigen::Matrix3d m;
    m << 0.0, -v.z(), v.y(),
         v.z(), 0.0, -v.x(),
         -v.y(), v.x(), 0.0;
    return m;
}

/// Poisson tensor and Riemannian metric of a phase space, both expressed in a
/// fixed chart.
///
/// `poisson` returns the matrix that sends the coordinate differential dh of a
/// function to its Hamiltonian vector field, X_h = poisson(z) * dh. `metric`
/// returns g(z); leave it empty for the Euclidean metric g = I.
struct StructureField {
    Eigen::Index dim = 0;
    std::function<Matrix(const PhasePoint &)> poisson;
    std::function<Matrix(const PhasePoint &)> metric;

    [[nodiscard]] bool is_euclidean() const noexcept { return !static_cast<bool>(metric); }

    [[nodiscard]] Matrix poisson_matrix(const PhasePoint &z) const {
        require_dim(z, dim, "StructureField::poisson_matrix");
        return poisson(z);
    }

    [[nodiscard]] Matrix metric_matrix(const PhasePoint &z) const {
        require_dim(z, dim, "StructureField::metric_matrix");
        if (is_euclidean()) { return Matrix::Identity(dim, dim); }
        return metric(z);
    }
};

/// Matrix J(z) of the compatible structure: X_h(z) = J(z) * grad h(z), where
/// grad h = g^{-1} dh is the Riemannian gradient. Equals poisson(z) * g(z).
inline Matrix compatible_structure(const StructureField &sf, const PhasePoint &z) {
    Matrix b = sf.poisson_matrix(z);
    if (sf.is_euclidean()) { return b; }
    Matrix g = sf.metric_matrix(z);
    Eigen::LLT<Matrix> llt(g);
    if (llt.info() != Eigen::Success) {
        throw MetricDegeneracyError("compatible_structure: metric is not positive definite at the given point");
    }
    return b * g;
}

/// Hamiltonian vector field J(z) * grad_h for a Riemannian gradient `grad_h`.
inline Vector hamiltonian_field(const StructureField &sf, const Vector &grad_h, const PhasePoint &z) {
    require_dim(grad_h, sf.dim, "hamiltonian_field");
    return compatible_structure(sf, z) * grad_h;
}

/// Solve g(z) x = rhs, throwing when the metric degenerates.
inline Vector metric_solve(const StructureField &sf, const PhasePoint &z, const Vector &rhs) {
    if (sf.is_euclidean()) { return rhs; }
    Eigen::LLT<Matrix> llt(sf.metric_matrix(z));
    if (llt.info() != Eigen::Success) {
        throw MetricDegeneracyError("metric is not positive definite at the given point");
    }
    return llt.solve(rhs);
}

/// Coordinate chart of a manifold embedded in R^m.
struct Chart {
    std::string name;
    Eigen::Index dim = 0;
    Eigen::Index ambient_dim = 0;
    std::function<Vector(const PhasePoint &)> embed;
    std::function<Matrix(const PhasePoint &)> jacobian;  // ambient_dim x dim
    std::function<bool(const PhasePoint &)> contains;

    void validate(const PhasePoint &z) const {
        require_dim(z, dim, "Chart::validate");
        if (contains && !contains(z)) { throw DomainError("point outside the domain of chart '" + name + "'"); }
    }
};

namespace sphere {

inline constexpr double kPi = std::numbers::pi;

/// (theta, phi) -> (sin t cos p, sin t sin p, cos t).
inline Eigen::Vector3d embed(double theta, double phi) {
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

/// Columns are d/dtheta and d/dphi of the embedding.
inline Eigen::Matrix<double, 3, 2> jacobian(double theta, double phi) {
    Eigen::Matrix<double, 3, 2> j;
    const double st = std::sin(theta), ct = std::cos(theta);
    const double sp = std::sin(phi), cp = std::cos(phi);
    j << ct * cp, -st * sp,
         ct * sp, st * cp,
         -st, 0.0;
    return j;
}

/// Great-circle distance between two unit vectors.
inline double geodesic_distance(const Eigen::Vector3d &a, const Eigen::Vector3d &b) {
    return std::atan2(a.cross(b).norm(), a.dot(b));
}

/// Open colatitude interval; longitude accepted on its closure since the
/// coordinate formulas stay smooth there.
inline bool in_chart(double theta, double phi) {
    return theta > 0.0 && theta < kPi && phi >= 0.0 && phi <= 2.0 * kPi;
}

inline bool within_margin(double theta, double phi, double margin) {
    return theta >= margin && theta <= kPi - margin && phi >= margin && phi <= 2.0 * kPi - margin;
}

}  // namespace sphere

/// Product of `factors` copies of the (theta, phi) chart on S^2, embedded in R^{3k}.
inline Chart sphere_product_chart(int factors) {
    Chart c;
    c.name = "sphere_product";
    c.dim = 2 * factors;
    c.ambient_dim = 3 * factors;
    c.embed = [factors](const PhasePoint &z) {
        Vector x(3 * factors);
        for (int f = 0; f < factors; ++f) { x.segment<3>(3 * f) = sphere::embed(z(2 * f), z(2 * f + 1)); }
        return x;
    };
    c.jacobian = [factors](const PhasePoint &z) {
        Matrix j = Matrix::Zero(3 * factors, 2 * factors);
        for (int f = 0; f < factors; ++f) { j.block<3, 2>(3 * f, 2 * f) = sphere::jacobian(z(2 * f), z(2 * f + 1)); }
        return j;
    };
    c.contains = [factors](const PhasePoint &z) {
        for (int f = 0; f < factors; ++f) {
            if (!sphere::in_chart(z(2 * f), z(2 * f + 1))) { return false; }
        }
        return true;
    };
    return c;
}

/// Symplectic structure sum_i lambda_i pi_i^* omega_{S^2} on a product of
/// spheres with the round product metric.
///
/// Per factor, omega = lambda sin(theta) dtheta ^ dphi and the Hamiltonian field
/// solves i_X omega = dh, so the Poisson matrix is (1 / (lambda sin theta)) [[0, 1], [-1, 0]].
/// With lambda = 1 this reproduces xdot = grad h x x on the embedded sphere.
inline StructureField sphere_product_structure(std::vector<double> vorticities) {
    const auto factors = static_cast<Eigen::Index>(vorticities.size());
    StructureField sf;
    sf.dim = 2 * factors;
    sf.poisson = [vorticities](const PhasePoint &z) {
        const auto k = static_cast<Eigen::Index>(vorticities.size());
        Matrix b = Matrix::Zero(2 * k, 2 * k);
        for (Eigen::Index f = 0; f < k; ++f) {
            const double s = std::sin(z(2 * f));
            const double w = 1.0 / (vorticities[static_cast<std::size_t>(f)] * s);
            b(2 * f, 2 * f + 1) = w;
            b(2 * f + 1, 2 * f) = -w;
        }
        return b;
    };
    sf.metric = [factors](const PhasePoint &z) {
        Matrix g = Matrix::Zero(2 * factors, 2 * factors);
        for (Eigen::Index f = 0; f < factors; ++f) {
            const double s = std::sin(z(2 * f));
            g(2 * f, 2 * f) = 1.0;
            g(2 * f + 1, 2 * f + 1) = s * s;
        }
        return g;
    };
    return sf;
}

}  // namespace hamkrr
