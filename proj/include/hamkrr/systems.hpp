#pragma once

#include "hamkrr/geometry.hpp"
#include "hamkrr/types.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hamkrr {

struct Casimir {
    std::string name;
    std::function<double(const PhasePoint &)> value;
    std::function<Vector(const PhasePoint &)> gradient;  // coordinate differential
};

/// A benchmark Hamiltonian system in a fixed chart.
///
/// `grad_h` returns the coordinate differential dH (what finite differences of
/// `hamiltonian` approximate); the vector field is poisson(z) * dH(z).
struct SystemModel {
    std::string name;
    Eigen::Index dim = 0;
    std::function<double(const PhasePoint &)> hamiltonian;
    std::function<Vector(const PhasePoint &)> grad_h;
    StructureField structure;
    std::vector<Casimir> casimirs;
    std::optional<Chart> chart;
    /// Rejects states that must not be used as data (singular sets). May be empty.
    std::function<void(const PhasePoint &)> guard;

    void validate(const PhasePoint &z) const {
        require_dim(z, dim, "SystemModel::validate");
        if (chart) { chart->validate(z); }
        if (guard) { guard(z); }
    }

    [[nodiscard]] bool admissible(const PhasePoint &z) const {
        try {
            validate(z);
        } catch (const Error &) {
            return false;
        }
        return true;
    }

    [[nodiscard]] double energy(const PhasePoint &z) const {
        require_dim(z, dim, "SystemModel::energy");
        return hamiltonian(z);
    }

    /// Riemannian gradient g^{-1} dH.
    [[nodiscard]] Vector riemannian_gradient(const PhasePoint &z) const {
        return metric_solve(structure, z, grad_h(z));
    }

    /// True Hamiltonian vector field X_H(z).
    [[nodiscard]] Vector field(const PhasePoint &z) const {
        require_dim(z, dim, "SystemModel::field");
        return structure.poisson_matrix(z) * grad_h(z);
    }
};

namespace detail {

inline void require_positive(const Eigen::Vector3d &v, const char *what) {
    if (!(v.array() > 0.0).all()) { throw std::invalid_argument(std::string(what) + " entries must be positive"); }
}

inline StructureField so3_structure() {
    StructureField sf;
    sf.dim = 3;
    sf.poisson = [](const PhasePoint &z) -> Matrix { return hat(z.head<3>()); };
    return sf;
}

inline Casimir squared_norm_casimir(std::string name, Eigen::Index offset, Eigen::Index dim) {
    return {std::move(name),
            [offset](const PhasePoint &z) { return z.segment<3>(offset).squaredNorm(); },
            [offset, dim](const PhasePoint &z) {
                Vector g = Vector::Zero(dim);
                g.segment<3>(offset) = 2.0 * z.segment<3>(offset);
                return g;
            }};
}

inline Casimir dot_casimir(std::string name, Eigen::Index a, Eigen::Index b, Eigen::Index dim) {
    return {std::move(name),
            [a, b](const PhasePoint &z) { return z.segment<3>(a).dot(z.segment<3>(b)); },
            [a, b, dim](const PhasePoint &z) {
                Vector g = Vector::Zero(dim);
                g.segment<3>(a) += z.segment<3>(b);
                g.segment<3>(b) += z.segment<3>(a);
                return g;
            }};
}

}  // namespace detail

/// Free rigid body on so(3)^*: H = 1/2 P^T I^{-1} P, X_H = P x I^{-1} P.
inline SystemModel rigid_body(const Eigen::Vector3d &inertia) {
    detail::require_positive(inertia, "rigid_body: inertia");
    const Eigen::Vector3d inv = inertia.cwiseInverse();
    SystemModel s;
    s.name = "rigid_body";
    s.dim = 3;
    s.hamiltonian = [inv](const PhasePoint &p) { return 0.5 * p.cwiseProduct(p).dot(inv); };
    s.grad_h = [inv](const PhasePoint &p) -> Vector { return p.cwiseProduct(inv); };
    s.structure = detail::so3_structure();
    s.casimirs.push_back(detail::squared_norm_casimir("norm_sq", 0, 3));
    return s;
}

/// Underwater vehicle on so(3)^* x R3^* x R3^*, state (P, Q, G).
///
/// H = 1/2 (P^T A P + Q^T C Q - 2 m g0 (G . r_G)) with A = I^{-1}, C = M^{-1} and
/// no P-Q coupling. Poisson matrix [[P^, Q^, G^], [Q^, 0, 0], [G^, 0, 0]].
/// Only Q.G, |Q|^2 and |G|^2 are annihilated by this tensor; see
/// underwater_vehicle_listed_invariants() for the full six-function family.
inline SystemModel underwater_vehicle(const Eigen::Vector3d &inertia, const Eigen::Vector3d &mass_matrix, double mass,
                                      double gravity, const Eigen::Vector3d &r_g) {
    detail::require_positive(inertia, "underwater_vehicle: inertia");
    detail::require_positive(mass_matrix, "underwater_vehicle: mass matrix");
    const Eigen::Vector3d a = inertia.cwiseInverse();
    const Eigen::Vector3d c = mass_matrix.cwiseInverse();
    const Eigen::Vector3d pull = mass * gravity * r_g;
    SystemModel s;
    s.name = "underwater_vehicle";
    s.dim = 9;
    s.hamiltonian = [a, c, pull](const PhasePoint &z) {
        const auto p = z.segment<3>(0);
        const auto q = z.segment<3>(3);
        const auto g = z.segment<3>(6);
        return 0.5 * (p.cwiseProduct(p).dot(a) + q.cwiseProduct(q).dot(c)) - g.dot(pull);
    };
    s.grad_h = [a, c, pull](const PhasePoint &z) {
        Vector d(9);
        d.segment<3>(0) = z.segment<3>(0).cwiseProduct(a);
        d.segment<3>(3) = z.segment<3>(3).cwiseProduct(c);
        d.segment<3>(6) = -pull;
        return d;
    };
    s.structure.dim = 9;
    s.structure.poisson = [](const PhasePoint &z) {
        Matrix lam = Matrix::Zero(9, 9);
        const Eigen::Matrix3d ph = hat(z.segment<3>(0));
        const Eigen::Matrix3d qh = hat(z.segment<3>(3));
        const Eigen::Matrix3d gh = hat(z.segment<3>(6));
        lam.block<3, 3>(0, 0) = ph;
        lam.block<3, 3>(0, 3) = qh;
        lam.block<3, 3>(0, 6) = gh;
        lam.block<3, 3>(3, 0) = qh;
        lam.block<3, 3>(6, 0) = gh;
        return lam;
    };
    s.casimirs.push_back(detail::dot_casimir("Q.G", 3, 6, 9));
    s.casimirs.push_back(detail::squared_norm_casimir("|Q|^2", 3, 9));
    s.casimirs.push_back(detail::squared_norm_casimir("|G|^2", 6, 9));
    return s;
}

/// The six quadratic invariants C1..C6 usually quoted for the vehicle:
/// Q.G, |Q|^2, |G|^2, P.Q, P.G, |P|^2.
inline std::vector<Casimir> underwater_vehicle_listed_invariants() {
    return {detail::dot_casimir("C1=Q.G", 3, 6, 9),       detail::squared_norm_casimir("C2=|Q|^2", 3, 9),
            detail::squared_norm_casimir("C3=|G|^2", 6, 9), detail::dot_casimir("C4=P.Q", 0, 3, 9),
            detail::dot_casimir("C5=P.G", 0, 6, 9),       detail::squared_norm_casimir("C6=|P|^2", 0, 9)};
}

/// H(x) = x1^2 x2^3 exp(-|x|^2 / eta^2) with the rigid-body Poisson structure.
inline SystemModel gaussian_section(double eta) {
    if (!(eta > 0.0)) { throw std::invalid_argument("gaussian_section: eta must be positive"); }
    const double k = 1.0 / (eta * eta);
    SystemModel s;
    s.name = "gaussian_section";
    s.dim = 3;
    s.hamiltonian = [k](const PhasePoint &x) {
        return x(0) * x(0) * x(1) * x(1) * x(1) * std::exp(-k * x.squaredNorm());
    };
    s.grad_h = [k](const PhasePoint &x) {
        const double e = std::exp(-k * x.squaredNorm());
        const double x1 = x(0), x2 = x(1), x3 = x(2);
        const double h = x1 * x1 * x2 * x2 * x2;
        Vector g(3);
        g << (2.0 * x1 * x2 * x2 * x2 - 2.0 * k * x1 * h) * e,
             (3.0 * x1 * x1 * x2 * x2 - 2.0 * k * x2 * h) * e,
             -2.0 * k * x3 * h * e;
        return g;
    };
    s.structure = detail::so3_structure();
    s.casimirs.push_back(detail::squared_norm_casimir("norm_sq", 0, 3));
    return s;
}

namespace vortex {

/// Minimum of 1 - x1.x2 accepted by Hamiltonian evaluation.
inline constexpr double kEvaluationGuard = 1e-9;
/// Minimum of 1 - x1.x2 accepted for training and test data.
inline constexpr double kDataGuard = 1e-6;
/// Band excluded from two-vortex test grids.
inline constexpr double kTestBand = 1e-3;

inline double separation(const PhasePoint &z) {
    return 1.0 - sphere::embed(z(0), z(1)).dot(sphere::embed(z(2), z(3)));
}

/// Ambient point-vortex field xdot_j = sum_{i != j} lambda_i (x_i x x_j) / (1 - x_i . x_j).
inline Vector ambient_field(const Eigen::Vector3d &x1, const Eigen::Vector3d &x2, double l1, double l2) {
    const double den = 1.0 - x1.dot(x2);
    Vector v(6);
    v.head<3>() = l2 * x2.cross(x1) / den;
    v.tail<3>() = l1 * x1.cross(x2) / den;
    return v;
}

}  // namespace vortex

/// Two point vortices on S^2 x S^2, chart (theta1, phi1, theta2, phi2).
/// H = -l1 l2 log(1 - x1 . x2); singular on the diagonal.
inline SystemModel two_vortex(double l1, double l2) {
    if (l1 == 0.0 || l2 == 0.0) { throw std::invalid_argument("two_vortex: vorticities must be nonzero"); }
    const Chart chart = sphere_product_chart(2);
    SystemModel s;
    s.name = "two_vortex";
    s.dim = 4;
    s.chart = chart;
    s.hamiltonian = [l1, l2](const PhasePoint &z) {
        const double sep = vortex::separation(z);
        if (sep < vortex::kEvaluationGuard) { throw SingularityError("two_vortex: vortices coincide"); }
        return -l1 * l2 * std::log(sep);
    };
    s.grad_h = [l1, l2, chart](const PhasePoint &z) -> Vector {
        const Vector x = chart.embed(z);
        const double sep = 1.0 - x.head<3>().dot(x.tail<3>());
        if (sep < vortex::kEvaluationGuard) { throw SingularityError("two_vortex: vortices coincide"); }
        Vector amb(6);
        amb.head<3>() = x.tail<3>();
        amb.tail<3>() = x.head<3>();
        amb *= l1 * l2 / sep;
        return chart.jacobian(z).transpose() * amb;
    };
    s.structure = sphere_product_structure({l1, l2});
    s.guard = [](const PhasePoint &z) {
        if (vortex::separation(z) < vortex::kDataGuard) {
            throw SingularityError("two_vortex: state inside the singularity guard");
        }
    };
    return s;
}

/// Spherical 3-norm H = cbrt(sum_k x1k^3 + x2k^3) on S^2 x S^2 (real, signed cube root).
inline SystemModel spherical_norm3() {
    const Chart chart = sphere_product_chart(2);
    SystemModel s;
    s.name = "spherical_norm3";
    s.dim = 4;
    s.chart = chart;
    s.hamiltonian = [chart](const PhasePoint &z) { return std::cbrt(chart.embed(z).array().cube().sum()); };
    s.grad_h = [chart](const PhasePoint &z) -> Vector {
        const Vector x = chart.embed(z);
        const double r = std::cbrt(x.array().cube().sum());
        if (std::abs(r) < 1e-8) { throw SingularityError("spherical_norm3: gradient undefined where the sum of cubes vanishes"); }
        const Vector amb = x.array().square() / (r * r);
        return chart.jacobian(z).transpose() * amb;
    };
    s.structure = sphere_product_structure({1.0, 1.0});
    return s;
}

/// Rigid body with H = 0; produces identically vanishing data.
inline SystemModel null_system() {
    SystemModel s = rigid_body(Eigen::Vector3d::Ones());
    s.name = "null";
    s.hamiltonian = [](const PhasePoint &) { return 0.0; };
    s.grad_h = [](const PhasePoint &) -> Vector { return Vector::Zero(3); };
    return s;
}

}  // namespace hamkrr
