#pragma once

#include "hamkrr/geometry.hpp"
#include "hamkrr/kernels.hpp"
#include "hamkrr/types.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace hamkrr {

/// Sample points with paired (possibly noisy) vector-field observations.
struct TrainingSet {
    PointSet points;
    std::vector<Vector> fields;
    double sigma = 0.0;
    std::uint64_t seed = 0;

    [[nodiscard]] std::size_t size() const noexcept { return points.size(); }

    void validate(Eigen::Index dim) const {
        if (points.empty()) { throw std::invalid_argument("TrainingSet: at least one sample is required"); }
        if (points.size() != fields.size()) { throw DimensionError("TrainingSet: points and fields differ in length"); }
        for (std::size_t n = 0; n < points.size(); ++n) {
            require_dim(points[n], dim, "TrainingSet point");
            require_dim(fields[n], dim, "TrainingSet field");
        }
    }

    /// Observations stacked into a single dN vector.
    [[nodiscard]] Vector stacked_fields() const {
        if (fields.empty()) { return {}; }
        const Eigen::Index d = fields.front().size();
        Vector x(d * static_cast<Eigen::Index>(fields.size()));
        for (std::size_t n = 0; n < fields.size(); ++n) { x.segment(static_cast<Eigen::Index>(n) * d, d) = fields[n]; }
        return x;
    }

    [[nodiscard]] TrainingSet subset(const std::vector<std::size_t> &idx) const {
        TrainingSet out;
        out.sigma = sigma;
        out.seed = seed;
        out.points.reserve(idx.size());
        out.fields.reserve(idx.size());
        for (std::size_t i : idx) {
            out.points.push_back(points.at(i));
            out.fields.push_back(fields.at(i));
        }
        return out;
    }
};

/// Diagnostics attached to every fit.
struct ConditioningReport {
    std::string factorization;          // "llt" or "ldlt"
    double condition_estimate = 0.0;    // reciprocal of the factorization's rcond()
    double min_diagonal = 0.0;          // of the regularized system matrix
    double max_diagonal = 0.0;
    double relative_residual = 0.0;     // |(G + lambda N I) c - X| / |X|
};

inline constexpr double kMinLambda = 1e-14;

namespace detail {

/// Per-point Poisson and metric matrices.
struct PointStructure {
    std::vector<Matrix> poisson;
    std::vector<Matrix> metric;
    bool euclidean = true;
};

inline PointStructure evaluate_structure(const PointSet &points, const StructureField &sf) {
    PointStructure ps;
    ps.euclidean = sf.is_euclidean();
    ps.poisson.reserve(points.size());
    ps.metric.reserve(points.size());
    for (const auto &z : points) {
        ps.poisson.push_back(sf.poisson_matrix(z));
        ps.metric.push_back(sf.metric_matrix(z));
    }
    return ps;
}

/// Symmetric part A of the Gram matrix, A_ij = B_i d1d2K(z_i, z_j) B_j^T, so
/// that G = A * blockdiag(g_j). A_ji = A_ij^T, so only j >= i is evaluated.
inline Matrix symmetric_gram(const PointSet &points, const Kernel &kernel, const PointStructure &ps) {
    const auto n = static_cast<Eigen::Index>(points.size());
    const Eigen::Index d = kernel.dim();
    Matrix a(d * n, d * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Matrix &bi = ps.poisson[static_cast<std::size_t>(i)];
        for (Eigen::Index j = i; j < n; ++j) {
            const Matrix &bj = ps.poisson[static_cast<std::size_t>(j)];
            const Matrix block = bi * kernel.hess12(points[static_cast<std::size_t>(i)], points[static_cast<std::size_t>(j)]) *
                                 bj.transpose();
            a.block(i * d, j * d, d, d) = block;
            if (j != i) { a.block(j * d, i * d, d, d) = block.transpose(); }
        }
        // Exact symmetry on the diagonal block.
        Matrix diag = a.block(i * d, i * d, d, d);
        a.block(i * d, i * d, d, d) = 0.5 * (diag + diag.transpose());
    }
    return a;
}

inline Vector apply_metric(const PointStructure &ps, const Vector &c) {
    if (ps.euclidean) { return c; }
    const Eigen::Index d = ps.metric.front().rows();
    Vector out(c.size());
    for (std::size_t i = 0; i < ps.metric.size(); ++i) {
        const auto off = static_cast<Eigen::Index>(i) * d;
        out.segment(off, d) = ps.metric[i] * c.segment(off, d);
    }
    return out;
}

inline Vector solve_metric(const PointStructure &ps, const Vector &u) {
    if (ps.euclidean) { return u; }
    const Eigen::Index d = ps.metric.front().rows();
    Vector out(u.size());
    for (std::size_t i = 0; i < ps.metric.size(); ++i) {
        const auto off = static_cast<Eigen::Index>(i) * d;
        Eigen::LLT<Matrix> llt(ps.metric[i]);
        if (llt.info() != Eigen::Success) { throw MetricDegeneracyError("metric is not positive definite at a sample"); }
        out.segment(off, d) = llt.solve(u.segment(off, d));
    }
    return out;
}

}  // namespace detail

/// Generalized differential Gram matrix with (i, j) block
/// B(z_i) d1d2K(z_i, z_j) B(z_j)^T g(z_j).
inline Matrix assemble_gram(const PointSet &points, const KernelModel &kernel, const StructureField &sf) {
    if (!kernel) { throw std::invalid_argument("assemble_gram: kernel is null"); }
    if (points.empty()) { return {}; }
    for (const auto &z : points) { kernel->validate(z); }
    const auto ps = detail::evaluate_structure(points, sf);
    Matrix g = detail::symmetric_gram(points, *kernel, ps);
    if (ps.euclidean) { return g; }
    const Eigen::Index d = sf.dim;
    for (std::size_t j = 0; j < points.size(); ++j) {
        const auto off = static_cast<Eigen::Index>(j) * d;
        g.middleCols(off, d) = g.middleCols(off, d) * ps.metric[j];
    }
    return g;
}

/// Symmetric version S^{1/2} G S^{-1/2} of the Gram matrix, S = blockdiag(g(z_j)).
/// Its spectrum is that of G; it is positive semidefinite when G is PSD with
/// respect to the product metric.
inline Matrix metric_symmetrized_gram(const PointSet &points, const KernelModel &kernel, const StructureField &sf) {
    if (points.empty()) { return {}; }
    for (const auto &z : points) { kernel->validate(z); }
    const auto ps = detail::evaluate_structure(points, sf);
    Matrix a = detail::symmetric_gram(points, *kernel, ps);
    if (ps.euclidean) { return a; }
    const Eigen::Index d = sf.dim;
    const auto n = static_cast<Eigen::Index>(points.size());
    Matrix root = Matrix::Zero(d * n, d * n);
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(ps.metric[static_cast<std::size_t>(j)]);
        root.block(j * d, j * d, d, d) = es.operatorSqrt();
    }
    Matrix out = root * a * root;
    return 0.5 * (out + out.transpose());
}

class Estimator;
Estimator fit(const TrainingSet &ts, const KernelModel &kernel, const StructureField &sf, double lambda);

/// Fitted structure-preserving kernel estimator. Immutable.
///
/// With c the solution of (G + lambda N I) c = X and w_i = B(z_i)^T g(z_i) c_i,
/// the learned Hamiltonian is h(z) = sum_i w_i . d1K(z_i, z).
class Estimator {
public:
    [[nodiscard]] const Vector &coefficients() const noexcept { return coeffs_; }
    [[nodiscard]] const PointSet &points() const noexcept { return points_; }
    [[nodiscard]] const KernelModel &kernel() const noexcept { return kernel_; }
    [[nodiscard]] const StructureField &structure() const noexcept { return structure_; }
    [[nodiscard]] double lambda() const noexcept { return lambda_; }
    [[nodiscard]] const ConditioningReport &conditioning() const noexcept { return report_; }
    [[nodiscard]] Eigen::Index dim() const noexcept { return structure_.dim; }
    [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }

    /// Coefficient block c_i of training point i.
    [[nodiscard]] Vector coefficient_block(std::size_t i) const {
        return coeffs_.segment(static_cast<Eigen::Index>(i) * dim(), dim());
    }

    [[nodiscard]] double evaluate_h(const PhasePoint &z) const {
        kernel_->validate(z);
        double h = 0.0;
        for (std::size_t i = 0; i < points_.size(); ++i) { h += weights_[i].dot(kernel_->grad1(points_[i], z)); }
        return h;
    }

    /// Coordinate differential of the learned Hamiltonian.
    [[nodiscard]] Vector differential(const PhasePoint &z) const {
        kernel_->validate(z);
        Vector dh = Vector::Zero(dim());
        for (std::size_t i = 0; i < points_.size(); ++i) {
            dh.noalias() += kernel_->hess12(points_[i], z).transpose() * weights_[i];
        }
        return dh;
    }

    /// Hamiltonian vector field J(z) g(z)^{-1} dh(z) of the learned Hamiltonian.
    [[nodiscard]] Vector evaluate_field(const PhasePoint &z) const {
        return structure_.poisson_matrix(z) * differential(z);
    }

    /// Squared RKHS norm g_N(c, G_N c) of the estimator.
    [[nodiscard]] double rkhs_norm_sq() const noexcept { return rkhs_norm_sq_; }

private:
    friend Estimator fit(const TrainingSet &, const KernelModel &, const StructureField &, double);

    Estimator(PointSet points, KernelModel kernel, StructureField structure, double lambda, Vector coeffs,
              std::vector<Vector> weights, double rkhs_norm_sq, ConditioningReport report)
        : points_(std::move(points)),
          kernel_(std::move(kernel)),
          structure_(std::move(structure)),
          lambda_(lambda),
          coeffs_(std::move(coeffs)),
          weights_(std::move(weights)),
          rkhs_norm_sq_(rkhs_norm_sq),
          report_(std::move(report)) {}

    PointSet points_;
    KernelModel kernel_;
    StructureField structure_;
    double lambda_;
    Vector coeffs_;
    std::vector<Vector> weights_;
    double rkhs_norm_sq_;
    ConditioningReport report_;
};

/// Closed-form fit c = (G_N + lambda N I)^{-1} X.
///
/// Writing G = A S with A symmetric PSD and S = blockdiag(g_j) SPD, the system is
/// solved as (A + lambda N S^{-1}) u = X, c = S^{-1} u, which is symmetric
/// positive definite for every metric. Cholesky is tried first, then LDL^T.
inline Estimator fit(const TrainingSet &ts, const KernelModel &kernel, const StructureField &sf, double lambda) {
    if (!kernel) { throw std::invalid_argument("fit: kernel is null"); }
    if (!(lambda >= kMinLambda) || !std::isfinite(lambda)) {
        throw std::invalid_argument("fit: lambda must be finite and at least " + std::to_string(kMinLambda));
    }
    if (kernel->dim() != sf.dim) { throw DimensionError("fit: kernel and structure dimensions differ"); }
    ts.validate(sf.dim);
    for (const auto &z : ts.points) { kernel->validate(z); }

    const auto n = static_cast<double>(ts.size());
    const double ridge = lambda * n;
    const auto ps = detail::evaluate_structure(ts.points, sf);
    const Matrix a = detail::symmetric_gram(ts.points, *kernel, ps);
    const Vector x = ts.stacked_fields();
    const Eigen::Index d = sf.dim;

    Matrix system = a;
    if (ps.euclidean) {
        system.diagonal().array() += ridge;
    } else {
        for (std::size_t j = 0; j < ts.size(); ++j) {
            const auto off = static_cast<Eigen::Index>(j) * d;
            system.block(off, off, d, d) += ridge * ps.metric[j].inverse();
        }
    }

    ConditioningReport report;
    report.min_diagonal = system.diagonal().minCoeff();
    report.max_diagonal = system.diagonal().maxCoeff();

    // c = S^{-1} u; residual of the original system is A u + ridge c - X.
    auto residual = [&](const Vector &u) {
        const Vector c = detail::solve_metric(ps, u);
        return Vector(a * u + ridge * c - x);
    };

    Vector u;
    auto refine = [&](const auto &solver) {
        u = solver.solve(x);
        for (int it = 0; it < 2; ++it) {
            const Vector r = residual(u);
            if (r.norm() <= 1e-14 * std::max(1.0, x.norm())) { break; }
            // (A + ridge S^{-1}) du = -r corrects the original residual exactly.
            u -= solver.solve(r);
        }
    };

    Eigen::LLT<Matrix> llt(system);
    if (llt.info() == Eigen::Success) {
        report.factorization = "llt";
        report.condition_estimate = 1.0 / llt.rcond();
        refine(llt);
    } else {
        Eigen::LDLT<Matrix> ldlt(system);
        if (ldlt.info() != Eigen::Success) {
            throw IllConditionedError("fit: factorization of the regularized Gram system failed",
                                      std::numeric_limits<double>::infinity());
        }
        report.factorization = "ldlt";
        report.condition_estimate = 1.0 / ldlt.rcond();
        refine(ldlt);
    }
    if (!u.allFinite()) {
        throw IllConditionedError("fit: non-finite solution of the regularized Gram system", report.condition_estimate);
    }

    Vector c = detail::solve_metric(ps, u);
    const double xnorm = x.norm();
    const Vector r = residual(u);
    report.relative_residual = xnorm > 0.0 ? r.norm() / xnorm : r.norm();

    std::vector<Vector> weights;
    weights.reserve(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        weights.emplace_back(ps.poisson[i].transpose() * u.segment(static_cast<Eigen::Index>(i) * d, d));
    }
    const double norm_sq = u.dot(a * u);

    return Estimator(ts.points, kernel, sf, lambda, std::move(c), std::move(weights), norm_sq, std::move(report));
}

}  // namespace hamkrr
