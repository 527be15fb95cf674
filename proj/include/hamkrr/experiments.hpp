#pragma once

#include "hamkrr/dynamics.hpp"
#include "hamkrr/estimator.hpp"
#include "hamkrr/sampling.hpp"
#include "hamkrr/systems.hpp"
#include "hamkrr/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace hamkrr {

/// Regularization schedule lambda = c * N^(-alpha).
inline double lambda_schedule(double c, std::size_t n, double alpha) {
    if (!(c > 0.0) || !(alpha > 0.0)) { throw std::invalid_argument("lambda_schedule: c and alpha must be positive"); }
    if (n == 0) { throw std::invalid_argument("lambda_schedule: N must be at least 1"); }
    return c * std::pow(static_cast<double>(n), -alpha);
}

/// Squared norm of v in the metric at z.
inline double metric_norm_sq(const StructureField &sf, const PhasePoint &z, const Vector &v) {
    if (sf.is_euclidean()) { return v.squaredNorm(); }
    return v.dot(sf.metric_matrix(z) * v);
}

/// Mean over points of |X_hat(z) - X_H(z)|^2 in the system metric.
inline double vf_mse(const VectorField &learned, const SystemModel &system, const PointSet &points) {
    if (points.empty()) { throw std::invalid_argument("vf_mse: no test points"); }
    double sum = 0.0;
    for (const auto &z : points) { sum += metric_norm_sq(system.structure, z, learned(z) - system.field(z)); }
    return sum / static_cast<double>(points.size());
}

inline double vf_mse(const Estimator &est, const SystemModel &system, const PointSet &points) {
    return vf_mse([&est](const PhasePoint &z) { return est.evaluate_field(z); }, system, points);
}

/// Root mean square of |X_H| in the system metric.
inline double field_rms(const SystemModel &system, const PointSet &points) {
    if (points.empty()) { throw std::invalid_argument("field_rms: no test points"); }
    double sum = 0.0;
    for (const auto &z : points) { sum += metric_norm_sq(system.structure, z, system.field(z)); }
    return std::sqrt(sum / static_cast<double>(points.size()));
}

/// max_z |h(z) + s - H(z)| where s = mean(H - h) over the grid.
inline double h_error(const ScalarFunction &learned, const SystemModel &system, const PointSet &grid) {
    if (grid.empty()) { throw std::invalid_argument("h_error: empty grid"); }
    std::vector<double> diff;
    diff.reserve(grid.size());
    for (const auto &z : grid) { diff.push_back(system.energy(z) - learned(z)); }
    const double shift = std::accumulate(diff.begin(), diff.end(), 0.0) / static_cast<double>(diff.size());
    double worst = 0.0;
    for (double v : diff) { worst = std::max(worst, std::abs(v - shift)); }
    return worst;
}

inline double h_error(const Estimator &est, const SystemModel &system, const PointSet &grid) {
    return h_error([&est](const PhasePoint &z) { return est.evaluate_h(z); }, system, grid);
}

struct CasimirCorrection {
    /// Coefficients a_i of the system Casimirs, in the order of system.casimirs.
    Vector coefficients;
    double shift = 0.0;
    /// max |h + sum a_i C_i + s - H| over the fitting grid.
    double max_abs_error = 0.0;
    bool rank_deficient = false;
    ScalarFunction corrected;
};

/// Least-squares fit of H - h ~ s + sum_i a_i C_i over the grid.
inline CasimirCorrection casimir_correct(const ScalarFunction &learned, const SystemModel &system, const PointSet &grid) {
    if (grid.empty()) { throw std::invalid_argument("casimir_correct: empty grid"); }
    const auto k = static_cast<Eigen::Index>(system.casimirs.size());
    const auto m = static_cast<Eigen::Index>(grid.size());
    Matrix design(m, k + 1);
    Vector target(m);
    for (Eigen::Index r = 0; r < m; ++r) {
        const auto &z = grid[static_cast<std::size_t>(r)];
        design(r, 0) = 1.0;
        for (Eigen::Index i = 0; i < k; ++i) { design(r, i + 1) = system.casimirs[static_cast<std::size_t>(i)].value(z); }
        target(r) = system.energy(z) - learned(z);
    }
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(design);
    const Vector beta = cod.solve(target);

    CasimirCorrection out;
    out.rank_deficient = cod.rank() < k + 1;
    out.shift = beta(0);
    out.coefficients = beta.tail(k);
    out.max_abs_error = (design * beta - target).cwiseAbs().maxCoeff();
    out.corrected = [learned, casimirs = system.casimirs, a = out.coefficients, s = out.shift](const PhasePoint &z) {
        double v = learned(z) + s;
        for (std::size_t i = 0; i < casimirs.size(); ++i) { v += a(static_cast<Eigen::Index>(i)) * casimirs[i].value(z); }
        return v;
    };
    return out;
}

inline CasimirCorrection casimir_correct(const Estimator &est, const SystemModel &system, const PointSet &grid) {
    auto est_ptr = std::make_shared<const Estimator>(est);
    return casimir_correct([est_ptr](const PhasePoint &z) { return est_ptr->evaluate_h(z); }, system, grid);
}

/// Seeded partition of {0..n-1} into `folds` disjoint, covering parts whose
/// sizes differ by at most one.
inline std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, std::size_t folds, std::uint64_t seed) {
    if (folds < 2) { throw std::invalid_argument("kfold_partition: need at least two folds"); }
    if (n < folds) { throw std::invalid_argument("kfold_partition: fewer samples than folds"); }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(seed, "cv/permutation");
    for (std::size_t i = n - 1; i > 0; --i) { std::swap(perm[i], perm[rng.index(i + 1)]); }
    std::vector<std::vector<std::size_t>> parts(folds);
    std::size_t pos = 0;
    for (std::size_t f = 0; f < folds; ++f) {
        const std::size_t len = n / folds + (f < n % folds ? 1 : 0);
        parts[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos), perm.begin() + static_cast<std::ptrdiff_t>(pos + len));
        std::sort(parts[f].begin(), parts[f].end());
        pos += len;
    }
    return parts;
}

using KernelFactory = std::function<KernelModel(double eta)>;

struct CvCell {
    double eta = 0.0;
    double c = 0.0;
    double lambda = 0.0;  // at the training-fold size
    double score = 0.0;   // mean held-out vector-field MSE
    std::vector<double> fold_scores;
};

struct CvResult {
    double best_eta = 0.0;
    double best_c = 0.0;
    double best_score = 0.0;
    std::vector<CvCell> table;
};

/// Grid search over (eta, c) scored by k-fold held-out vector-field MSE, with
/// lambda = c * N_train^(-alpha). Ties go to the smaller eta, then the smaller c.
inline CvResult cross_validate(const SystemModel &system, const TrainingSet &ts, const KernelFactory &make_kernel,
                               const std::vector<double> &eta_grid, const std::vector<double> &c_grid, double alpha,
                               std::size_t folds, std::uint64_t seed) {
    if (eta_grid.empty() || c_grid.empty()) { throw std::invalid_argument("cross_validate: empty grid"); }
    if (ts.size() < folds) { throw std::invalid_argument("cross_validate: fewer samples than folds"); }
    const auto parts = kfold_partition(ts.size(), folds, seed);

    CvResult result;
    for (double eta : eta_grid) {
        const KernelModel kernel = make_kernel(eta);
        for (double c : c_grid) {
            CvCell cell;
            cell.eta = eta;
            cell.c = c;
            double sum = 0.0;
            for (std::size_t f = 0; f < folds; ++f) {
                std::vector<std::size_t> train;
                for (std::size_t g = 0; g < folds; ++g) {
                    if (g != f) { train.insert(train.end(), parts[g].begin(), parts[g].end()); }
                }
                std::sort(train.begin(), train.end());
                const TrainingSet fold_train = ts.subset(train);
                const TrainingSet held_out = ts.subset(parts[f]);
                const double lambda = lambda_schedule(c, fold_train.size(), alpha);
                cell.lambda = lambda;
                const Estimator est = fit(fold_train, kernel, system.structure, lambda);
                double err = 0.0;
                for (std::size_t i = 0; i < held_out.size(); ++i) {
                    const auto &z = held_out.points[i];
                    err += metric_norm_sq(system.structure, z, est.evaluate_field(z) - held_out.fields[i]);
                }
                err /= static_cast<double>(held_out.size());
                cell.fold_scores.push_back(err);
                sum += err;
            }
            cell.score = sum / static_cast<double>(folds);
            result.table.push_back(std::move(cell));
        }
    }
    const auto best = std::min_element(result.table.begin(), result.table.end(), [](const CvCell &a, const CvCell &b) {
        if (a.score != b.score) { return a.score < b.score; }
        if (a.eta != b.eta) { return a.eta < b.eta; }
        return a.c < b.c;
    });
    result.best_eta = best->eta;
    result.best_c = best->c;
    result.best_score = best->score;
    return result;
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double> &x, const std::vector<double> &y) {
    if (x.size() != y.size() || x.size() < 2) { throw std::invalid_argument("loglog_slope: need two or more pairs"); }
    const auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Two free coordinates of a chart, the remaining ones held fixed.
struct SliceSpec {
    std::array<Eigen::Index, 2> axes{0, 1};
    PhasePoint base;                      // full point; the free axes are overwritten
    std::array<std::array<double, 2>, 2> ranges{{{-1.0, 1.0}, {-1.0, 1.0}}};
    std::array<std::size_t, 2> resolution{50, 50};

    void validate() const {
        if (resolution[0] < 2 || resolution[1] < 2) { throw std::invalid_argument("slice: resolution must be at least 2"); }
        for (auto a : axes) {
            if (a < 0 || a >= base.size()) { throw std::invalid_argument("slice: axis out of range"); }
        }
        if (axes[0] == axes[1]) { throw std::invalid_argument("slice: axes must differ"); }
        for (const auto &r : ranges) {
            if (!(r[0] < r[1])) { throw std::invalid_argument("slice: empty range"); }
        }
    }

    /// Cell-center coordinate k along free axis `which`.
    [[nodiscard]] double center(int which, std::size_t k) const {
        const auto &r = ranges[static_cast<std::size_t>(which)];
        return r[0] + (static_cast<double>(k) + 0.5) * (r[1] - r[0]) / static_cast<double>(resolution[static_cast<std::size_t>(which)]);
    }

    /// Cell centers in row-major order (the first axis varies fastest).
    [[nodiscard]] PointSet points() const {
        validate();
        PointSet out;
        out.reserve(resolution[0] * resolution[1]);
        for (std::size_t j = 0; j < resolution[1]; ++j) {
            for (std::size_t i = 0; i < resolution[0]; ++i) {
                PhasePoint z = base;
                z(axes[0]) = center(0, i);
                z(axes[1]) = center(1, j);
                out.push_back(std::move(z));
            }
        }
        return out;
    }
};

/// Writes `axis1,axis2,value` rows at cell centers, first axis fastest.
/// Cells where `f` throws a DomainError are written as nan. Lines in `preamble`
/// are emitted first as `# ` comments.
inline void export_heatmap(std::ostream &os, const ScalarFunction &f, const SliceSpec &slice,
                           const std::vector<std::string> &preamble = {}) {
    slice.validate();
    for (const auto &line : preamble) { os << "# " << line << '\n'; }
    os << "axis1,axis2,value\n" << std::setprecision(17);
    for (const auto &z : slice.points()) {
        double v;
        try {
            v = f(z);
        } catch (const DomainError &) {
            v = std::numeric_limits<double>::quiet_NaN();
        }
        os << z(slice.axes[0]) << ',' << z(slice.axes[1]) << ',' << v << '\n';
    }
}

}  // namespace hamkrr
