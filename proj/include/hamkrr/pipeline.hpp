#pragma once

#include "hamkrr/config.hpp"
#include "hamkrr/dynamics.hpp"
#include "hamkrr/estimator.hpp"
#include "hamkrr/experiments.hpp"
#include "hamkrr/kernels.hpp"
#include "hamkrr/sampling.hpp"
#include "hamkrr/systems.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace hamkrr {

inline SystemModel make_system(const SystemSpec &spec) {
    if (spec.kind == "rigid_body") { return rigid_body(spec.inertia); }
    if (spec.kind == "underwater_vehicle") {
        return underwater_vehicle(spec.inertia, spec.mass_matrix, spec.mass, spec.gravity, spec.r_g);
    }
    if (spec.kind == "gaussian_section") { return gaussian_section(spec.eta); }
    if (spec.kind == "two_vortex") { return two_vortex(spec.lambda1, spec.lambda2); }
    if (spec.kind == "spherical_norm3") { return spherical_norm3(); }
    if (spec.kind == "null") { return null_system(); }
    throw std::invalid_argument("unknown system kind '" + spec.kind + "'");
}

inline KernelFactory make_kernel_factory(const KernelSpec &spec, const SystemModel &system) {
    if (spec.family == "gaussian") {
        return [dim = system.dim](double eta) { return gaussian_kernel(eta, dim); };
    }
    if (spec.family == "restricted_gaussian") {
        if (!system.chart) { throw std::invalid_argument("restricted_gaussian kernel needs a system with a chart"); }
        return [chart = *system.chart](double eta) { return chart_restricted_kernel(gaussian_kernel(eta, chart.ambient_dim), chart); };
    }
    if (spec.family == "invariant_gaussian") {
        if (system.dim != 3) { throw std::invalid_argument("invariant_gaussian kernel is defined on R^3"); }
        return [](double eta) { return axial_invariant_gaussian_kernel(eta); };
    }
    throw std::invalid_argument("unknown kernel family '" + spec.family + "'");
}

/// The slice drawn in the reference figures for each system.
inline SliceSpec default_slice(const SystemModel &system, std::size_t resolution = 50) {
    SliceSpec s;
    s.resolution = {resolution, resolution};
    if (system.chart) {
        s.base = Vector::Zero(system.dim);
        s.base(2) = sphere::kPi / 2.0;
        s.base(3) = 0.0;
        s.ranges = {{{0.0, sphere::kPi}, {0.0, 2.0 * sphere::kPi}}};
    } else {
        s.base = Vector::Zero(system.dim);
    }
    return s;
}

inline std::vector<SliceSpec> slices_for(const ExperimentConfig &cfg, const SystemModel &system) {
    if (!cfg.test.slices.empty()) { return cfg.test.slices; }
    return {default_slice(system)};
}

/// States admissible as test or grid points: valid for the system and, for
/// the two-vortex system, outside the band 1 - x1.x2 < 1e-3.
inline bool test_admissible(const SystemModel &system, const PhasePoint &z) {
    if (!system.admissible(z)) { return false; }
    if (system.name == "two_vortex" && vortex::separation(z) < vortex::kTestBand) { return false; }
    return true;
}

inline PointSet sample_points(const ExperimentConfig &cfg, const SystemModel &system, std::size_t count,
                              std::uint64_t seed, bool test_region = false) {
    SampleSpec spec;
    spec.count = count;
    spec.seed = seed;
    std::function<bool(const PhasePoint &)> accept = [&system, test_region](const PhasePoint &z) {
        return test_region ? test_admissible(system, z) : system.admissible(z);
    };
    if (cfg.sample.kind == "cube") {
        CubeDomain cube;
        cube.lower = Eigen::Map<const Vector>(cfg.sample.lower.data(), static_cast<Eigen::Index>(cfg.sample.lower.size()));
        cube.upper = Eigen::Map<const Vector>(cfg.sample.upper.data(), static_cast<Eigen::Index>(cfg.sample.upper.size()));
        if (cube.lower.size() != system.dim) { throw DimensionError("config: cube dimension does not match the system"); }
        spec.domain = cube;
        PointSet pts = sample_cube(spec);
        for (const auto &z : pts) {
            if (!accept(z)) { throw DomainError("sampled state is not admissible for system '" + system.name + "'"); }
        }
        return pts;
    }
    SphereProductDomain sp;
    sp.factors = cfg.sample.factors;
    sp.margin = cfg.sample.margin;
    if (2 * sp.factors != system.dim) { throw DimensionError("config: sphere factors do not match the system"); }
    spec.domain = sp;
    return sample_sphere_product(spec, accept);
}

inline TrainingSet make_training_set(const ExperimentConfig &cfg, const SystemModel &system, std::size_t count,
                                     std::uint64_t seed) {
    TrainingSet ts;
    ts.seed = seed;
    ts.sigma = cfg.sigma;
    ts.points = sample_points(cfg, system, count, seed);
    ts.fields.reserve(ts.points.size());
    for (const auto &z : ts.points) { ts.fields.push_back(system.field(z)); }
    ts.fields = add_tangent_noise(std::move(ts.fields), cfg.sigma, seed);
    return ts;
}

inline PointSet make_test_points(const ExperimentConfig &cfg, const SystemModel &system) {
    return sample_points(cfg, system, cfg.test.count, Rng::derive(cfg.seed, "test"), true);
}

/// Admissible cells of a slice.
inline PointSet slice_test_points(const SliceSpec &slice, const SystemModel &system) {
    PointSet out;
    for (auto &z : slice.points()) {
        if (test_admissible(system, z)) { out.push_back(std::move(z)); }
    }
    return out;
}

struct ErrorReport {
    std::string system;
    std::size_t n = 0;
    double eta = 0.0;
    double c = 0.0;
    double lambda = 0.0;
    double vf_mse = 0.0;
    double field_rms = 0.0;
    double vf_rmse_relative = 0.0;  // sqrt(vf_mse) / field_rms
    double h_abs_err = 0.0;         // on the first slice, after constant shift
    std::optional<CasimirCorrection> casimir;
    ConditioningReport conditioning;
    std::uint64_t seed = 0;
    double runtime_seconds = 0.0;
};

inline json to_json(const ErrorReport &r) {
    json j{{"system", r.system},
           {"n", r.n},
           {"eta", r.eta},
           {"c", r.c},
           {"lambda", r.lambda},
           {"vf_mse", r.vf_mse},
           {"field_rms", r.field_rms},
           {"vf_rmse_relative", r.vf_rmse_relative},
           {"h_abs_err", r.h_abs_err},
           {"conditioning",
            {{"factorization", r.conditioning.factorization},
             {"condition_estimate", r.conditioning.condition_estimate},
             {"min_diagonal", r.conditioning.min_diagonal},
             {"max_diagonal", r.conditioning.max_diagonal},
             {"relative_residual", r.conditioning.relative_residual}}},
           {"seed", r.seed},
           {"runtime_seconds", r.runtime_seconds}};
    if (r.casimir) {
        std::vector<double> a(r.casimir->coefficients.data(), r.casimir->coefficients.data() + r.casimir->coefficients.size());
        j["casimir_correction"] = {{"coefficients", a},
                                   {"shift", r.casimir->shift},
                                   {"max_abs_error", r.casimir->max_abs_error},
                                   {"rank_deficient", r.casimir->rank_deficient}};
    }
    return j;
}

struct FitOutcome {
    TrainingSet training;
    Estimator estimator;
    ErrorReport report;
};

/// Sample, fit with lambda = c N^(-alpha), and score on a fresh test set and the first slice.
inline FitOutcome run_fit(const ExperimentConfig &cfg, const SystemModel &system, double eta, double c,
                          std::size_t count, std::uint64_t seed, const PointSet &test_points) {
    const auto start = std::chrono::steady_clock::now();
    TrainingSet ts = make_training_set(cfg, system, count, seed);
    const KernelModel kernel = make_kernel_factory(cfg.kernel, system)(eta);
    const double lambda = lambda_schedule(c, count, cfg.alpha);
    Estimator est = fit(ts, kernel, system.structure, lambda);

    ErrorReport r;
    r.system = system.name;
    r.n = count;
    r.eta = eta;
    r.c = c;
    r.lambda = lambda;
    r.seed = seed;
    r.conditioning = est.conditioning();
    r.vf_mse = vf_mse(est, system, test_points);
    r.field_rms = field_rms(system, test_points);
    r.vf_rmse_relative = r.field_rms > 0.0 ? std::sqrt(r.vf_mse) / r.field_rms : std::sqrt(r.vf_mse);
    const PointSet grid = slice_test_points(slices_for(cfg, system).front(), system);
    if (!grid.empty()) {
        r.h_abs_err = h_error(est, system, grid);
        if (!system.casimirs.empty()) { r.casimir = casimir_correct(est, system, grid); }
    }
    r.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {std::move(ts), std::move(est), std::move(r)};
}

inline FitOutcome run_fit(const ExperimentConfig &cfg, const SystemModel &system) {
    return run_fit(cfg, system, cfg.kernel.eta_grid.front(), cfg.c_grid.front(), cfg.sample.count, cfg.seed,
                   make_test_points(cfg, system));
}

struct ConvergenceRow {
    std::size_t n = 0;
    double lambda = 0.0;
    double vf_mse = 0.0;
    double h_error = 0.0;
    std::uint64_t seed = 0;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    double slope = 0.0;  // of log vf_mse against log N; nan when undefined
};

/// Full pipeline per N on fresh seeded samples with a fixed test set.
inline ConvergenceTable convergence_study(const ExperimentConfig &cfg, const SystemModel &system,
                                          const std::vector<std::size_t> &counts) {
    if (counts.empty()) { throw std::invalid_argument("convergence_study: no sample sizes"); }
    for (std::size_t i = 1; i < counts.size(); ++i) {
        if (counts[i] <= counts[i - 1]) { throw std::invalid_argument("convergence_study: sample sizes must increase"); }
    }
    const PointSet test = make_test_points(cfg, system);
    ConvergenceTable table;
    std::vector<double> xs, ys;
    for (std::size_t n : counts) {
        const std::uint64_t seed = Rng::derive(cfg.seed, "convergence", n);
        const auto outcome = run_fit(cfg, system, cfg.kernel.eta_grid.front(), cfg.c_grid.front(), n, seed, test);
        table.rows.push_back({n, outcome.report.lambda, outcome.report.vf_mse, outcome.report.h_abs_err, seed});
        xs.push_back(static_cast<double>(n));
        ys.push_back(outcome.report.vf_mse);
    }
    const bool positive = std::all_of(ys.begin(), ys.end(), [](double y) { return y > 0.0; });
    table.slope = (positive && xs.size() >= 2) ? loglog_slope(xs, ys) : std::numeric_limits<double>::quiet_NaN();
    return table;
}

struct FlowComparison {
    PhasePoint initial;
    Trajectory truth;
    Trajectory learned;
    double flow_distance = 0.0;
    std::vector<double> casimir_drift_truth;
    std::vector<double> casimir_drift_learned;
};

inline Distance distance_for(const SystemModel &system) {
    if (system.chart) { return sphere_product_distance; }
    return euclidean_distance;
}

/// Integrates the true and learned fields from the same initial states.
inline std::vector<FlowComparison> flow_compare(const Estimator &est, const SystemModel &system,
                                                const PointSet &initial, double dt, double horizon) {
    std::vector<FlowComparison> out;
    const auto admissible = [&system](const PhasePoint &z) { return system.admissible(z); };
    for (const auto &z0 : initial) {
        FlowComparison fc;
        fc.initial = z0;
        fc.truth = integrate([&system](const PhasePoint &z) { return system.field(z); }, z0, dt, horizon, "true",
                             system.chart ? admissible : std::function<bool(const PhasePoint &)>{});
        fc.learned = integrate([&est](const PhasePoint &z) { return est.evaluate_field(z); }, z0, dt, horizon,
                               "learned", system.chart ? admissible : std::function<bool(const PhasePoint &)>{});
        if (fc.truth.size() == fc.learned.size()) {
            fc.flow_distance = flow_distance(fc.truth, fc.learned, distance_for(system));
        } else {
            fc.flow_distance = std::numeric_limits<double>::quiet_NaN();
        }
        for (const auto &cas : system.casimirs) {
            fc.casimir_drift_truth.push_back(conservation_drift(fc.truth, cas.value));
            fc.casimir_drift_learned.push_back(conservation_drift(fc.learned, cas.value));
        }
        out.push_back(std::move(fc));
    }
    return out;
}

inline std::vector<std::string> provenance(const ExperimentConfig &cfg) {
    return {"config_hash=" + config_hash(cfg), "seed=" + std::to_string(cfg.seed)};
}

inline void write_preamble(std::ostream &os, const ExperimentConfig &cfg) {
    for (const auto &line : provenance(cfg)) { os << "# " << line << '\n'; }
}

inline void write_cv_csv(std::ostream &os, const CvResult &cv, const ExperimentConfig &cfg) {
    write_preamble(os, cfg);
    os << "eta,c,lambda,score";
    const std::size_t folds = cv.table.empty() ? 0 : cv.table.front().fold_scores.size();
    for (std::size_t f = 0; f < folds; ++f) { os << ",fold" << f; }
    os << '\n' << std::setprecision(17);
    for (const auto &cell : cv.table) {
        os << cell.eta << ',' << cell.c << ',' << cell.lambda << ',' << cell.score;
        for (double s : cell.fold_scores) { os << ',' << s; }
        os << '\n';
    }
}

inline void write_convergence_csv(std::ostream &os, const ConvergenceTable &t, const ExperimentConfig &cfg) {
    write_preamble(os, cfg);
    os << "# slope=" << std::setprecision(17) << t.slope << '\n';
    os << "n,lambda,vf_mse,h_error,seed\n";
    for (const auto &r : t.rows) { os << r.n << ',' << r.lambda << ',' << r.vf_mse << ',' << r.h_error << ',' << r.seed << '\n'; }
}

/// Per test point: coordinates, true and learned H, and squared field error.
inline void write_predictions_csv(std::ostream &os, const Estimator &est, const SystemModel &system,
                                  const PointSet &points, const ExperimentConfig &cfg) {
    write_preamble(os, cfg);
    for (Eigen::Index i = 0; i < system.dim; ++i) { os << 'z' << i << ','; }
    os << "h_true,h_learned,vf_sq_error\n" << std::setprecision(17);
    for (const auto &z : points) {
        for (Eigen::Index i = 0; i < z.size(); ++i) { os << z(i) << ','; }
        const Vector err = est.evaluate_field(z) - system.field(z);
        os << system.energy(z) << ',' << est.evaluate_h(z) << ',' << metric_norm_sq(system.structure, z, err) << '\n';
    }
}

/// Reference configuration for each benchmark system.
inline ExperimentConfig preset_config(const std::string &kind) {
    ExperimentConfig c;
    c.system.kind = kind;
    c.alpha = 0.4;
    c.folds = 5;
    c.seed = 20240601;
    auto cube = [&c](std::size_t d) {
        c.sample.kind = "cube";
        c.sample.lower.assign(d, -1.0);
        c.sample.upper.assign(d, 1.0);
    };
    if (kind == "rigid_body") {
        cube(3);
        c.sample.count = 500;
        c.kernel = {"gaussian", {2.5}};
        c.c_grid = {2.5e-5};
    } else if (kind == "underwater_vehicle") {
        cube(9);
        c.sample.count = 400;
        c.kernel = {"gaussian", {5.0}};
        c.c_grid = {7.5e-6};
    } else if (kind == "gaussian_section") {
        cube(3);
        c.system.eta = 2.0;
        c.sample.count = 500;
        c.kernel = {"gaussian", {2.0}};
        c.c_grid = {7.5e-6};
    } else if (kind == "spherical_norm3") {
        c.sample.kind = "sphere_product";
        c.sample.factors = 2;
        c.sample.count = 1200;
        c.kernel = {"restricted_gaussian", {0.9}};
        c.c_grid = {1e-4};
    } else if (kind == "two_vortex") {
        c.sample.kind = "sphere_product";
        c.sample.factors = 2;
        c.sample.count = 1200;
        c.kernel = {"restricted_gaussian", {0.7}};
        c.c_grid = {0.01};
    } else {
        throw std::invalid_argument("no preset for system kind '" + kind + "'");
    }
    c.validate();
    return c;
}

}  // namespace hamkrr
