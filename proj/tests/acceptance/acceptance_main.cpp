// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include "support.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace hamkrr;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char *f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

int failures = 0;

void run(int id, const std::string &title, double time_limit, const std::function<Verdict()> &body) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
        v = body();
    } catch (const std::exception &e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (time_limit > 0.0 && secs > time_limit) {
        v.pass = false;
        v.detail += fmt("; runtime %.1fs exceeds %.0fs", secs, time_limit);
    }
    if (!v.pass) { ++failures; }
    std::printf("[%s] criterion %d: %s -- %s (%.2fs)\n", v.pass ? "PASS" : "FAIL", id, title.c_str(), v.detail.c_str(), secs);
    std::fflush(stdout);
}

double slice_range(const SystemModel &sys, const PointSet &grid) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto &z : grid) {
        lo = std::min(lo, sys.energy(z));
        hi = std::max(hi, sys.energy(z));
    }
    return hi - lo;
}

double slice_max_abs(const SystemModel &sys, const PointSet &grid) {
    double m = 0.0;
    for (const auto &z : grid) { m = std::max(m, std::abs(sys.energy(z))); }
    return m;
}

/// Criterion 3 pipeline; also renders its CSV outputs for the determinism check.
struct RigidRun {
    FitOutcome outcome;
    std::string csv;
};

RigidRun rigid_body_run() {
    const ExperimentConfig cfg = preset_config("rigid_body");
    const SystemModel sys = make_system(cfg.system);
    const PointSet test = make_test_points(cfg, sys);
    FitOutcome out = run_fit(cfg, sys, cfg.kernel.eta_grid.front(), cfg.c_grid.front(), cfg.sample.count, cfg.seed, test);
    std::ostringstream os;
    write_predictions_csv(os, out.estimator, sys, test, cfg);
    const auto est = std::make_shared<const Estimator>(out.estimator);
    export_heatmap(os, [est](const PhasePoint &z) { return est->evaluate_h(z); }, slices_for(cfg, sys).front(),
                   provenance(cfg));
    return {std::move(out), os.str()};
}

std::optional<FitOutcome> rigid_fit, vehicle_fit;

Verdict flow_verdict(const FitOutcome &fo, const ExperimentConfig &cfg, const SystemModel &sys) {
    const PointSet initial = sample_points(cfg, sys, 10, Rng::derive(cfg.seed, "flow"), true);
    const auto cmp = flow_compare(fo.estimator, sys, initial, 1e-3, 1.0);
    bool pass = true;
    std::string detail;
    for (std::size_t k = 0; k < sys.casimirs.size(); ++k) {
        double truth = 0.0, learned = 0.0;
        for (const auto &fc : cmp) {
            truth = std::max(truth, fc.casimir_drift_truth[k]);
            learned = std::max(learned, fc.casimir_drift_learned[k]);
        }
        const bool ok = learned <= 10.0 * truth && learned <= 1e-5;
        pass = pass && ok;
        detail += fmt("%s%s: learned %.2e vs true %.2e", detail.empty() ? "" : "; ", sys.casimirs[k].name.c_str(),
                      learned, truth);
    }
    return {pass, sys.name + " " + detail};
}

}  // namespace

int main() {
    run(1, "Gram matrices are positive semidefinite", 10.0, [] {
        double worst = 0.0;
        for (const std::string kind : {"rigid_body", "underwater_vehicle", "gaussian_section", "two_vortex", "spherical_norm3"}) {
            const auto cfg = preset_config(kind);
            const auto sys = make_system(cfg.system);
            const auto kernel = make_kernel_factory(cfg.kernel, sys)(cfg.kernel.eta_grid.front());
            for (int draw = 0; draw < 20; ++draw) {
                const PointSet pts = sample_points(cfg, sys, 30, Rng::derive(cfg.seed, "acceptance/psd", draw));
                const Matrix g = metric_symmetrized_gram(pts, kernel, sys.structure);
                const double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(g, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
                const double tr = g.trace();
                worst = std::min(worst, tr > 0.0 ? lmin / tr : lmin);
            }
        }
        return Verdict{worst >= -1e-8, fmt("worst min-eigenvalue / trace %.2e (limit -1e-8)", worst)};
    });

    run(2, "kernel derivatives match finite differences", 5.0, [] {
        const std::vector<std::pair<std::string, KernelModel>> kernels = {
            {"gaussian3", gaussian_kernel(2.5, 3)},
            {"gaussian9", gaussian_kernel(5.0, 9)},
            {"restricted", chart_restricted_kernel(gaussian_kernel(0.7, 6), sphere_product_chart(2))},
            {"invariant", axial_invariant_gaussian_kernel(1.0)}};
        double worst = 0.0;
        std::string worst_name;
        Rng rng(20240601, "acceptance/fd");
        for (const auto &[name, k] : kernels) {
            for (int n = 0; n < 200; ++n) {
                const bool sphere = name == "restricted";
                const PhasePoint x = sphere ? test::random_sphere_point(rng, 2) : test::random_point(rng, k->dim());
                const PhasePoint y = sphere ? test::random_sphere_point(rng, 2) : test::random_point(rng, k->dim());
                const double e1 = fd::relative_error(
                    k->grad1(x, y), fd::gradient([&](const PhasePoint &a) { return k->eval(a, y); }, x));
                const double e2 = fd::relative_error(
                    k->hess12(x, y), fd::jacobian([&](const PhasePoint &b) { return k->grad1(x, b); }, y));
                if (std::max(e1, e2) > worst) {
                    worst = std::max(e1, e2);
                    worst_name = name;
                }
            }
        }
        return Verdict{worst <= 1e-5, fmt("worst relative error %.2e (%s; limit 1e-5)", worst, worst_name.c_str())};
    });

    run(3, "rigid body recovery", 60.0, [] {
        const auto cfg = preset_config("rigid_body");
        const auto sys = make_system(cfg.system);
        rigid_fit = rigid_body_run().outcome;
        const auto &r = rigid_fit->report;
        const double range = slice_range(sys, slice_test_points(slices_for(cfg, sys).front(), sys));
        const double rel_h = r.casimir->max_abs_error / range;
        const bool pass = r.vf_rmse_relative <= 0.05 && rel_h <= 0.10;
        return Verdict{pass, fmt("field RMSE %.2f%% of RMS (limit 5%%); corrected H error %.2f%% of slice range (limit 10%%); a=%.3f",
                                 100.0 * r.vf_rmse_relative, 100.0 * rel_h, r.casimir->coefficients(0))};
    });

    run(4, "gaussian-section exact recovery", 60.0, [] {
        const auto cfg = preset_config("gaussian_section");
        const auto sys = make_system(cfg.system);
        const PointSet test = make_test_points(cfg, sys);
        const PointSet grid = slice_test_points(slices_for(cfg, sys).front(), sys);
        const double hmax = slice_max_abs(sys, grid);
        std::vector<double> errs;
        for (std::size_t n : {100, 250, 500}) {
            const auto fo = run_fit(cfg, sys, 2.0, 7.5e-6, n, Rng::derive(cfg.seed, "convergence", n), test);
            errs.push_back(fo.report.h_abs_err);
        }
        const double rel = errs.back() / hmax;
        const bool monotone = errs[1] <= 1.5 * errs[0] && errs[2] <= 1.5 * errs[1];
        return Verdict{rel <= 0.05 && monotone,
                       fmt("max error %.2f%% of max|H| at N=500 (limit 5%%); errors %.2e, %.2e, %.2e at N=100, 250, 500",
                           100.0 * rel, errs[0], errs[1], errs[2])};
    });

    run(5, "underwater vehicle recovery and Casimirs", 120.0, [] {
        const auto cfg = preset_config("underwater_vehicle");
        const auto sys = make_system(cfg.system);
        vehicle_fit = run_fit(cfg, sys);
        const double rel = vehicle_fit->report.vf_rmse_relative;
        const auto listed = underwater_vehicle_listed_invariants();
        Rng rng(cfg.seed, "acceptance/vehicle-casimir");
        std::vector<double> worst(listed.size(), 0.0);
        for (int n = 0; n < 200; ++n) {
            const PhasePoint z = test::random_point(rng, 9);
            for (std::size_t k = 0; k < listed.size(); ++k) {
                worst[k] = std::max(worst[k], (sys.structure.poisson_matrix(z) * listed[k].gradient(z)).norm());
            }
        }
        bool annihilated = true;
        std::string detail = fmt("field RMSE %.2f%% of RMS (limit 10%%); annihilation residuals", 100.0 * rel);
        for (std::size_t k = 0; k < listed.size(); ++k) {
            annihilated = annihilated && worst[k] <= 1e-10;
            detail += fmt(" %s=%.1e", listed[k].name.c_str(), worst[k]);
        }
        return Verdict{rel <= 0.10 && annihilated, detail + " (limit 1e-10)"};
    });

    run(6, "two-vortex recovery", 300.0, [] {
        const auto cfg = preset_config("two_vortex");
        const auto sys = make_system(cfg.system);
        const auto fo = run_fit(cfg, sys);
        const PointSet test = make_test_points(cfg, sys);
        double oracle = 0.0;
        for (const auto &z : test) {
            const Vector o = test::vortex_chart_oracle(z, cfg.system.lambda1, cfg.system.lambda2);
            oracle = std::max(oracle, (sys.field(z) - o).norm() / (1.0 + o.norm()));
        }
        const double rel = fo.report.vf_rmse_relative;
        return Verdict{rel <= 0.15 && oracle <= 1e-8,
                       fmt("field RMSE %.2f%% of RMS (limit 15%%); oracle self-check %.1e (limit 1e-8)", 100.0 * rel, oracle)};
    });

    run(7, "learned flows conserve Casimirs", 0.0, [] {
        if (!rigid_fit || !vehicle_fit) { return Verdict{false, "prerequisite fits unavailable"}; }
        const auto rcfg = preset_config("rigid_body");
        const auto vcfg = preset_config("underwater_vehicle");
        const Verdict a = flow_verdict(*rigid_fit, rcfg, make_system(rcfg.system));
        const Verdict b = flow_verdict(*vehicle_fit, vcfg, make_system(vcfg.system));
        return Verdict{a.pass && b.pass, a.detail + " | " + b.detail + " (limits 10x true, 1e-5)"};
    });

    run(8, "invariant kernel yields an invariant estimator", 0.0, [] {
        auto cfg = preset_config("rigid_body");
        cfg.system.inertia = {1.0, 1.0, 3.0};
        cfg.kernel.family = "invariant_gaussian";
        cfg.kernel.eta_grid = {1.0};
        cfg.sample.count = 200;
        const auto sys = make_system(cfg.system);
        const auto fo = run_fit(cfg, sys);
        Rng rng(cfg.seed, "acceptance/noether");
        double worst = 0.0;
        for (int n = 0; n < 100; ++n) {
            const PhasePoint p = test::random_point(rng, 3);
            const double t = rng.uniform(0.0, 2.0 * sphere::kPi);
            const Eigen::Matrix3d rot = Eigen::AngleAxisd(t, Eigen::Vector3d::UnitZ()).toRotationMatrix();
            worst = std::max(worst, std::abs(fo.estimator.evaluate_h(rot * p) - fo.estimator.evaluate_h(p)));
        }
        return Verdict{worst <= 1e-10, fmt("max |h(R p) - h(p)| = %.2e (limit 1e-10)", worst)};
    });

    run(9, "convergence slope is negative", 0.0, [] {
        auto cfg = preset_config("gaussian_section");
        const auto sys = make_system(cfg.system);
        const std::vector<std::size_t> counts{100, 200, 400, 800};
        const auto clean = convergence_study(cfg, sys, counts);
        cfg.sigma = 0.1;
        const auto noisy = convergence_study(cfg, sys, counts);
        return Verdict{clean.slope < 0.0 && noisy.slope < 0.0,
                       fmt("slope %.2f noiseless, %.2f with sigma=0.1", clean.slope, noisy.slope)};
    });

    run(10, "identical seeds give byte-identical outputs", 0.0, [] {
        const std::string a = rigid_body_run().csv;
        const std::string b = rigid_body_run().csv;
        return Verdict{!a.empty() && a == b, fmt("%zu bytes compared", a.size())};
    });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
