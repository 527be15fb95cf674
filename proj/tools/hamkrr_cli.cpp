// hamkrr: command-line driver for fitting and evaluating Hamiltonian kernel estimators.

#include "hamkrr/hamkrr.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace hamkrr;

namespace {

struct CommonOptions {
    std::string config;
    std::string preset;
    std::optional<std::uint64_t> seed;
    std::string out = "out";
};

void add_common(CLI::App *cmd, CommonOptions &o) {
    cmd->add_option("--config", o.config, "experiment config (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--preset", o.preset, "built-in config instead of --config")
        ->check(CLI::IsMember({"rigid_body", "underwater_vehicle", "gaussian_section", "two_vortex", "spherical_norm3"}));
    cmd->add_option("--seed", o.seed, "override the config seed");
    cmd->add_option("--out", o.out, "output directory")->capture_default_str();
}

ExperimentConfig resolve(const CommonOptions &o) {
    if (o.config.empty() == o.preset.empty()) { throw CLI::ValidationError("exactly one of --config or --preset is required"); }
    ExperimentConfig cfg = o.config.empty() ? preset_config(o.preset) : load_config(o.config);
    if (o.seed) { cfg.seed = *o.seed; }
    return cfg;
}

std::ofstream open_out(const CommonOptions &o, const std::string &name) {
    fs::create_directories(o.out);
    const fs::path p = fs::path(o.out) / name;
    std::ofstream os(p);
    if (!os) { throw std::runtime_error("cannot write '" + p.string() + "'"); }
    std::clog << "wrote " << p.string() << '\n';
    return os;
}

void write_json(const CommonOptions &o, const std::string &name, json j, const ExperimentConfig &cfg) {
    j["config_hash"] = config_hash(cfg);
    j["seed"] = cfg.seed;
    j["config"] = to_json(cfg);
    open_out(o, name) << j.dump(2) << '\n';
}

/// Reads `z0,z1,...` rows (header and `#` lines skipped).
PointSet read_points(const std::string &path, Eigen::Index dim) {
    std::ifstream in(path);
    if (!in) { throw std::runtime_error("cannot open points file '" + path + "'"); }
    PointSet out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0]))) { continue; }
        std::vector<double> v;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) { v.push_back(std::stod(cell)); }
        if (static_cast<Eigen::Index>(v.size()) < dim) { throw DimensionError("points file: row has too few columns"); }
        out.push_back(Eigen::Map<const Vector>(v.data(), dim));
    }
    return out;
}

void cmd_fit(const CommonOptions &o) {
    const auto cfg = resolve(o);
    const auto sys = make_system(cfg.system);
    const PointSet test = make_test_points(cfg, sys);
    const auto fo = run_fit(cfg, sys, cfg.kernel.eta_grid.front(), cfg.c_grid.front(), cfg.sample.count, cfg.seed, test);
    write_json(o, "fit.json", to_json(fo.report), cfg);
    auto os = open_out(o, "coefficients.csv");
    write_preamble(os, cfg);
    for (Eigen::Index i = 0; i < sys.dim; ++i) { os << 'z' << i << ','; }
    for (Eigen::Index i = 0; i < sys.dim; ++i) { os << 'c' << i << (i + 1 < sys.dim ? "," : "\n"); }
    os << std::setprecision(17);
    for (std::size_t n = 0; n < fo.estimator.size(); ++n) {
        const auto &z = fo.estimator.points()[n];
        const Vector c = fo.estimator.coefficient_block(n);
        for (Eigen::Index i = 0; i < z.size(); ++i) { os << z(i) << ','; }
        for (Eigen::Index i = 0; i < c.size(); ++i) { os << c(i) << (i + 1 < c.size() ? "," : "\n"); }
    }
    std::cout << "vf_rmse_relative=" << fo.report.vf_rmse_relative << " h_abs_err=" << fo.report.h_abs_err << '\n';
}

void cmd_grid_search(const CommonOptions &o) {
    const auto cfg = resolve(o);
    const auto sys = make_system(cfg.system);
    const TrainingSet ts = make_training_set(cfg, sys, cfg.sample.count, cfg.seed);
    const auto cv = cross_validate(sys, ts, make_kernel_factory(cfg.kernel, sys), cfg.kernel.eta_grid, cfg.c_grid,
                                   cfg.alpha, cfg.folds, Rng::derive(cfg.seed, "cv"));
    auto os = open_out(o, "grid_search.csv");
    write_cv_csv(os, cv, cfg);
    write_json(o, "grid_search.json", json{{"best_eta", cv.best_eta}, {"best_c", cv.best_c}, {"best_score", cv.best_score}},
               cfg);
    std::cout << "best eta=" << cv.best_eta << " c=" << cv.best_c << " score=" << cv.best_score << '\n';
}

void cmd_evaluate(const CommonOptions &o, const std::string &points_file) {
    const auto cfg = resolve(o);
    const auto sys = make_system(cfg.system);
    const PointSet test = points_file.empty() ? make_test_points(cfg, sys) : read_points(points_file, sys.dim);
    if (test.empty()) { throw std::invalid_argument("no evaluation points"); }
    const auto fo = run_fit(cfg, sys, cfg.kernel.eta_grid.front(), cfg.c_grid.front(), cfg.sample.count, cfg.seed, test);
    auto os = open_out(o, "predictions.csv");
    write_predictions_csv(os, fo.estimator, sys, test, cfg);
    json slices = json::array();
    for (const auto &s : slices_for(cfg, sys)) {
        const PointSet grid = slice_test_points(s, sys);
        if (grid.empty()) { continue; }
        json j{{"slice", to_json(s)}, {"h_abs_err", h_error(fo.estimator, sys, grid)}};
        if (!sys.casimirs.empty()) { j["casimir_corrected_err"] = casimir_correct(fo.estimator, sys, grid).max_abs_error; }
        slices.push_back(j);
    }
    json report = to_json(fo.report);
    report["slices"] = slices;
    write_json(o, "evaluate.json", report, cfg);
    std::cout << "vf_mse=" << fo.report.vf_mse << " on " << test.size() << " points\n";
}

void cmd_flow_compare(const CommonOptions &o) {
    const auto cfg = resolve(o);
    const auto sys = make_system(cfg.system);
    const auto fo = run_fit(cfg, sys);
    const PointSet initial = sample_points(cfg, sys, cfg.flow.initial_count, Rng::derive(cfg.seed, "flow"), true);
    const auto cmp = flow_compare(fo.estimator, sys, initial, cfg.flow.dt, cfg.flow.horizon);
    json rows = json::array();
    for (std::size_t k = 0; k < cmp.size(); ++k) {
        const auto &fc = cmp[k];
        std::vector<double> z0(fc.initial.data(), fc.initial.data() + fc.initial.size());
        rows.push_back({{"initial", z0},
                        {"flow_distance", fc.flow_distance},
                        {"truncated", fc.truth.truncated || fc.learned.truncated},
                        {"casimir_drift_true", fc.casimir_drift_truth},
                        {"casimir_drift_learned", fc.casimir_drift_learned},
                        {"energy_drift_true", conservation_drift(fc.truth, sys.hamiltonian)}});
        for (const auto *t : {&fc.truth, &fc.learned}) {
            auto os = open_out(o, "trajectory_" + std::to_string(k) + "_" + t->field_tag + ".csv");
            write_preamble(os, cfg);
            write_trajectory_csv(os, *t);
        }
    }
    write_json(o, "flow_compare.json", json{{"dt", cfg.flow.dt}, {"horizon", cfg.flow.horizon}, {"trajectories", rows}}, cfg);
}

void cmd_convergence(const CommonOptions &o) {
    const auto cfg = resolve(o);
    const auto sys = make_system(cfg.system);
    const auto table = convergence_study(cfg, sys, cfg.convergence_counts);
    auto os = open_out(o, "convergence.csv");
    write_convergence_csv(os, table, cfg);
    std::cout << "log-log slope of vf_mse vs N: " << table.slope << '\n';
}

void cmd_export_heatmap(const CommonOptions &o) {
    const auto cfg = resolve(o);
    const auto sys = make_system(cfg.system);
    const auto fo = run_fit(cfg, sys);
    const auto est = std::make_shared<const Estimator>(fo.estimator);
    const auto slices = slices_for(cfg, sys);
    for (std::size_t k = 0; k < slices.size(); ++k) {
        const std::string tag = "slice" + std::to_string(k);
        auto learned = open_out(o, "heatmap_" + tag + "_learned.csv");
        export_heatmap(learned, [est](const PhasePoint &z) { return est->evaluate_h(z); }, slices[k], provenance(cfg));
        auto truth = open_out(o, "heatmap_" + tag + "_true.csv");
        export_heatmap(truth, [&sys](const PhasePoint &z) { return sys.energy(z); }, slices[k], provenance(cfg));
        const PointSet grid = slice_test_points(slices[k], sys);
        if (!sys.casimirs.empty() && !grid.empty()) {
            const auto corr = casimir_correct(*est, sys, grid);
            auto corrected = open_out(o, "heatmap_" + tag + "_corrected.csv");
            export_heatmap(corrected, corr.corrected, slices[k], provenance(cfg));
        }
    }
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Structure-preserving kernel regression for Hamiltonian systems"};
    app.require_subcommand(1);
    CommonOptions opts;
    std::string points_file;

    auto *fit_cmd = app.add_subcommand("fit", "fit one estimator and report errors");
    auto *grid_cmd = app.add_subcommand("grid-search", "k-fold cross-validation over (eta, c)");
    auto *eval_cmd = app.add_subcommand("evaluate", "fit and write per-point predictions");
    auto *flow_cmd = app.add_subcommand("flow-compare", "integrate true and learned flows");
    auto *conv_cmd = app.add_subcommand("convergence", "error against sample size");
    auto *heat_cmd = app.add_subcommand("export-heatmap", "learned and true energy on chart slices");
    for (auto *cmd : {fit_cmd, grid_cmd, eval_cmd, flow_cmd, conv_cmd, heat_cmd}) { add_common(cmd, opts); }
    eval_cmd->add_option("--points", points_file, "CSV of evaluation points (default: the config's test set)")
        ->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);
    try {
        if (*fit_cmd) { cmd_fit(opts); }
        if (*grid_cmd) { cmd_grid_search(opts); }
        if (*eval_cmd) { cmd_evaluate(opts, points_file); }
        if (*flow_cmd) { cmd_flow_compare(opts); }
        if (*conv_cmd) { cmd_convergence(opts); }
        if (*heat_cmd) { cmd_export_heatmap(opts); }
    } catch (const CLI::Error &e) {
        return app.exit(e);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
