#pragma once

#include "hamkrr/experiments.hpp"
#include "hamkrr/types.hpp"

#include "json.hpp"

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace hamkrr {

using json = nlohmann::json;

struct SystemSpec {
    std::string kind = "rigid_body";  // rigid_body | underwater_vehicle | gaussian_section | two_vortex | spherical_norm3 | null
    Eigen::Vector3d inertia{1.0, 10.0, 0.1};
    Eigen::Vector3d mass_matrix{3.0, 2.0, 1.0};
    double mass = 1.0;
    double gravity = 9.8;
    Eigen::Vector3d r_g{1.0, 1.0, 1.0};
    double eta = 2.0;  // gaussian_section only
    double lambda1 = 1.0;
    double lambda2 = 1.0;
};

struct SampleConfig {
    std::string kind = "cube";  // cube | sphere_product
    std::vector<double> lower;
    std::vector<double> upper;
    int factors = 2;
    double margin = 1e-3;
    std::size_t count = 500;
};

struct KernelSpec {
    std::string family = "gaussian";  // gaussian | restricted_gaussian | invariant_gaussian
    std::vector<double> eta_grid{2.5};
};

struct TestSpec {
    std::size_t count = 1000;
    std::vector<SliceSpec> slices;  // empty: the system's default slice
};

struct FlowSpec {
    double dt = 1e-3;
    double horizon = 1.0;
    std::size_t initial_count = 10;
};

struct ExperimentConfig {
    SystemSpec system;
    SampleConfig sample;
    KernelSpec kernel;
    std::vector<double> c_grid{2.5e-5};
    double alpha = 0.4;
    std::size_t folds = 5;
    double sigma = 0.0;
    TestSpec test;
    FlowSpec flow;
    std::vector<std::size_t> convergence_counts{100, 200, 400, 800};
    std::uint64_t seed = 0;

    void validate() const {
        if (kernel.eta_grid.empty() || c_grid.empty()) { throw std::invalid_argument("config: eta_grid and c_grid must be nonempty"); }
        for (double e : kernel.eta_grid) {
            if (!(e > 0.0)) { throw std::invalid_argument("config: eta values must be positive"); }
        }
        for (double c : c_grid) {
            if (!(c > 0.0)) { throw std::invalid_argument("config: c values must be positive"); }
        }
        if (!(alpha > 0.0)) { throw std::invalid_argument("config: alpha must be positive"); }
        if (folds < 2) { throw std::invalid_argument("config: folds must be at least 2"); }
        if (!(sigma >= 0.0)) { throw std::invalid_argument("config: sigma must be nonnegative"); }
        if (sample.count == 0) { throw std::invalid_argument("config: sample count must be positive"); }
        if (sample.kind == "cube") {
            if (sample.lower.size() != sample.upper.size() || sample.lower.empty()) {
                throw std::invalid_argument("config: cube bounds must be nonempty and of equal length");
            }
            for (std::size_t i = 0; i < sample.lower.size(); ++i) {
                if (sample.lower[i] > sample.upper[i]) { throw std::invalid_argument("config: cube lower bound exceeds upper bound"); }
            }
        } else if (sample.kind != "sphere_product") {
            throw std::invalid_argument("config: unknown sample kind '" + sample.kind + "'");
        }
        for (const auto &s : test.slices) { s.validate(); }
    }
};

namespace detail {

inline json vec3_to_json(const Eigen::Vector3d &v) { return json::array({v(0), v(1), v(2)}); }

inline Eigen::Vector3d vec3_from_json(const json &j) {
    if (!j.is_array() || j.size() != 3) { throw std::invalid_argument("config: expected a 3-vector"); }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace detail

inline json to_json(const SliceSpec &s) {
    std::vector<double> base(s.base.data(), s.base.data() + s.base.size());
    return json{{"axes", {s.axes[0], s.axes[1]}},
                {"base", base},
                {"ranges", {{s.ranges[0][0], s.ranges[0][1]}, {s.ranges[1][0], s.ranges[1][1]}}},
                {"resolution", {s.resolution[0], s.resolution[1]}}};
}

inline SliceSpec slice_from_json(const json &j) {
    SliceSpec s;
    const auto axes = j.at("axes").get<std::vector<Eigen::Index>>();
    const auto base = j.at("base").get<std::vector<double>>();
    if (axes.size() != 2) { throw std::invalid_argument("config: slice needs two axes"); }
    s.axes = {axes[0], axes[1]};
    s.base = Eigen::Map<const Vector>(base.data(), static_cast<Eigen::Index>(base.size()));
    if (j.contains("ranges")) {
        const auto r = j.at("ranges").get<std::vector<std::vector<double>>>();
        if (r.size() != 2 || r[0].size() != 2 || r[1].size() != 2) { throw std::invalid_argument("config: slice ranges must be 2x2"); }
        s.ranges = {{{r[0][0], r[0][1]}, {r[1][0], r[1][1]}}};
    }
    if (j.contains("resolution")) {
        const auto r = j.at("resolution").get<std::vector<std::size_t>>();
        if (r.size() != 2) { throw std::invalid_argument("config: slice resolution needs two entries"); }
        s.resolution = {r[0], r[1]};
    }
    return s;
}

inline json to_json(const ExperimentConfig &c) {
    json slices = json::array();
    for (const auto &s : c.test.slices) { slices.push_back(to_json(s)); }
    return json{
        {"system",
         {{"kind", c.system.kind},
          {"inertia", detail::vec3_to_json(c.system.inertia)},
          {"mass_matrix", detail::vec3_to_json(c.system.mass_matrix)},
          {"mass", c.system.mass},
          {"gravity", c.system.gravity},
          {"r_g", detail::vec3_to_json(c.system.r_g)},
          {"eta", c.system.eta},
          {"lambda1", c.system.lambda1},
          {"lambda2", c.system.lambda2}}},
        {"sample",
         {{"kind", c.sample.kind},
          {"lower", c.sample.lower},
          {"upper", c.sample.upper},
          {"factors", c.sample.factors},
          {"margin", c.sample.margin},
          {"count", c.sample.count}}},
        {"kernel", {{"family", c.kernel.family}, {"eta_grid", c.kernel.eta_grid}}},
        {"c_grid", c.c_grid},
        {"alpha", c.alpha},
        {"folds", c.folds},
        {"sigma", c.sigma},
        {"test", {{"count", c.test.count}, {"slices", slices}}},
        {"flow", {{"dt", c.flow.dt}, {"horizon", c.flow.horizon}, {"initial_count", c.flow.initial_count}}},
        {"convergence_counts", c.convergence_counts},
        {"seed", c.seed}};
}

/// Missing keys keep their defaults.
inline ExperimentConfig config_from_json(const json &j) {
    ExperimentConfig c;
    if (j.contains("system")) {
        const auto &s = j.at("system");
        c.system.kind = s.value("kind", c.system.kind);
        if (s.contains("inertia")) { c.system.inertia = detail::vec3_from_json(s.at("inertia")); }
        if (s.contains("mass_matrix")) { c.system.mass_matrix = detail::vec3_from_json(s.at("mass_matrix")); }
        if (s.contains("r_g")) { c.system.r_g = detail::vec3_from_json(s.at("r_g")); }
        c.system.mass = s.value("mass", c.system.mass);
        c.system.gravity = s.value("gravity", c.system.gravity);
        c.system.eta = s.value("eta", c.system.eta);
        c.system.lambda1 = s.value("lambda1", c.system.lambda1);
        c.system.lambda2 = s.value("lambda2", c.system.lambda2);
    }
    if (j.contains("sample")) {
        const auto &s = j.at("sample");
        c.sample.kind = s.value("kind", c.sample.kind);
        c.sample.lower = s.value("lower", c.sample.lower);
        c.sample.upper = s.value("upper", c.sample.upper);
        c.sample.factors = s.value("factors", c.sample.factors);
        c.sample.margin = s.value("margin", c.sample.margin);
        c.sample.count = s.value("count", c.sample.count);
    }
    if (j.contains("kernel")) {
        const auto &k = j.at("kernel");
        c.kernel.family = k.value("family", c.kernel.family);
        c.kernel.eta_grid = k.value("eta_grid", c.kernel.eta_grid);
    }
    c.c_grid = j.value("c_grid", c.c_grid);
    c.alpha = j.value("alpha", c.alpha);
    c.folds = j.value("folds", c.folds);
    c.sigma = j.value("sigma", c.sigma);
    if (j.contains("test")) {
        const auto &t = j.at("test");
        c.test.count = t.value("count", c.test.count);
        if (t.contains("slices")) {
            for (const auto &s : t.at("slices")) { c.test.slices.push_back(slice_from_json(s)); }
        }
    }
    if (j.contains("flow")) {
        const auto &f = j.at("flow");
        c.flow.dt = f.value("dt", c.flow.dt);
        c.flow.horizon = f.value("horizon", c.flow.horizon);
        c.flow.initial_count = f.value("initial_count", c.flow.initial_count);
    }
    c.convergence_counts = j.value("convergence_counts", c.convergence_counts);
    c.seed = j.value("seed", c.seed);
    c.validate();
    return c;
}

inline ExperimentConfig load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) { throw std::runtime_error("cannot open config file '" + path + "'"); }
    return config_from_json(json::parse(in));
}

/// FNV-1a hash of the canonical JSON form, as 16 hex digits.
inline std::string config_hash(const ExperimentConfig &c) {
    const std::string text = to_json(c).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

}  // namespace hamkrr
