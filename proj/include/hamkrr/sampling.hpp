#pragma once

#include "hamkrr/geometry.hpp"
#include "hamkrr/types.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string_view>
#include <variant>
#include <vector>

namespace hamkrr {

/// Seeded random stream. Streams are keyed by (seed, tag) so that, for example,
/// noise draws never share state with point draws under the same seed.
///
/// Uniform and normal variates are produced here rather than with the <random>
/// distributions, whose output is implementation defined; this keeps results
/// byte-identical across standard libraries.
class Rng {
public:
    Rng(std::uint64_t seed, std::string_view tag) : engine_(mix(seed, tag)) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on the open interval (0, 1).
    double uniform_open() {
        double u;
        do { u = uniform(); } while (u == 0.0);
        return u;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller, caching the second variate.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_open();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do { x = engine_(); } while (x >= limit);
        return static_cast<std::size_t>(x % n);
    }

    /// Sub-seed for an indexed unit of work (a fold, a grid cell, a sample size).
    static std::uint64_t derive(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0) {
        return splitmix(mix(seed, tag) ^ splitmix(index + 0x632be59bd9b4e019ULL));
    }

private:
    static std::uint64_t splitmix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    static std::uint64_t mix(std::uint64_t seed, std::string_view tag) {
        std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
        for (unsigned char c : tag) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return splitmix(seed ^ splitmix(h));
    }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

struct CubeDomain {
    Vector lower;
    Vector upper;
};

struct SphereProductDomain {
    int factors = 1;
    /// Samples closer than this (radians) to a chart boundary are redrawn.
    double margin = 1e-3;
};

struct SampleSpec {
    std::variant<CubeDomain, SphereProductDomain> domain;
    std::size_t count = 0;
    std::uint64_t seed = 0;
};

namespace detail {

inline void check_count(std::size_t n) {
    if (n == 0) { throw std::invalid_argument("sample spec: count must be at least 1"); }
}

}  // namespace detail

/// IID uniform points in an axis-aligned box. Degenerate intervals (lower == upper) are allowed.
inline PointSet sample_cube(const SampleSpec &spec) {
    const auto *cube = std::get_if<CubeDomain>(&spec.domain);
    if (!cube) { throw std::invalid_argument("sample_cube: spec is not a cube domain"); }
    detail::check_count(spec.count);
    if (cube->lower.size() != cube->upper.size() || cube->lower.size() == 0) {
        throw DimensionError("sample_cube: bounds must be nonempty and of equal length");
    }
    if ((cube->lower.array() > cube->upper.array()).any()) {
        throw std::invalid_argument("sample_cube: lower bound exceeds upper bound");
    }
    Rng rng(spec.seed, "points/cube");
    PointSet out;
    out.reserve(spec.count);
    for (std::size_t n = 0; n < spec.count; ++n) {
        PhasePoint p(cube->lower.size());
        for (Eigen::Index i = 0; i < p.size(); ++i) { p(i) = rng.uniform(cube->lower(i), cube->upper(i)); }
        out.push_back(std::move(p));
    }
    return out;
}

/// Inverse-CDF map from (U1, U2) in (0,1)^2 to a uniformly distributed point
/// (theta, phi) on S^2: theta = arccos(2 U1 - 1), phi = 2 pi U2.
inline Eigen::Vector2d sphere_from_uniforms(double u1, double u2) {
    return {std::acos(2.0 * u1 - 1.0), 2.0 * sphere::kPi * u2};
}

/// Uniform samples on a product of spheres in chart coordinates. Samples
/// violating the chart margin, or rejected by `accept`, are redrawn.
inline PointSet sample_sphere_product(const SampleSpec &spec,
                                      const std::function<bool(const PhasePoint &)> &accept = {}) {
    const auto *sp = std::get_if<SphereProductDomain>(&spec.domain);
    if (!sp) { throw std::invalid_argument("sample_sphere_product: spec is not a sphere-product domain"); }
    detail::check_count(spec.count);
    if (sp->factors < 1) { throw std::invalid_argument("sample_sphere_product: need at least one factor"); }
    Rng rng(spec.seed, "points/sphere_product");
    PointSet out;
    out.reserve(spec.count);
    constexpr std::size_t kMaxAttempts = 1'000'000;
    std::size_t attempts = 0;
    while (out.size() < spec.count) {
        if (++attempts > kMaxAttempts * spec.count) {
            throw std::runtime_error("sample_sphere_product: rejection sampling did not terminate");
        }
        PhasePoint p(2 * sp->factors);
        bool ok = true;
        for (int f = 0; f < sp->factors; ++f) {
            const double u1 = rng.uniform_open();
            const double u2 = rng.uniform_open();
            const Eigen::Vector2d tp = sphere_from_uniforms(u1, u2);
            p(2 * f) = tp(0);
            p(2 * f + 1) = tp(1);
            ok = ok && sphere::within_margin(tp(0), tp(1), sp->margin);
        }
        if (!ok || (accept && !accept(p))) { continue; }
        out.push_back(std::move(p));
    }
    return out;
}

/// Adds IID N(0, sigma^2) noise to each chart coordinate of each field sample.
inline std::vector<Vector> add_tangent_noise(std::vector<Vector> fields, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0)) { throw std::invalid_argument("add_tangent_noise: sigma must be nonnegative"); }
    if (sigma == 0.0) { return fields; }
    Rng rng(seed, "noise/tangent");
    for (auto &v : fields) {
        for (Eigen::Index i = 0; i < v.size(); ++i) { v(i) += sigma * rng.normal(); }
    }
    return fields;
}

}  // namespace hamkrr
