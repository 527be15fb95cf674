#pragma once

#include "hamkrr/geometry.hpp"
#include "hamkrr/types.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>

namespace hamkrr {

/// Differentiable Mercer kernel on a d-dimensional chart.
///
/// grad1(x, y) is the gradient of K in its first argument, and
/// hess12(x, y)(a, b) = d^2 K / dx_a dy_b. Implementations are immutable.
class Kernel {
public:
    virtual ~Kernel() = default;

    [[nodiscard]] virtual Eigen::Index dim() const = 0;
    [[nodiscard]] virtual double eval(const PhasePoint &x, const PhasePoint &y) const = 0;
    [[nodiscard]] virtual Vector grad1(const PhasePoint &x, const PhasePoint &y) const = 0;
    [[nodiscard]] virtual Matrix hess12(const PhasePoint &x, const PhasePoint &y) const = 0;
    [[nodiscard]] virtual std::optional<double> bandwidth() const { return std::nullopt; }
    [[nodiscard]] virtual std::string name() const = 0;

    /// Throws DomainError when x is not an admissible argument.
    virtual void validate(const PhasePoint &x) const { require_dim(x, dim(), "Kernel::validate"); }
};

using KernelModel = std::shared_ptr<const Kernel>;

/// K(x, y) = exp(-|x - y|^2 / eta^2) on R^d.
class GaussianKernel final : public Kernel {
public:
    GaussianKernel(double eta, Eigen::Index dim) : eta_(eta), inv_eta2_(0.0), dim_(dim) {
        if (!(eta > 0.0) || !std::isfinite(eta)) { throw std::invalid_argument("GaussianKernel: bandwidth must be positive"); }
        if (dim <= 0) { throw std::invalid_argument("GaussianKernel: dimension must be positive"); }
        inv_eta2_ = 1.0 / (eta * eta);
    }

    [[nodiscard]] Eigen::Index dim() const override { return dim_; }
    [[nodiscard]] std::optional<double> bandwidth() const override { return eta_; }
    [[nodiscard]] std::string name() const override { return "gaussian"; }

    [[nodiscard]] double eval(const PhasePoint &x, const PhasePoint &y) const override {
        return std::exp(-(x - y).squaredNorm() * inv_eta2_);
    }

    [[nodiscard]] Vector grad1(const PhasePoint &x, const PhasePoint &y) const override {
        const Vector diff = x - y;
        return (-2.0 * inv_eta2_ * std::exp(-diff.squaredNorm() * inv_eta2_)) * diff;
    }

    [[nodiscard]] Matrix hess12(const PhasePoint &x, const PhasePoint &y) const override {
        const Vector diff = x - y;
        const double k = std::exp(-diff.squaredNorm() * inv_eta2_);
        Matrix h = (-4.0 * inv_eta2_ * inv_eta2_ * k) * (diff * diff.transpose());
        h.diagonal().array() += 2.0 * inv_eta2_ * k;
        return h;
    }

private:
    double eta_;
    double inv_eta2_;
    Eigen::Index dim_;
};

/// K'(x, y) = K(f(x), f(y)) for a smooth map f: R^d -> R^m with Jacobian Df.
/// Derivatives follow from the chain rule: grad1' = Df(x)^T grad1, hess12' = Df(x)^T hess12 Df(y).
class PullbackKernel final : public Kernel {
public:
    using Map = std::function<Vector(const PhasePoint &)>;
    using JacobianMap = std::function<Matrix(const PhasePoint &)>;
    using Validator = std::function<void(const PhasePoint &)>;

    PullbackKernel(KernelModel base, Eigen::Index dim, Map map, JacobianMap jacobian, std::string name,
                   Validator validator = {})
        : base_(std::move(base)),
          dim_(dim),
          map_(std::move(map)),
          jacobian_(std::move(jacobian)),
          name_(std::move(name)),
          validator_(std::move(validator)) {
        if (!base_) { throw std::invalid_argument("PullbackKernel: base kernel is null"); }
        if (!map_ || !jacobian_) { throw std::invalid_argument("PullbackKernel: map and Jacobian are required"); }
    }

    [[nodiscard]] Eigen::Index dim() const override { return dim_; }
    [[nodiscard]] std::optional<double> bandwidth() const override { return base_->bandwidth(); }
    [[nodiscard]] std::string name() const override { return name_; }
    [[nodiscard]] const KernelModel &base() const noexcept { return base_; }

    void validate(const PhasePoint &x) const override {
        require_dim(x, dim_, "PullbackKernel::validate");
        if (validator_) { validator_(x); }
    }

    [[nodiscard]] double eval(const PhasePoint &x, const PhasePoint &y) const override {
        return base_->eval(map_(x), map_(y));
    }

    [[nodiscard]] Vector grad1(const PhasePoint &x, const PhasePoint &y) const override {
        return jacobian_(x).transpose() * base_->grad1(map_(x), map_(y));
    }

    [[nodiscard]] Matrix hess12(const PhasePoint &x, const PhasePoint &y) const override {
        return jacobian_(x).transpose() * base_->hess12(map_(x), map_(y)) * jacobian_(y);
    }

private:
    KernelModel base_;
    Eigen::Index dim_;
    Map map_;
    JacobianMap jacobian_;
    std::string name_;
    Validator validator_;
};

inline KernelModel gaussian_kernel(double eta, Eigen::Index dim) {
    return std::make_shared<const GaussianKernel>(eta, dim);
}

/// Restriction of an ambient kernel to a chart through its embedding.
inline KernelModel chart_restricted_kernel(KernelModel base, const Chart &chart) {
    if (!base || base->dim() != chart.ambient_dim) {
        throw DimensionError("chart_restricted_kernel: base kernel must live on the chart's ambient space");
    }
    return std::make_shared<const PullbackKernel>(
        std::move(base), chart.dim, chart.embed, chart.jacobian, "restricted_" + chart.name,
        [chart](const PhasePoint &z) { chart.validate(z); });
}

/// Kernel made argumentwise invariant through an invariant feature map.
inline KernelModel invariant_kernel(KernelModel base, Eigen::Index dim, PullbackKernel::Map feature,
                                    PullbackKernel::JacobianMap feature_jacobian) {
    return std::make_shared<const PullbackKernel>(std::move(base), dim, std::move(feature),
                                                  std::move(feature_jacobian), "invariant");
}

/// Feature map f(P) = (P1^2 + P2^2, P3), invariant under rotations about the 3-axis.
inline KernelModel axial_invariant_gaussian_kernel(double eta) {
    auto feature = [](const PhasePoint &p) {
        Vector f(2);
        f << p(0) * p(0) + p(1) * p(1), p(2);
        return f;
    };
    auto jacobian = [](const PhasePoint &p) {
        Matrix j(2, 3);
        j << 2.0 * p(0), 2.0 * p(1), 0.0,
             0.0, 0.0, 1.0;
        return j;
    };
    return invariant_kernel(gaussian_kernel(eta, 2), 3, feature, jacobian);
}

}  // namespace hamkrr
