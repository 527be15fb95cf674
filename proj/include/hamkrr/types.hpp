#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace hamkrr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Chart coordinates of a single state. For Lie-Poisson systems these are the
/// global linear coordinates on the dual Lie algebra.
using PhasePoint = Eigen::VectorXd;
using PointSet = std::vector<PhasePoint>;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A point falls outside the chart domain, or onto an excluded singular set.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Evaluation of a Hamiltonian at one of its singularities.
class SingularityError : public DomainError {
public:
    using DomainError::DomainError;
};

class MetricDegeneracyError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// The regularized Gram system could not be solved to the required residual.
class IllConditionedError : public Error {
public:
    IllConditionedError(const std::string &what, double condition_estimate)
        : Error(what), condition_estimate_(condition_estimate) {}

    [[nodiscard]] double condition_estimate() const noexcept { return condition_estimate_; }

private:
    double condition_estimate_;
};

inline void require_dim(const Eigen::Ref<const Vector> &v, Eigen::Index d, const char *what) {
    if (v.size() != d) {
        throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(d) + ", got " +
                             std::to_string(v.size()));
    }
}

}  // namespace hamkrr
