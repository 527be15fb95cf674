#pragma once

#include "hamkrr/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace hamkrr::fd {

inline constexpr double kDefaultStep = 1e-5;

/// Step for coordinate i, scaled by the coordinate's magnitude.
inline double step_for(double xi, double h) { return h * std::max(1.0, std::abs(xi)); }

/// Central-difference gradient of a scalar function.
inline Vector gradient(const std::function<double(const Vector &)> &f, const Vector &x, double h = kDefaultStep) {
    Vector g(x.size());
    Vector xp = x, xm = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double hi = step_for(x(i), h);
        xp(i) = x(i) + hi;
        xm(i) = x(i) - hi;
        g(i) = (f(xp) - f(xm)) / (2.0 * hi);
        xp(i) = xm(i) = x(i);
    }
    return g;
}

/// Central-difference Jacobian (rows: outputs, columns: inputs).
inline Matrix jacobian(const std::function<Vector(const Vector &)> &f, const Vector &x, double h = kDefaultStep) {
    Vector xp = x, xm = x;
    Matrix jac;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double hi = step_for(x(i), h);
        xp(i) = x(i) + hi;
        xm(i) = x(i) - hi;
        Vector col = (f(xp) - f(xm)) / (2.0 * hi);
        if (i == 0) { jac.resize(col.size(), x.size()); }
        jac.col(i) = col;
        xp(i) = xm(i) = x(i);
    }
    return jac;
}

/// Central-difference directional derivative of f at x along v.
inline double directional(const std::function<double(const Vector &)> &f, const Vector &x, const Vector &v,
                          double h = kDefaultStep) {
    return (f(x + h * v) - f(x - h * v)) / (2.0 * h);
}

/// max |a - b| / max(1, max|b|), the relative-agreement measure used by derivative checks.
template<typename A, typename B>
double relative_error(const Eigen::MatrixBase<A> &a, const Eigen::MatrixBase<B> &b) {
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace hamkrr::fd
