#pragma once

#include <cmath>
#include <cstddef>

#include "courage/error.hpp"
#include "courage/numerics/autograd.hpp"

namespace courage::training {

/// Huber loss of residual r: r^2 / 2 inside [-delta, delta], delta (|r| - delta / 2) outside.
inline double huber(double residual, double delta) {
    const double a = std::abs(residual);
    return a <= delta ? 0.5 * residual * residual : delta * (a - 0.5 * delta);
}

inline double huber(double prediction, double target, double delta) { return huber(prediction - target, delta); }

/// d huber / d residual; magnitude never exceeds delta.
inline double huber_derivative(double residual, double delta) {
    if (residual > delta) return delta;
    if (residual < -delta) return -delta;
    return residual;
}

/// Mean Huber loss over all entries of `pred` against the same-shaped `target`, as a 1x1 node.
inline autograd::Var huber_mean(autograd::Var pred, const Matrix& target, double delta) {
    if (!(delta > 0.0)) throw ConfigError("huber: delta must be positive");
    detail::require_same_shape(pred.value(), target, "huber_mean");
    const Matrix& p = pred.value();
    const double n = static_cast<double>(p.size());
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) total += huber(p[i] - target[i], delta);
    const auto ip = pred.id();
    return pred.graph().make(Matrix(1, 1, total / n), {pred},
                             [ip, target, delta, n](autograd::Graph& g, std::size_t self) {
                                 auto* dp = g.grad_slot(ip);
                                 if (!dp) return;
                                 const double d = g.grad(self)(0, 0) / n;
                                 const Matrix& pv = g.value(ip);
                                 for (std::size_t i = 0; i < pv.size(); ++i)
                                     (*dp)[i] += d * huber_derivative(pv[i] - target[i], delta);
                             },
                             "huber_mean");
}

} // namespace courage::training
