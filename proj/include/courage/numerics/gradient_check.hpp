#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "courage/error.hpp"
#include "courage/numerics/autograd.hpp"

namespace courage::autograd {

/// Builds a scalar loss from parameter nodes bound in a fresh graph.
using ScalarFn = std::function<Var(Graph&, const std::vector<Var>&)>;

/// Result of comparing reverse-mode gradients against central differences.
struct GradientCheckResult {
    double max_relative_error = 0.0;
    std::size_t worst_tensor = 0;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
};

namespace detail {

inline double evaluate(const ScalarFn& f, const std::vector<Matrix>& params) {
    Graph g;
    std::vector<Var> vars;
    vars.reserve(params.size());
    for (const auto& p : params) vars.push_back(g.constant(p));
    const double v = f(g, vars).value()(0, 0);
    if (!std::isfinite(v)) throw NumericError("gradient_check: loss is not finite");
    return v;
}

} // namespace detail

/// Max over every parameter entry of |analytic - numeric| / max(1, |numeric|),
/// with the numeric derivative taken by central differences of width 2*epsilon.
inline GradientCheckResult gradient_check_detailed(const ScalarFn& f, std::vector<Matrix> params,
                                                   double epsilon = 1e-5) {
    if (!(epsilon > 0.0)) throw ConfigError("gradient_check: epsilon must be positive");

    std::vector<Matrix> analytic;
    {
        Graph g;
        std::vector<Var> vars;
        for (const auto& p : params) vars.push_back(g.parameter(p));
        Var loss = f(g, vars);
        if (!std::isfinite(loss.value()(0, 0))) throw NumericError("gradient_check: loss is not finite");
        g.backward(loss);
        for (const auto& v : vars) analytic.push_back(v.grad());
    }

    GradientCheckResult result;
    for (std::size_t t = 0; t < params.size(); ++t) {
        for (std::size_t i = 0; i < params[t].size(); ++i) {
            const double orig = params[t][i];
            params[t][i] = orig + epsilon;
            const double up = detail::evaluate(f, params);
            params[t][i] = orig - epsilon;
            const double down = detail::evaluate(f, params);
            params[t][i] = orig;
            const double numeric = (up - down) / (2.0 * epsilon);
            const double err = std::abs(analytic[t][i] - numeric) / std::max(1.0, std::abs(numeric));
            if (err > result.max_relative_error || (t == 0 && i == 0)) {
                result = {err, t, i, analytic[t][i], numeric};
            }
        }
    }
    return result;
}

inline double gradient_check(const ScalarFn& f, std::vector<Matrix> params, double epsilon = 1e-5) {
    return gradient_check_detailed(f, std::move(params), epsilon).max_relative_error;
}

} // namespace courage::autograd
