#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "courage/error.hpp"
#include "courage/model/params.hpp"

namespace courage::training {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// First/second moments mirror the parameter tree; `step` counts updates taken.
struct AdamState {
    model::ModelParams first_moment;
    model::ModelParams second_moment;
    std::size_t step = 0;

    static AdamState for_params(const model::ModelParams& params) {
        return {model::zeros_like(params), model::zeros_like(params), 0};
    }
};

/// Learning rate at `epoch`: initial_lr halved every `halving_period` epochs.
inline double lr_at(std::size_t epoch, double initial_lr, std::size_t halving_period) {
    if (halving_period == 0) return initial_lr;
    return initial_lr * std::ldexp(1.0, -static_cast<int>(epoch / halving_period));
}

inline double global_norm(const model::ModelParams& grads) {
    double s = 0.0;
    for (const auto* t : model::tensor_list(grads))
        for (double v : t->values()) s += v * v;
    return std::sqrt(s);
}

/// Rescales gradients so the global L2 norm is at most max_norm. Returns the pre-clip norm.
inline double clip_global_norm(model::ModelParams& grads, double max_norm) {
    const double norm = global_norm(grads);
    if (max_norm > 0.0 && norm > max_norm) {
        const double s = max_norm / norm;
        for (auto* t : model::tensor_list(grads))
            for (auto& v : t->values()) v *= s;
    }
    return norm;
}

/// Bias-corrected Adam update. Non-finite gradients throw before anything is modified.
inline void adam_step(model::ModelParams& params, const model::ModelParams& grads, AdamState& state, double lr,
                      const AdamConfig& cfg = {}) {
    auto p = model::tensor_list(params);
    const auto g = model::tensor_list(grads);
    auto m = model::tensor_list(state.first_moment);
    auto v = model::tensor_list(state.second_moment);
    if (g.size() != p.size() || m.size() != p.size() || v.size() != p.size()) {
        throw DimensionError("adam_step: gradient/state layout does not match parameters");
    }
    const auto names = model::tensor_names(grads);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!g[i]->same_shape(*p[i])) throw DimensionError("adam_step: gradient shape mismatch for " + names[i]);
        if (!g[i]->all_finite()) throw NumericError("adam_step: non-finite gradient in " + names[i]);
    }

    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(cfg.beta1, t);
    const double c2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t i = 0; i < p.size(); ++i) {
        auto& pm = *p[i];
        const auto& gm = *g[i];
        auto& mm = *m[i];
        auto& vm = *v[i];
        for (std::size_t k = 0; k < pm.size(); ++k) {
            mm[k] = cfg.beta1 * mm[k] + (1.0 - cfg.beta1) * gm[k];
            vm[k] = cfg.beta2 * vm[k] + (1.0 - cfg.beta2) * gm[k] * gm[k];
            const double mhat = mm[k] / c1;
            const double vhat = vm[k] / c2;
            pm[k] -= lr * mhat / (std::sqrt(vhat) + cfg.epsilon);
        }
    }
}

} // namespace courage::training
