#pragma once

// Input-layer mixup: convex combinations of two standardized windows and their
// targets, x = lambda * x_i + (1 - lambda) * x_j, with lambda ~ Beta(alpha, alpha).

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include <spdlog/spdlog.h>

#include "courage/data/windows.hpp"
#include "courage/error.hpp"

namespace courage::augmentation {

struct MixupConfig {
    double alpha = 0.2;
    bool enabled = false;
    std::uint64_t seed = 0;

    void validate() const {
        if (enabled && !(alpha > 0.0)) throw ConfigError("mixup alpha must be > 0, got " + std::to_string(alpha));
    }
};

using Rng = std::mt19937_64;

/// Draws lambda ~ Beta(alpha, alpha) as G1 / (G1 + G2) with G ~ Gamma(alpha, 1).
inline double sample_lambda(double alpha, Rng& rng) {
    if (!(alpha > 0.0)) throw ConfigError("mixup alpha must be > 0, got " + std::to_string(alpha));
    std::gamma_distribution<double> gamma(alpha, 1.0);
    const double x = gamma(rng);
    const double y = gamma(rng);
    const double s = x + y;
    if (s > 0.0) return std::clamp(x / s, 0.0, 1.0);
    // Both draws underflowed (possible for tiny alpha); the limit law puts mass at the ends.
    return std::uniform_int_distribution<int>(0, 1)(rng) == 0 ? 0.0 : 1.0;
}

inline double sample_lambda(const MixupConfig& config, Rng& rng) { return sample_lambda(config.alpha, rng); }

namespace detail {

/// lambda * a + (1 - lambda) * b, written as a + (1 - lambda)(b - a) so that
/// lambda = 1 and a == b both return a exactly; clamped to the parents' range.
inline double mix(double a, double b, double lambda) {
    const double v = a + (1.0 - lambda) * (b - a);
    return std::clamp(v, std::min(a, b), std::max(a, b));
}

} // namespace detail

/// Convex combination of features and both targets. Metadata is taken from `a`.
inline data::SampleWindow mixup_pair(const data::SampleWindow& a, const data::SampleWindow& b, double lambda) {
    if (!a.features.same_shape(b.features)) {
        throw DimensionError("mixup_pair: feature shapes differ " + a.features.shape() + " vs " + b.features.shape());
    }
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("mixup_pair: lambda must lie in [0, 1]");
    data::SampleWindow out = a;
    for (std::size_t i = 0; i < out.features.size(); ++i) out.features[i] = detail::mix(a.features[i], b.features[i], lambda);
    out.target1 = detail::mix(a.target1, b.target1, lambda);
    out.target2 = detail::mix(a.target2, b.target2, lambda);
    return out;
}

/// The random choices behind one mixed batch: sample i was mixed with
/// partners[i] using lambdas[i].
struct MixupPlan {
    std::vector<std::size_t> partners;
    std::vector<double> lambdas;
};

/// Draws a partner permutation, then one lambda per sample.
inline MixupPlan draw_plan(std::size_t batch_size, double alpha, Rng& rng) {
    MixupPlan plan;
    plan.partners.resize(batch_size);
    std::iota(plan.partners.begin(), plan.partners.end(), std::size_t{0});
    std::shuffle(plan.partners.begin(), plan.partners.end(), rng);
    plan.lambdas.reserve(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) plan.lambdas.push_back(sample_lambda(alpha, rng));
    return plan;
}

/// Mixes every sample with a partner drawn by random permutation of the batch.
/// Disabled configs and single-sample batches pass through and consume no randomness.
inline std::vector<data::SampleWindow> mixup_batch(const std::vector<data::SampleWindow>& batch,
                                                   const MixupConfig& config, Rng& rng, MixupPlan* plan_out = nullptr) {
    if (!config.enabled) return batch;
    config.validate();
    if (batch.size() < 2) {
        spdlog::warn("mixup_batch: batch of {} sample(s), passing through unchanged", batch.size());
        return batch;
    }
    MixupPlan plan = draw_plan(batch.size(), config.alpha, rng);
    std::vector<data::SampleWindow> out;
    out.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) out.push_back(mixup_pair(batch[i], batch[plan.partners[i]], plan.lambdas[i]));
    if (plan_out) *plan_out = std::move(plan);
    return out;
}

} // namespace courage::augmentation
