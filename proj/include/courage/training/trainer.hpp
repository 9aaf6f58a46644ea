#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <thread>
#include <vector>

#include <spdlog/spdlog.h>

#include "courage/augmentation/mixup.hpp"
#include "courage/data/windows.hpp"
#include "courage/error.hpp"
#include "courage/model/params.hpp"
#include "courage/model/transformer.hpp"
#include "courage/training/objective.hpp"
#include "courage/training/optimizer.hpp"

namespace courage::training {

struct TrainConfig {
    std::size_t epochs = 500;
    double initial_lr = 0.001;
    std::size_t lr_halving_period = 100;
    double huber_delta = 1.0;
    std::size_t batch_size = 128;
    AdamConfig adam{};
    std::uint64_t seed = 0;
    double clip_norm = 5.0; // <= 0 disables clipping
    std::size_t workers = 1;

    void validate() const {
        if (epochs == 0) throw ConfigError("epochs must be >= 1");
        if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
        if (!(huber_delta > 0.0)) throw ConfigError("huber delta must be > 0");
        if (!(initial_lr >= 0.0)) throw ConfigError("learning rate must be >= 0");
    }

    [[nodiscard]] double lr_at(std::size_t epoch) const {
        return training::lr_at(epoch, initial_lr, lr_halving_period);
    }
};

struct LossPoint {
    std::size_t epoch = 0;
    double lr = 0.0;
    double loss = 0.0;
};

struct TrainResult {
    model::ModelParams params;
    AdamState adam;
    std::vector<LossPoint> curve;
};

/// Thrown when an epoch produces a non-finite loss or gradient. Carries the
/// parameters at the end of the last completed epoch.
class TrainingAborted : public NumericError {
public:
    TrainingAborted(const std::string& what, TrainResult last_good)
        : NumericError(what), last_good_(std::move(last_good)) {}
    [[nodiscard]] const TrainResult& last_good() const noexcept { return last_good_; }

private:
    TrainResult last_good_;
};

inline Matrix target_row(const data::SampleWindow& w) { return Matrix(1, 2, std::vector<double>{w.target1, w.target2}); }

/// Loss and gradient of one sample (mean Huber over both horizons).
inline double sample_gradient(const data::SampleWindow& w, const model::ModelParams& params,
                              const model::ModelConfig& config, double delta, model::ModelParams& grad_out) {
    autograd::Graph g;
    const auto vars = model::bind(g, params);
    auto pred = model::forward_graph(g, w.features, vars, config);
    auto loss = huber_mean(pred, target_row(w), delta);
    g.backward(loss);
    grad_out = model::gradients(vars);
    return loss.value()(0, 0);
}

inline void add_into(model::ModelParams& acc, const model::ModelParams& g) {
    auto a = model::tensor_list(acc);
    const auto b = model::tensor_list(g);
    for (std::size_t i = 0; i < a.size(); ++i) *a[i] += *b[i];
}

/// Mean loss and mean gradient over a batch. Per-sample gradients are reduced in
/// batch order, so the result does not depend on the worker count.
inline double batch_gradient(const std::vector<data::SampleWindow>& batch, const model::ModelParams& params,
                             const model::ModelConfig& config, double delta, std::size_t workers,
                             model::ModelParams& grad_out) {
    grad_out = model::zeros_like(params);
    double loss = 0.0;
    if (workers <= 1 || batch.size() < 2) {
        model::ModelParams g;
        for (const auto& w : batch) {
            loss += sample_gradient(w, params, config, delta, g);
            add_into(grad_out, g);
        }
    } else {
        std::vector<model::ModelParams> grads(batch.size());
        std::vector<double> losses(batch.size());
        std::vector<std::exception_ptr> errors(workers);
        std::vector<std::thread> pool;
        for (std::size_t k = 0; k < workers; ++k) {
            pool.emplace_back([&, k] {
                try {
                    for (std::size_t i = k; i < batch.size(); i += workers)
                        losses[i] = sample_gradient(batch[i], params, config, delta, grads[i]);
                } catch (...) {
                    errors[k] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
        for (std::size_t i = 0; i < batch.size(); ++i) {
            loss += losses[i];
            add_into(grad_out, grads[i]);
        }
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (auto* t : model::tensor_list(grad_out))
        for (auto& v : t->values()) v *= inv;
    return loss * inv;
}

/// Mean Huber loss of `params` over `windows`, no gradient.
inline double mean_loss(const std::vector<data::SampleWindow>& windows, const model::ModelParams& params,
                        const model::ModelConfig& config, double delta) {
    if (windows.empty()) return 0.0;
    double total = 0.0;
    for (const auto& w : windows) {
        const auto p = model::forward(w.features, params, config);
        total += 0.5 * (huber(p.week1, w.target1, delta) + huber(p.week2, w.target2, delta));
    }
    return total / static_cast<double>(windows.size());
}

inline augmentation::Rng stream_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    return augmentation::Rng(seq);
}

using EpochCallback = std::function<void(const LossPoint&)>;

/// Seeded minibatch Adam on the mean Huber loss over both horizons, with the
/// stepwise learning-rate schedule and optional mixup. `windows` must already be
/// standardized. Mixup disabled reproduces the plain path bit for bit.
inline TrainResult train(const std::vector<data::SampleWindow>& windows, const model::ModelConfig& model_config,
                         const TrainConfig& config, const augmentation::MixupConfig& mixup,
                         std::optional<model::ModelParams> initial = std::nullopt,
                         const EpochCallback& on_epoch = {}) {
    config.validate();
    mixup.validate();
    model_config.validate();
    if (windows.empty()) throw ConfigError("train: empty training set");

    TrainResult state;
    state.params = initial ? std::move(*initial) : model::init_params(model_config, config.seed);
    if (!model::consistent(state.params, model_config)) throw DimensionError("train: params do not match model config");
    state.adam = AdamState::for_params(state.params);

    auto shuffle_rng = stream_rng(config.seed, 1);
    auto mixup_rng = stream_rng(mixup.seed, 2);

    std::vector<std::size_t> order(windows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<data::SampleWindow> batch;
    model::ModelParams grads;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        TrainResult last_good = state;
        const double lr = config.lr_at(epoch);
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double epoch_loss = 0.0;
        try {
            for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
                const std::size_t end = std::min(order.size(), start + config.batch_size);
                batch.clear();
                for (std::size_t i = start; i < end; ++i) batch.push_back(windows[order[i]]);
                if (mixup.enabled) batch = augmentation::mixup_batch(batch, mixup, mixup_rng);
                const double loss = batch_gradient(batch, state.params, model_config, config.huber_delta,
                                                   config.workers, grads);
                if (!std::isfinite(loss)) throw NumericError("non-finite batch loss");
                clip_global_norm(grads, config.clip_norm);
                adam_step(state.params, grads, state.adam, lr, config.adam);
                epoch_loss += loss * static_cast<double>(end - start);
            }
        } catch (const NumericError& e) {
            throw TrainingAborted("training aborted in epoch " + std::to_string(epoch) + ": " + e.what(),
                                  std::move(last_good));
        }
        LossPoint point{epoch, lr, epoch_loss / static_cast<double>(windows.size())};
        state.curve.push_back(point);
        if (on_epoch) on_epoch(point);
        spdlog::debug("epoch {} lr {:.3g} loss {:.6g}", epoch, lr, point.loss);
    }
    return state;
}

} // namespace courage::training
