#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "courage/data/standardizer.hpp"
#include "courage/numerics/gradient_check.hpp"
#include "courage/training/checkpoint.hpp"
#include "courage/training/objective.hpp"
#include "courage/training/optimizer.hpp"
#include "courage/training/trainer.hpp"
#include "overfit.hpp"
#include "synthetic.hpp"
#include "test_util.hpp"

using namespace courage;
using namespace courage::training;
namespace synth = courage::testing;

namespace {

model::ModelConfig small_model() { return model::ModelConfig::with_dims(11, 7, 8, 2, 16); }

struct Dataset {
    std::vector<data::SampleWindow> raw;
    std::vector<data::SampleWindow> z;
    data::Standardizer standardizer;
};

const Dataset& dataset() {
    static const Dataset d = [] {
        synth::SyntheticOptions opt;
        opt.counties = 3;
        opt.days = 40;
        Dataset out;
        out.raw = data::build_windows(synth::synthetic_series(opt), data::WindowSpec{});
        out.standardizer = data::Standardizer::fit(out.raw);
        out.z = out.standardizer.apply(out.raw);
        return out;
    }();
    return d;
}

TrainConfig quick(std::size_t epochs = 5) {
    TrainConfig c;
    c.epochs = epochs;
    c.batch_size = 16;
    c.seed = 3;
    return c;
}

bool same_params(const model::ModelParams& a, const model::ModelParams& b) {
    const auto x = model::tensor_list(a);
    const auto y = model::tensor_list(b);
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!(*x[i] == *y[i])) return false;
    return true;
}

} // namespace

TEST(Huber, HandValues) {
    EXPECT_EQ(huber(0.0, 1.0), 0.0);
    EXPECT_EQ(huber(0.5, 1.0), 0.125);
    EXPECT_EQ(huber(3.0, 1.0), 2.5);
    EXPECT_EQ(huber(-3.0, 1.0), 2.5);
    EXPECT_EQ(huber(4.0, 6.0, 2.0), 2.0);
}

TEST(Huber, ContinuousWithContinuousSlopeAtDelta) {
    for (double delta : {0.1, 1.0, 3.0}) {
        const double h = 1e-7;
        EXPECT_NEAR(huber(delta - h, delta), huber(delta + h, delta), 1e-6);
        EXPECT_NEAR(huber_derivative(delta - h, delta), huber_derivative(delta + h, delta), 1e-6);
        EXPECT_NEAR(huber(delta, delta), 0.5 * delta * delta, 1e-15);
    }
}

TEST(Huber, DerivativeBoundedByDeltaAndMatchesFiniteDifference) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> r(-50.0, 50.0), d(0.05, 5.0);
    for (int i = 0; i < 1000; ++i) {
        const double x = r(rng), delta = d(rng);
        const double g = huber_derivative(x, delta);
        EXPECT_LE(std::abs(g), delta);
        if (std::abs(std::abs(x) - delta) > 1e-3) {
            const double h = 1e-6;
            EXPECT_NEAR(g, (huber(x + h, delta) - huber(x - h, delta)) / (2 * h), 1e-5);
        }
    }
}

TEST(Huber, MeanNodeGradient) {
    const Matrix target{{0.3, -2.0}};
    const autograd::ScalarFn f = [&](autograd::Graph&, const std::vector<autograd::Var>& v) {
        return huber_mean(v[0], target, 1.0);
    };
    EXPECT_LE(autograd::gradient_check(f, {Matrix{{0.1, 1.5}}}), 1e-7);
    autograd::Graph g;
    const auto loss = huber_mean(g.constant(Matrix{{0.8, 1.0}}), target, 1.0);
    EXPECT_DOUBLE_EQ(loss.value()(0, 0), 0.5 * (0.125 + 2.5));
    EXPECT_THROW(huber_mean(g.constant(Matrix{{0.0}}), target, 1.0), DimensionError);
    EXPECT_THROW(huber_mean(g.constant(Matrix{{0.0, 0.0}}), target, 0.0), ConfigError);
}

TEST(Schedule, HalvesEveryHundredEpochs) {
    EXPECT_EQ(lr_at(0, 0.001, 100), 0.001);
    EXPECT_EQ(lr_at(99, 0.001, 100), 0.001);
    EXPECT_EQ(lr_at(100, 0.001, 100), 0.0005);
    EXPECT_EQ(lr_at(250, 0.001, 100), 0.00025);
    EXPECT_EQ(lr_at(499, 0.001, 100), 0.0000625);
    EXPECT_EQ(lr_at(499, 0.001, 0), 0.001);
    for (std::size_t e = 1; e < 500; ++e) EXPECT_LE(lr_at(e, 0.001, 100), lr_at(e - 1, 0.001, 100));
}

TEST(Adam, ZeroGradientLeavesParametersAlone) {
    const auto cfg = small_model();
    auto p = model::init_params(cfg, 1);
    const auto before = p;
    auto state = AdamState::for_params(p);
    adam_step(p, model::zeros_like(p), state, 0.01);
    EXPECT_TRUE(same_params(p, before));
    EXPECT_EQ(state.step, 1u);
}

TEST(Adam, FirstStepMovesByLearningRateAgainstGradientSign) {
    const auto cfg = small_model();
    auto p = model::init_params(cfg, 2);
    const auto before = p;
    auto grads = model::zeros_like(p);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (auto* t : model::tensor_list(grads))
        for (auto& v : t->values()) v = u(rng);
    auto state = AdamState::for_params(p);
    adam_step(p, grads, state, 0.001);
    const auto a = model::tensor_list(p);
    const auto b = model::tensor_list(before);
    const auto g = model::tensor_list(grads);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = 0; k < a[i]->size(); ++k) {
            // bias-corrected moments after one step are g and g^2
            const double gk = g[i]->values()[k];
            const double step = a[i]->values()[k] - b[i]->values()[k];
            EXPECT_NEAR(step, -0.001 * gk / (std::abs(gk) + 1e-8), 1e-15);
            EXPECT_NEAR(std::abs(step), 0.001, 0.001 * 1e-8 / std::abs(gk) + 1e-15);
        }
}

TEST(Adam, RejectsNonFiniteGradientWithoutTouchingState) {
    const auto cfg = small_model();
    auto p = model::init_params(cfg, 4);
    const auto before = p;
    auto grads = model::zeros_like(p);
    grads.decoder_bias(0, 1) = std::numeric_limits<double>::quiet_NaN();
    auto state = AdamState::for_params(p);
    EXPECT_THROW(adam_step(p, grads, state, 0.001), NumericError);
    EXPECT_TRUE(same_params(p, before));
    EXPECT_EQ(state.step, 0u);
}

TEST(Clip, ScalesOnlyAboveThreshold) {
    const auto cfg = small_model();
    auto g = model::zeros_like(model::init_params(cfg, 5));
    g.decoder_bias = Matrix{{3.0, 4.0}};
    auto small = g;
    EXPECT_DOUBLE_EQ(clip_global_norm(small, 5.0), 5.0);
    EXPECT_EQ(small.decoder_bias, g.decoder_bias);
    g.decoder_bias = Matrix{{30.0, 40.0}};
    EXPECT_DOUBLE_EQ(clip_global_norm(g, 5.0), 50.0);
    EXPECT_NEAR(global_norm(g), 5.0, 1e-12);
    EXPECT_NEAR(g.decoder_bias(0, 0), 3.0, 1e-12);
    auto off = g;
    off.decoder_bias = Matrix{{30.0, 40.0}};
    clip_global_norm(off, 0.0);
    EXPECT_EQ(off.decoder_bias(0, 1), 40.0);
}

TEST(Trainer, BatchGradientMatchesSumOfSamples) {
    const auto cfg = small_model();
    const auto p = model::init_params(cfg, 6);
    const auto& d = dataset();
    std::vector<data::SampleWindow> batch(d.z.begin(), d.z.begin() + 5);
    model::ModelParams g_batch;
    const double loss = batch_gradient(batch, p, cfg, 1.0, 1, g_batch);
    double total = 0.0;
    auto acc = model::zeros_like(p);
    for (const auto& w : batch) {
        model::ModelParams g;
        total += sample_gradient(w, p, cfg, 1.0, g);
        add_into(acc, g);
    }
    EXPECT_NEAR(loss, total / 5.0, 1e-14);
    EXPECT_NEAR(loss, mean_loss(batch, p, cfg, 1.0), 1e-12);
    const auto a = model::tensor_list(g_batch);
    const auto b = model::tensor_list(acc);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LE(max_abs_diff(*a[i], 0.2 * *b[i]), 1e-14);
}

TEST(Trainer, SameSeedSameParametersAfterFiveEpochs) {
    const auto& d = dataset();
    const auto a = train(d.z, small_model(), quick(), {});
    const auto b = train(d.z, small_model(), quick(), {});
    EXPECT_TRUE(same_params(a.params, b.params));
    ASSERT_EQ(a.curve.size(), 5u);
    for (std::size_t e = 0; e < 5; ++e) EXPECT_EQ(a.curve[e].loss, b.curve[e].loss);
    auto other = quick();
    other.seed = 4;
    EXPECT_FALSE(same_params(a.params, train(d.z, small_model(), other, {}).params));
}

TEST(Trainer, WorkerCountDoesNotChangeResults) {
    const auto& d = dataset();
    auto threaded = quick(3);
    threaded.workers = 3;
    const auto a = train(d.z, small_model(), quick(3), {});
    const auto b = train(d.z, small_model(), threaded, {});
    EXPECT_TRUE(same_params(a.params, b.params));
}

TEST(Trainer, FirstEpochLossWithZeroDecoderIsTargetHuber) {
    const auto& d = dataset();
    const auto cfg = small_model();
    auto p = model::init_params(cfg, 7);
    p.decoder_weight = Matrix(cfg.model_dim, 2);
    p.decoder_bias = Matrix(1, 2);
    auto tc = quick(1);
    tc.batch_size = d.z.size(); // one batch: the loss is measured before the only update
    const auto r = train(d.z, cfg, tc, {}, p);
    double expected = 0.0;
    for (const auto& w : d.z) expected += 0.5 * (huber(w.target1, 1.0) + huber(w.target2, 1.0));
    expected /= static_cast<double>(d.z.size());
    EXPECT_NEAR(r.curve[0].loss, expected, 1e-12);
}

TEST(Trainer, LossCurveIsFiniteAndRecordsSchedule) {
    const auto& d = dataset();
    auto tc = quick(6);
    tc.lr_halving_period = 2;
    const auto r = train(d.z, small_model(), tc, {});
    ASSERT_EQ(r.curve.size(), 6u);
    for (std::size_t e = 0; e < 6; ++e) {
        EXPECT_TRUE(std::isfinite(r.curve[e].loss));
        EXPECT_EQ(r.curve[e].epoch, e);
        EXPECT_EQ(r.curve[e].lr, lr_at(e, tc.initial_lr, 2));
    }
    EXPECT_LT(r.curve.back().loss, r.curve.front().loss);
}

TEST(Trainer, DisabledMixupIsThePlainPath) {
    const auto& d = dataset();
    const auto plain = train(d.z, small_model(), quick(3), {});
    const auto off = train(d.z, small_model(), quick(3), augmentation::MixupConfig{0.2, false, 99});
    EXPECT_TRUE(same_params(plain.params, off.params));
    const auto on = train(d.z, small_model(), quick(3), augmentation::MixupConfig{0.2, true, 99});
    EXPECT_FALSE(same_params(plain.params, on.params));
    const auto on_again = train(d.z, small_model(), quick(3), augmentation::MixupConfig{0.2, true, 99});
    EXPECT_TRUE(same_params(on.params, on_again.params));
}

TEST(Trainer, NonFiniteInputAbortsWithLastGoodState) {
    auto windows = dataset().z;
    const auto cfg = small_model();
    const auto init = model::init_params(cfg, quick().seed);
    windows[4].features(0, 0) = std::numeric_limits<double>::infinity();
    try {
        train(windows, cfg, quick(), {});
        FAIL() << "expected TrainingAborted";
    } catch (const TrainingAborted& e) {
        EXPECT_NE(std::string(e.what()).find("epoch 0"), std::string::npos) << e.what();
        EXPECT_TRUE(same_params(e.last_good().params, init));
        EXPECT_TRUE(e.last_good().curve.empty());
    }
}

TEST(Trainer, RejectsBadConfiguration) {
    const auto& d = dataset();
    auto tc = quick();
    tc.epochs = 0;
    EXPECT_THROW(train(d.z, small_model(), tc, {}), ConfigError);
    EXPECT_THROW(train({}, small_model(), quick(), {}), ConfigError);
    EXPECT_THROW(train(d.z, small_model(), quick(), {}, model::init_params(model::ModelConfig{}, 0)), DimensionError);
}

TEST(Trainer, OverfitsTenLowCountWindows) {
    const auto out = synth::run_overfit();
    EXPECT_LT(out.final_loss, 1e-3);
    EXPECT_LT(out.worst_error_deaths, 0.5);
}

TEST(Checkpoint, RoundTripIsByteStable) {
    const auto& d = dataset();
    Checkpoint c;
    c.model = small_model();
    c.params = model::init_params(c.model, 8);
    c.standardizer = d.standardizer;
    c.train = quick();
    c.mixup = {0.3, true, 17};
    c.level = data::Level::State;
    c.include_state_windows = false;
    c.train_end = parse_iso_date("2020-12-01");
    c.test_start = parse_iso_date("2020-12-02");
    const auto bytes = checkpoint_bytes(c);
    std::istringstream in(bytes, std::ios::binary);
    const auto back = read_checkpoint(in, "mem");
    EXPECT_EQ(checkpoint_bytes(back), bytes);
    EXPECT_EQ(back.model, c.model);
    EXPECT_EQ(back.standardizer, c.standardizer);
    EXPECT_TRUE(same_params(back.params, c.params));
    EXPECT_EQ(back.mixup.alpha, 0.3);
    EXPECT_EQ(back.level, data::Level::State);
    EXPECT_EQ(back.test_start, c.test_start);
    std::istringstream bad(bytes.substr(0, 20), std::ios::binary);
    EXPECT_THROW(read_checkpoint(bad, "cut"), FormatError);
}
