#pragma once

// Versioned binary checkpoint: model shapes, every weight tensor with its shape
// header, the standardizer the model was trained against, and the training
// settings needed to reproduce it. Round trips are bit-exact.

#include <fstream>
#include <sstream>
#include <string>

#include "courage/augmentation/mixup.hpp"
#include "courage/data/records.hpp"
#include "courage/data/standardizer.hpp"
#include "courage/model/serialize.hpp"
#include "courage/training/trainer.hpp"
#include "courage/util/binary_io.hpp"
#include "courage/util/hash.hpp"

namespace courage::training {

inline constexpr char kCheckpointMagic[9] = "CRGCKPT1";
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    model::ModelConfig model;
    model::ModelParams params;
    data::Standardizer standardizer;
    TrainConfig train;
    augmentation::MixupConfig mixup;
    data::Level level = data::Level::County; // windows the model was trained on (County includes state rows when enabled)
    bool include_state_windows = true;
    Date train_end{};
    Date test_start{};
};

inline void write_checkpoint(std::ostream& os, const Checkpoint& c) {
    io::BinaryWriter w(os);
    w.magic(kCheckpointMagic);
    w.u32(kCheckpointVersion);
    model::write_config(w, c.model);
    c.standardizer.write(w);
    w.u64(c.train.epochs);
    w.f64(c.train.initial_lr);
    w.u64(c.train.lr_halving_period);
    w.f64(c.train.huber_delta);
    w.u64(c.train.batch_size);
    w.f64(c.train.adam.beta1);
    w.f64(c.train.adam.beta2);
    w.f64(c.train.adam.epsilon);
    w.u64(c.train.seed);
    w.f64(c.train.clip_norm);
    w.u8(c.mixup.enabled ? 1 : 0);
    w.f64(c.mixup.alpha);
    w.u64(c.mixup.seed);
    w.u8(c.level == data::Level::County ? 0 : 1);
    w.u8(c.include_state_windows ? 1 : 0);
    w.i64(c.train_end.time_since_epoch().count());
    w.i64(c.test_start.time_since_epoch().count());
    model::write_params(w, c.params);
}

inline Checkpoint read_checkpoint(std::istream& is, const std::string& source) {
    io::BinaryReader r(is, source);
    r.expect_magic(kCheckpointMagic);
    if (const auto v = r.u32(); v != kCheckpointVersion) {
        throw FormatError(source + ": unsupported checkpoint version " + std::to_string(v));
    }
    Checkpoint c;
    c.model = model::read_config(r);
    c.standardizer = data::Standardizer::read(r);
    c.train.epochs = r.u64();
    c.train.initial_lr = r.f64();
    c.train.lr_halving_period = r.u64();
    c.train.huber_delta = r.f64();
    c.train.batch_size = r.u64();
    c.train.adam.beta1 = r.f64();
    c.train.adam.beta2 = r.f64();
    c.train.adam.epsilon = r.f64();
    c.train.seed = r.u64();
    c.train.clip_norm = r.f64();
    c.mixup.enabled = r.u8() != 0;
    c.mixup.alpha = r.f64();
    c.mixup.seed = r.u64();
    c.level = r.u8() == 0 ? data::Level::County : data::Level::State;
    c.include_state_windows = r.u8() != 0;
    c.train_end = Date{std::chrono::days{r.i64()}};
    c.test_start = Date{std::chrono::days{r.i64()}};
    c.params = model::read_params(r, c.model);
    return c;
}

inline std::string checkpoint_bytes(const Checkpoint& c) {
    std::ostringstream os(std::ios::binary);
    write_checkpoint(os, c);
    return os.str();
}

inline void save_checkpoint(const std::string& path, const Checkpoint& c) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    write_checkpoint(os, c);
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    return read_checkpoint(is, path);
}

} // namespace courage::training
