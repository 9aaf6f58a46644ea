#pragma once

#include <utility>

#include "courage/model/config.hpp"
#include "courage/model/params.hpp"
#include "courage/util/binary_io.hpp"

namespace courage::model {

inline void write_config(io::BinaryWriter& w, const ModelConfig& c) {
    w.u64(c.input_features);
    w.u64(c.window_days);
    w.u64(c.model_dim);
    w.u64(c.heads);
    w.u64(c.key_dim);
    w.u64(c.value_dim);
    w.u64(c.ffn_dim);
    w.u64(c.layers);
    w.u8(c.pooling == Pooling::LastRow ? 0 : 1);
    w.u8(c.use_residual_layernorm ? 1 : 0);
}

inline ModelConfig read_config(io::BinaryReader& r) {
    ModelConfig c;
    c.input_features = r.u64();
    c.window_days = r.u64();
    c.model_dim = r.u64();
    c.heads = r.u64();
    c.key_dim = r.u64();
    c.value_dim = r.u64();
    c.ffn_dim = r.u64();
    c.layers = r.u64();
    c.pooling = r.u8() == 0 ? Pooling::LastRow : Pooling::Mean;
    c.use_residual_layernorm = r.u8() != 0;
    c.validate();
    return c;
}

/// Tensor section: count, then (name, rows, cols, data) per tensor in canonical order.
inline void write_params(io::BinaryWriter& w, const ModelParams& p) {
    const auto names = tensor_names(p);
    const auto tensors = tensor_list(p);
    w.u64(tensors.size());
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        w.str(names[i]);
        w.matrix(*tensors[i]);
    }
}

/// Reads tensors into the layout implied by `config`; names and shapes must match.
inline ModelParams read_params(io::BinaryReader& r, const ModelConfig& config) {
    ModelParams p = zero_params(config);
    const auto names = tensor_names(p);
    auto tensors = tensor_list(p);
    const auto n = r.u64();
    if (n != tensors.size()) {
        throw FormatError(r.source() + ": expected " + std::to_string(tensors.size()) + " tensors, found " +
                          std::to_string(n));
    }
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        const auto name = r.str();
        if (name != names[i]) throw FormatError(r.source() + ": expected tensor " + names[i] + ", found " + name);
        Matrix m = r.matrix();
        if (!m.same_shape(*tensors[i])) {
            throw FormatError(r.source() + ": tensor " + name + " has shape " + m.shape() + ", expected " +
                              tensors[i]->shape());
        }
        *tensors[i] = std::move(m);
    }
    return p;
}

} // namespace courage::model
