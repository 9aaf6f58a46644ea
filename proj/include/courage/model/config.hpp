#pragma once

#include <cstddef>
#include <string>

#include "courage/error.hpp"

namespace courage::model {

enum class Pooling { LastRow, Mean };

inline std::string to_string(Pooling p) { return p == Pooling::LastRow ? "last" : "mean"; }

inline Pooling parse_pooling(const std::string& s) {
    if (s == "last") return Pooling::LastRow;
    if (s == "mean") return Pooling::Mean;
    throw ConfigError("unknown pooling '" + s + "' (expected last|mean)");
}

/// Shapes of the encoder-decoder. Defaults: 32 model dims, one layer, eight heads,
/// 64 feed-forward dims, per-head dims M/H, one-week windows of 11 features.
struct ModelConfig {
    std::size_t input_features = 11; // K
    std::size_t window_days = 7;     // L
    std::size_t model_dim = 32;      // M
    std::size_t heads = 8;           // H
    std::size_t key_dim = 4;         // M_K
    std::size_t value_dim = 4;       // M_V
    std::size_t ffn_dim = 64;        // M_H
    std::size_t layers = 1;
    Pooling pooling = Pooling::LastRow;
    bool use_residual_layernorm = true;

    /// Config with M_K = M_V = M / H.
    static ModelConfig with_dims(std::size_t k, std::size_t l, std::size_t m, std::size_t h, std::size_t ffn,
                                 std::size_t layers = 1) {
        ModelConfig c;
        c.input_features = k;
        c.window_days = l;
        c.model_dim = m;
        c.heads = h;
        c.ffn_dim = ffn;
        c.layers = layers;
        c.key_dim = h == 0 ? 0 : m / h;
        c.value_dim = c.key_dim;
        return c;
    }

    void validate() const {
        if (input_features == 0 || window_days == 0) throw ConfigError("ModelConfig: K and L must be positive");
        if (model_dim == 0 || model_dim % 2 != 0) throw ConfigError("ModelConfig: model_dim must be even and > 0");
        if (heads == 0) throw ConfigError("ModelConfig: need at least one head");
        if (key_dim == 0 || value_dim == 0 || ffn_dim == 0) throw ConfigError("ModelConfig: zero-sized dimension");
        if (layers == 0) throw ConfigError("ModelConfig: need at least one encoder layer");
    }

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

} // namespace courage::model
