#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "courage/model/config.hpp"
#include "courage/numerics/autograd.hpp"
#include "courage/numerics/matrix.hpp"

namespace courage::model {

template <class T>
struct HeadParams {
    T query; // M x M_K
    T key;   // M x M_K
    T value; // M x M_V
};

template <class T>
struct NormParams {
    T gain; // 1 x M
    T bias; // 1 x M
};

template <class T>
struct LayerParams {
    std::vector<HeadParams<T>> heads;
    T output;   // (H * M_V) x M
    T ff_w1;    // M x M_H
    T ff_b1;    // 1 x M_H
    T ff_w2;    // M_H x M
    T ff_b2;    // 1 x M
    std::optional<NormParams<T>> norm_attention;
    std::optional<NormParams<T>> norm_ffn;
};

/// Every learnable tensor of the model. Instantiated with Matrix for storage and
/// with autograd::Var when bound into a graph.
template <class T>
struct ParamTree {
    T projection; // U, M x K
    std::vector<LayerParams<T>> layers;
    T decoder_weight; // M x 2
    T decoder_bias;   // 1 x 2
};

using ModelParams = ParamTree<Matrix>;
using ParamVars = ParamTree<autograd::Var>;

/// Visits every tensor in a fixed canonical order with a stable name.
/// The order defines checkpoint layout, optimizer state layout and gradient flattening.
template <class Tree, class F>
void for_each_tensor(Tree& tree, F&& f) {
    f(std::string("projection"), tree.projection);
    for (std::size_t l = 0; l < tree.layers.size(); ++l) {
        auto& layer = tree.layers[l];
        const std::string p = "layer" + std::to_string(l) + ".";
        for (std::size_t h = 0; h < layer.heads.size(); ++h) {
            const std::string hp = p + "head" + std::to_string(h) + ".";
            f(hp + "query", layer.heads[h].query);
            f(hp + "key", layer.heads[h].key);
            f(hp + "value", layer.heads[h].value);
        }
        f(p + "output", layer.output);
        f(p + "ff_w1", layer.ff_w1);
        f(p + "ff_b1", layer.ff_b1);
        f(p + "ff_w2", layer.ff_w2);
        f(p + "ff_b2", layer.ff_b2);
        if (layer.norm_attention) {
            f(p + "norm_attention.gain", layer.norm_attention->gain);
            f(p + "norm_attention.bias", layer.norm_attention->bias);
        }
        if (layer.norm_ffn) {
            f(p + "norm_ffn.gain", layer.norm_ffn->gain);
            f(p + "norm_ffn.bias", layer.norm_ffn->bias);
        }
    }
    f(std::string("decoder_weight"), tree.decoder_weight);
    f(std::string("decoder_bias"), tree.decoder_bias);
}

template <class T>
std::vector<T*> tensor_list(ParamTree<T>& tree) {
    std::vector<T*> out;
    for_each_tensor(tree, [&](const std::string&, T& t) { out.push_back(&t); });
    return out;
}

template <class T>
std::vector<const T*> tensor_list(const ParamTree<T>& tree) {
    std::vector<const T*> out;
    for_each_tensor(tree, [&](const std::string&, const T& t) { out.push_back(&t); });
    return out;
}

template <class T>
std::vector<std::string> tensor_names(const ParamTree<T>& tree) {
    std::vector<std::string> out;
    for_each_tensor(tree, [&](const std::string& name, const T&) { out.push_back(name); });
    return out;
}

/// Maps one tree onto another with the same structure.
template <class T, class F>
auto map_tree(const ParamTree<T>& in, F&& f) {
    using U = std::decay_t<decltype(f(in.projection))>;
    ParamTree<U> out;
    out.projection = f(in.projection);
    for (const auto& layer : in.layers) {
        LayerParams<U> l;
        for (const auto& h : layer.heads) l.heads.push_back({f(h.query), f(h.key), f(h.value)});
        l.output = f(layer.output);
        l.ff_w1 = f(layer.ff_w1);
        l.ff_b1 = f(layer.ff_b1);
        l.ff_w2 = f(layer.ff_w2);
        l.ff_b2 = f(layer.ff_b2);
        if (layer.norm_attention) l.norm_attention = NormParams<U>{f(layer.norm_attention->gain), f(layer.norm_attention->bias)};
        if (layer.norm_ffn) l.norm_ffn = NormParams<U>{f(layer.norm_ffn->gain), f(layer.norm_ffn->bias)};
        out.layers.push_back(std::move(l));
    }
    out.decoder_weight = f(in.decoder_weight);
    out.decoder_bias = f(in.decoder_bias);
    return out;
}

/// All-zero tensors with the shapes of `params`.
inline ModelParams zeros_like(const ModelParams& params) {
    return map_tree(params, [](const Matrix& m) { return Matrix(m.rows(), m.cols()); });
}

/// Binds parameters as leaves of `g`.
inline ParamVars bind(autograd::Graph& g, const ModelParams& params) {
    return map_tree(params, [&](const Matrix& m) { return g.parameter(m); });
}

/// Reads the gradients of bound parameters after backward().
inline ModelParams gradients(const ParamVars& vars) {
    return map_tree(vars, [](const autograd::Var& v) { return v.grad(); });
}

inline std::size_t parameter_count(const ModelParams& params) {
    std::size_t n = 0;
    for (const auto* t : tensor_list(params)) n += t->size();
    return n;
}

/// Zero-filled parameters with the shapes implied by `config`.
inline ModelParams zero_params(const ModelConfig& config) {
    config.validate();
    const auto m = config.model_dim;
    ModelParams p;
    p.projection = Matrix(m, config.input_features);
    for (std::size_t l = 0; l < config.layers; ++l) {
        LayerParams<Matrix> layer;
        for (std::size_t h = 0; h < config.heads; ++h) {
            layer.heads.push_back({Matrix(m, config.key_dim), Matrix(m, config.key_dim), Matrix(m, config.value_dim)});
        }
        layer.output = Matrix(config.heads * config.value_dim, m);
        layer.ff_w1 = Matrix(m, config.ffn_dim);
        layer.ff_b1 = Matrix(1, config.ffn_dim);
        layer.ff_w2 = Matrix(config.ffn_dim, m);
        layer.ff_b2 = Matrix(1, m);
        if (config.use_residual_layernorm) {
            layer.norm_attention = NormParams<Matrix>{Matrix(1, m, 1.0), Matrix(1, m)};
            layer.norm_ffn = NormParams<Matrix>{Matrix(1, m, 1.0), Matrix(1, m)};
        }
        p.layers.push_back(std::move(layer));
    }
    p.decoder_weight = Matrix(m, 2);
    p.decoder_bias = Matrix(1, 2);
    return p;
}

/// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases, unit
/// layer-norm gains. Fully determined by `seed`.
inline ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
    ModelParams p = zero_params(config);
    std::mt19937_64 rng(seed);
    auto glorot = [&](Matrix& w) {
        const double bound = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (auto& v : w.values()) v = dist(rng);
    };
    glorot(p.projection);
    for (auto& layer : p.layers) {
        for (auto& h : layer.heads) {
            glorot(h.query);
            glorot(h.key);
            glorot(h.value);
        }
        glorot(layer.output);
        glorot(layer.ff_w1);
        glorot(layer.ff_w2);
    }
    glorot(p.decoder_weight);
    return p;
}

/// True when every tensor shape matches what `config` implies.
inline bool consistent(const ModelParams& params, const ModelConfig& config) {
    const ModelParams expected = zero_params(config);
    const auto a = tensor_list(params);
    const auto b = tensor_list(expected);
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!a[i]->same_shape(*b[i])) return false;
    return true;
}

} // namespace courage::model
