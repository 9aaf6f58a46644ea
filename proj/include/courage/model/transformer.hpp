#pragma once

// Encoder-decoder regressor: a day-wise linear projection plus sinusoidal
// positional encoding, multi-head self-attention without a causal mask, a
// position-wise feed-forward network, and a linear decoder that maps the pooled
// representation to the two weekly totals.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "courage/error.hpp"
#include "courage/model/config.hpp"
#include "courage/model/params.hpp"
#include "courage/numerics/autograd.hpp"

namespace courage::model {

using autograd::Graph;
using autograd::Var;

/// L x M sinusoidal encoding: (j, 2i) = sin(j / 10000^(2i/M)), (j, 2i+1) = cos(...).
inline Matrix positional_encoding(std::size_t length, std::size_t dim) {
    if (dim % 2 != 0) throw ConfigError("positional_encoding: model dimension must be even, got " + std::to_string(dim));
    Matrix z(length, dim);
    for (std::size_t j = 0; j < length; ++j) {
        for (std::size_t i = 0; i < dim / 2; ++i) {
            const double angle =
                static_cast<double>(j) / std::pow(10000.0, static_cast<double>(2 * i) / static_cast<double>(dim));
            z(j, 2 * i) = std::sin(angle);
            z(j, 2 * i + 1) = std::cos(angle);
        }
    }
    return z;
}

/// X = (U E + Z)^T where E is the K x L feature matrix. Rows of the result are
/// embedded days.
inline Var embed(Graph& g, const Matrix& features, const ParamVars& params, const Matrix& positions) {
    const Matrix& u = params.projection.value();
    if (features.rows() != u.cols()) {
        throw DimensionError("embed: window has " + std::to_string(features.rows()) + " features but projection is " +
                             u.shape());
    }
    if (positions.rows() != features.cols() || positions.cols() != u.rows()) {
        throw DimensionError("embed: positional encoding " + positions.shape() + " does not fit window " +
                             features.shape());
    }
    Var e = g.constant(features);
    Var projected = autograd::transpose(autograd::matmul(params.projection, e));
    return autograd::add(projected, g.constant(positions));
}

/// Softmax(Q K^T / sqrt(M_K)) for one head, L x L. Rows are convex weights over days.
inline Var attention_weights(Var x, const HeadParams<Var>& head) {
    Var q = autograd::matmul(x, head.query);
    Var k = autograd::matmul(x, head.key);
    const double scale = 1.0 / std::sqrt(static_cast<double>(head.key.cols()));
    Var scores = autograd::scale(autograd::matmul(q, autograd::transpose(k)), scale);
    return autograd::softmax_rows(scores);
}

/// One attention head, L x M_V. No mask: every day attends to every other day.
inline Var self_attention_head(Var x, const HeadParams<Var>& head) {
    Var v = autograd::matmul(x, head.value);
    return autograd::matmul(attention_weights(x, head), v);
}

/// [S_1, ..., S_H] W^O, L x M.
inline Var multi_head(Var x, const LayerParams<Var>& layer) {
    if (layer.heads.empty()) throw ConfigError("multi_head: need at least one head");
    std::vector<Var> outs;
    outs.reserve(layer.heads.size());
    for (const auto& h : layer.heads) outs.push_back(self_attention_head(x, h));
    Var cat = outs.size() == 1 ? outs.front() : autograd::concat_cols(outs);
    return autograd::matmul(cat, layer.output);
}

/// ReLU(S W1 + b1) W2 + b2, applied to each row independently.
inline Var feed_forward(Var s, const LayerParams<Var>& layer) {
    Var hidden = autograd::relu(autograd::broadcast_add_bias(autograd::matmul(s, layer.ff_w1), layer.ff_b1));
    return autograd::broadcast_add_bias(autograd::matmul(hidden, layer.ff_w2), layer.ff_b2);
}

/// One encoder block. With residual/layer-norm enabled this is the post-norm
/// block LN(x + MHA(x)) followed by LN(a + FFN(a)); otherwise FFN(MHA(x)).
inline Var encoder_layer(Var x, const LayerParams<Var>& layer) {
    if (layer.norm_attention && layer.norm_ffn) {
        Var a = autograd::layer_norm_rows(autograd::add(x, multi_head(x, layer)), layer.norm_attention->gain,
                                          layer.norm_attention->bias);
        return autograd::layer_norm_rows(autograd::add(a, feed_forward(a, layer)), layer.norm_ffn->gain,
                                         layer.norm_ffn->bias);
    }
    return feed_forward(multi_head(x, layer), layer);
}

namespace detail {

template <class F>
Var named_stage(const char* stage, F&& f) {
    try {
        return f();
    } catch (const NumericError& e) {
        throw NumericError(std::string(stage) + ": " + e.what());
    }
}

} // namespace detail

/// Builds the full forward pass into `g` and returns the 1 x 2 prediction node
/// (standardized target space).
inline Var forward_graph(Graph& g, const Matrix& features, const ParamVars& params, const ModelConfig& config) {
    if (features.rows() != config.input_features || features.cols() != config.window_days) {
        throw DimensionError("forward: window " + features.shape() + " does not match config " +
                             Matrix::shape_string(config.input_features, config.window_days));
    }
    const Matrix positions = positional_encoding(config.window_days, config.model_dim);
    Var h = detail::named_stage("embed", [&] { return embed(g, features, params, positions); });
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const std::string stage = "encoder layer " + std::to_string(l);
        h = detail::named_stage(stage.c_str(), [&] { return encoder_layer(h, params.layers[l]); });
    }
    Var pooled = config.pooling == Pooling::LastRow ? autograd::row_select(h, h.rows() - 1) : autograd::mean_rows(h);
    return detail::named_stage("decoder", [&] {
        return autograd::broadcast_add_bias(autograd::matmul(pooled, params.decoder_weight), params.decoder_bias);
    });
}

struct Prediction {
    double week1 = 0.0;
    double week2 = 0.0;
    friend bool operator==(const Prediction&, const Prediction&) = default;
};

/// Inference on one K x L window.
inline Prediction forward(const Matrix& features, const ModelParams& params, const ModelConfig& config) {
    Graph g;
    const ParamVars vars = map_tree(params, [&](const Matrix& m) { return g.constant(m); });
    Var out = forward_graph(g, features, vars, config);
    return {out.value()(0, 0), out.value()(0, 1)};
}

} // namespace courage::model
