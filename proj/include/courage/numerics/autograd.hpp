#pragma once

// Define-by-run reverse-mode automatic differentiation over dense matrices.
//
// A Graph owns every node created during one forward pass. Nodes are appended in
// creation order, which is a topological order, so backward() walks the node list
// from the loss down to index 0 and visits each node exactly once.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "courage/error.hpp"
#include "courage/numerics/matrix.hpp"

namespace courage::autograd {

class Graph;

/// Handle to a node in a Graph. Cheap to copy; valid as long as the graph lives.
class Var {
public:
    Var() = default;

    [[nodiscard]] const Matrix& value() const;
    [[nodiscard]] const Matrix& grad() const;
    [[nodiscard]] std::size_t rows() const { return value().rows(); }
    [[nodiscard]] std::size_t cols() const { return value().cols(); }
    [[nodiscard]] Graph& graph() const { return *graph_; }
    [[nodiscard]] std::size_t id() const noexcept { return id_; }
    [[nodiscard]] bool valid() const noexcept { return graph_ != nullptr; }

private:
    friend class Graph;
    Var(Graph* g, std::size_t id) : graph_(g), id_(id) {}

    Graph* graph_ = nullptr;
    std::size_t id_ = 0;
};

/// Backward rule for a node: receives the graph and the node id, reads the node's
/// gradient and accumulates into its parents via Graph::accumulate.
using BackwardFn = std::function<void(Graph&, std::size_t)>;

class Graph {
public:
    Graph() = default;
    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    /// Leaf that does not receive gradients (inputs, positional encodings, targets).
    Var constant(Matrix value) { return push(std::move(value), false, {}, {}, "constant"); }

    /// Leaf whose gradient is wanted after backward().
    Var parameter(Matrix value) { return push(std::move(value), true, {}, {}, "parameter"); }

    /// Generic node constructor used by every differentiable op. `op` names the
    /// operation in non-finite diagnostics.
    Var make(Matrix value, std::vector<Var> parents, BackwardFn backward, const char* op) {
        bool needs_grad = false;
        std::vector<std::size_t> ids;
        ids.reserve(parents.size());
        for (const auto& p : parents) {
            if (p.graph_ != this) throw StateError(std::string(op) + ": operand belongs to another graph");
            needs_grad = needs_grad || nodes_[p.id_].requires_grad;
            ids.push_back(p.id_);
        }
        if (!value.all_finite()) {
            throw NumericError(std::string(op) + ": produced non-finite value");
        }
        return push(std::move(value), needs_grad, std::move(ids), needs_grad ? std::move(backward) : BackwardFn{},
                    op);
    }

    [[nodiscard]] const Matrix& value(std::size_t id) const { return nodes_.at(id).value; }
    [[nodiscard]] const Matrix& grad(std::size_t id) const { return nodes_.at(id).grad; }
    [[nodiscard]] bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }
    [[nodiscard]] const std::vector<std::size_t>& parents(std::size_t id) const { return nodes_.at(id).parents; }
    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }

    /// Adds `delta` into the gradient of node `id` (no-op for nodes that need no gradient).
    void accumulate(std::size_t id, const Matrix& delta) {
        auto& n = nodes_[id];
        if (!n.requires_grad) return;
        n.grad += delta;
    }

    /// Direct access for backward rules that write gradients in place.
    Matrix* grad_slot(std::size_t id) {
        auto& n = nodes_[id];
        return n.requires_grad ? &n.grad : nullptr;
    }

    /// Reverse pass from a 1x1 loss. Calling twice without zero_grad() is an error.
    void backward(Var loss) {
        if (loss.graph_ != this) throw StateError("backward: loss belongs to another graph");
        const auto& lv = nodes_[loss.id_].value;
        if (lv.rows() != 1 || lv.cols() != 1) {
            throw StateError("backward: loss must be 1x1, got " + lv.shape());
        }
        if (backward_done_) throw StateError("backward: already called; call zero_grad() first");
        backward_done_ = true;
        if (!nodes_[loss.id_].requires_grad) return;
        nodes_[loss.id_].grad(0, 0) = 1.0;
        for (std::size_t i = loss.id_ + 1; i-- > 0;) {
            auto& n = nodes_[i];
            if (n.backward) n.backward(*this, i);
        }
    }

    void zero_grad() {
        for (auto& n : nodes_)
            if (n.requires_grad) n.grad.fill(0.0);
        backward_done_ = false;
    }

    Var var(std::size_t id) { return Var(this, id); }

private:
    struct Node {
        Matrix value;
        Matrix grad;
        std::vector<std::size_t> parents;
        BackwardFn backward;
        bool requires_grad = false;
        const char* op = "";
    };

    Var push(Matrix value, bool requires_grad, std::vector<std::size_t> parents, BackwardFn backward,
             const char* op) {
        Node n;
        if (requires_grad) n.grad = Matrix(value.rows(), value.cols());
        n.value = std::move(value);
        n.parents = std::move(parents);
        n.backward = std::move(backward);
        n.requires_grad = requires_grad;
        n.op = op;
        nodes_.push_back(std::move(n));
        return Var(this, nodes_.size() - 1);
    }

    std::vector<Node> nodes_;
    bool backward_done_ = false;
};

inline const Matrix& Var::value() const { return graph_->value(id_); }
inline const Matrix& Var::grad() const { return graph_->grad(id_); }

// ---------------------------------------------------------------------------
// Differentiable operations
// ---------------------------------------------------------------------------

inline Var matmul(Var a, Var b) {
    auto& g = a.graph();
    Matrix out = courage::matmul(a.value(), b.value());
    const auto ia = a.id(), ib = b.id();
    return g.make(std::move(out), {a, b},
                  [ia, ib](Graph& gr, std::size_t self) {
                      const Matrix& dc = gr.grad(self);
                      if (auto* da = gr.grad_slot(ia)) matmul_nt_accumulate(dc, gr.value(ib), *da);
                      if (auto* db = gr.grad_slot(ib)) matmul_tn_accumulate(gr.value(ia), dc, *db);
                  },
                  "matmul");
}

inline Var add(Var a, Var b) {
    auto& g = a.graph();
    Matrix out = a.value() + b.value();
    const auto ia = a.id(), ib = b.id();
    return g.make(std::move(out), {a, b},
                  [ia, ib](Graph& gr, std::size_t self) {
                      gr.accumulate(ia, gr.grad(self));
                      gr.accumulate(ib, gr.grad(self));
                  },
                  "add");
}

/// Elementwise product.
inline Var hadamard(Var a, Var b) {
    detail::require_same_shape(a.value(), b.value(), "hadamard");
    auto& g = a.graph();
    Matrix out = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
    const auto ia = a.id(), ib = b.id();
    return g.make(std::move(out), {a, b},
                  [ia, ib](Graph& gr, std::size_t self) {
                      const Matrix& d = gr.grad(self);
                      if (auto* da = gr.grad_slot(ia))
                          for (std::size_t i = 0; i < d.size(); ++i) (*da)[i] += d[i] * gr.value(ib)[i];
                      if (auto* db = gr.grad_slot(ib))
                          for (std::size_t i = 0; i < d.size(); ++i) (*db)[i] += d[i] * gr.value(ia)[i];
                  },
                  "hadamard");
}

inline Var scale(Var a, double s) {
    auto& g = a.graph();
    const auto ia = a.id();
    return g.make(s * a.value(), {a},
                  [ia, s](Graph& gr, std::size_t self) {
                      if (auto* da = gr.grad_slot(ia)) {
                          const Matrix& d = gr.grad(self);
                          for (std::size_t i = 0; i < d.size(); ++i) (*da)[i] += s * d[i];
                      }
                  },
                  "scale");
}

inline Var transpose(Var a) {
    auto& g = a.graph();
    const auto ia = a.id();
    return g.make(courage::transpose(a.value()), {a},
                  [ia](Graph& gr, std::size_t self) {
                      if (auto* da = gr.grad_slot(ia)) *da += courage::transpose(gr.grad(self));
                  },
                  "transpose");
}

/// Horizontal concatenation; all parts must have the same row count.
inline Var concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw DimensionError("concat_cols: no operands");
    auto& g = parts.front().graph();
    const std::size_t rows = parts.front().rows();
    std::size_t cols = 0;
    for (const auto& p : parts) {
        if (p.rows() != rows) {
            throw DimensionError("concat_cols: row mismatch " + parts.front().value().shape() + " vs " +
                                 p.value().shape());
        }
        cols += p.cols();
    }
    Matrix out(rows, cols);
    std::vector<std::size_t> ids, offsets;
    std::size_t off = 0;
    for (const auto& p : parts) {
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < p.cols(); ++c) out(r, off + c) = p.value()(r, c);
        ids.push_back(p.id());
        offsets.push_back(off);
        off += p.cols();
    }
    return g.make(std::move(out), parts,
                  [ids, offsets](Graph& gr, std::size_t self) {
                      const Matrix& d = gr.grad(self);
                      for (std::size_t k = 0; k < ids.size(); ++k) {
                          auto* dp = gr.grad_slot(ids[k]);
                          if (!dp) continue;
                          for (std::size_t r = 0; r < dp->rows(); ++r)
                              for (std::size_t c = 0; c < dp->cols(); ++c) (*dp)(r, c) += d(r, offsets[k] + c);
                      }
                  },
                  "concat_cols");
}

/// Extracts row `r` as a 1 x cols node.
inline Var row_select(Var a, std::size_t r) {
    if (r >= a.rows()) {
        throw DimensionError("row_select: row " + std::to_string(r) + " out of range for " + a.value().shape());
    }
    auto& g = a.graph();
    Matrix out(1, a.cols());
    for (std::size_t c = 0; c < a.cols(); ++c) out(0, c) = a.value()(r, c);
    const auto ia = a.id();
    return g.make(std::move(out), {a},
                  [ia, r](Graph& gr, std::size_t self) {
                      if (auto* da = gr.grad_slot(ia)) {
                          const Matrix& d = gr.grad(self);
                          for (std::size_t c = 0; c < d.cols(); ++c) (*da)(r, c) += d(0, c);
                      }
                  },
                  "row_select");
}

/// Column means as a 1 x cols node.
inline Var mean_rows(Var a) {
    auto& g = a.graph();
    const auto n = static_cast<double>(a.rows());
    Matrix out(1, a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) out(0, c) += a.value()(r, c);
    for (auto& v : out.values()) v /= n;
    const auto ia = a.id();
    return g.make(std::move(out), {a},
                  [ia, n](Graph& gr, std::size_t self) {
                      if (auto* da = gr.grad_slot(ia)) {
                          const Matrix& d = gr.grad(self);
                          for (std::size_t r = 0; r < da->rows(); ++r)
                              for (std::size_t c = 0; c < da->cols(); ++c) (*da)(r, c) += d(0, c) / n;
                      }
                  },
                  "mean_rows");
}

/// Adds a 1 x cols bias to every row of `a`.
inline Var broadcast_add_bias(Var a, Var bias) {
    if (bias.rows() != 1 || bias.cols() != a.cols()) {
        throw DimensionError("broadcast_add_bias: bias " + bias.value().shape() + " does not fit " +
                             a.value().shape());
    }
    auto& g = a.graph();
    Matrix out = a.value();
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += bias.value()(0, c);
    const auto ia = a.id(), ib = bias.id();
    return g.make(std::move(out), {a, bias},
                  [ia, ib](Graph& gr, std::size_t self) {
                      const Matrix& d = gr.grad(self);
                      gr.accumulate(ia, d);
                      if (auto* db = gr.grad_slot(ib))
                          for (std::size_t r = 0; r < d.rows(); ++r)
                              for (std::size_t c = 0; c < d.cols(); ++c) (*db)(0, c) += d(r, c);
                  },
                  "broadcast_add_bias");
}

/// Row-wise softmax with per-row max subtraction.
inline Var softmax_rows(Var a) {
    if (a.value().empty()) throw DimensionError("softmax_rows: empty input");
    auto& g = a.graph();
    Matrix out = a.value();
    for (std::size_t r = 0; r < out.rows(); ++r) {
        auto row = out.row(r);
        double mx = -std::numeric_limits<double>::infinity();
        for (double v : row) mx = std::max(mx, v);
        double sum = 0.0;
        for (double& v : row) {
            v = std::exp(v - mx);
            sum += v;
        }
        for (double& v : row) v /= sum;
    }
    const auto ia = a.id();
    return g.make(std::move(out), {a},
                  [ia](Graph& gr, std::size_t self) {
                      auto* da = gr.grad_slot(ia);
                      if (!da) return;
                      const Matrix& y = gr.value(self);
                      const Matrix& d = gr.grad(self);
                      for (std::size_t r = 0; r < y.rows(); ++r) {
                          double dot = 0.0;
                          for (std::size_t c = 0; c < y.cols(); ++c) dot += d(r, c) * y(r, c);
                          for (std::size_t c = 0; c < y.cols(); ++c) (*da)(r, c) += y(r, c) * (d(r, c) - dot);
                      }
                  },
                  "softmax_rows");
}

inline Var relu(Var a) {
    auto& g = a.graph();
    Matrix out = a.value();
    for (auto& v : out.values()) v = v > 0.0 ? v : 0.0;
    const auto ia = a.id();
    return g.make(std::move(out), {a},
                  [ia](Graph& gr, std::size_t self) {
                      if (auto* da = gr.grad_slot(ia)) {
                          const Matrix& x = gr.value(ia);
                          const Matrix& d = gr.grad(self);
                          for (std::size_t i = 0; i < d.size(); ++i)
                              if (x[i] > 0.0) (*da)[i] += d[i];
                      }
                  },
                  "relu");
}

/// Row-wise layer normalisation: gain * (x - mean) / sqrt(var + eps) + bias,
/// gain and bias are 1 x cols.
inline Var layer_norm_rows(Var a, Var gain, Var bias, double eps = 1e-5) {
    const std::size_t n = a.cols();
    if (gain.rows() != 1 || gain.cols() != n || bias.rows() != 1 || bias.cols() != n) {
        throw DimensionError("layer_norm_rows: gain/bias " + gain.value().shape() + "/" + bias.value().shape() +
                             " do not fit " + a.value().shape());
    }
    auto& g = a.graph();
    const Matrix& x = a.value();
    Matrix xhat(x.rows(), n);
    std::vector<double> inv_std(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        double mean = 0.0;
        for (double v : x.row(r)) mean += v;
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (double v : x.row(r)) var += (v - mean) * (v - mean);
        var /= static_cast<double>(n);
        inv_std[r] = 1.0 / std::sqrt(var + eps);
        for (std::size_t c = 0; c < n; ++c) xhat(r, c) = (x(r, c) - mean) * inv_std[r];
    }
    Matrix out(x.rows(), n);
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < n; ++c) out(r, c) = gain.value()(0, c) * xhat(r, c) + bias.value()(0, c);
    const auto ia = a.id(), ig = gain.id(), ib = bias.id();
    return g.make(std::move(out), {a, gain, bias},
                  [ia, ig, ib, xhat = std::move(xhat), inv_std = std::move(inv_std)](Graph& gr, std::size_t self) {
                      const Matrix& d = gr.grad(self);
                      const Matrix& gv = gr.value(ig);
                      const std::size_t cols = d.cols();
                      const double inv_n = 1.0 / static_cast<double>(cols);
                      if (auto* dg = gr.grad_slot(ig))
                          for (std::size_t r = 0; r < d.rows(); ++r)
                              for (std::size_t c = 0; c < cols; ++c) (*dg)(0, c) += d(r, c) * xhat(r, c);
                      if (auto* db = gr.grad_slot(ib))
                          for (std::size_t r = 0; r < d.rows(); ++r)
                              for (std::size_t c = 0; c < cols; ++c) (*db)(0, c) += d(r, c);
                      if (auto* da = gr.grad_slot(ia)) {
                          for (std::size_t r = 0; r < d.rows(); ++r) {
                              double mean_dx = 0.0, mean_dx_xhat = 0.0;
                              for (std::size_t c = 0; c < cols; ++c) {
                                  const double dxh = d(r, c) * gv(0, c);
                                  mean_dx += dxh;
                                  mean_dx_xhat += dxh * xhat(r, c);
                              }
                              mean_dx *= inv_n;
                              mean_dx_xhat *= inv_n;
                              for (std::size_t c = 0; c < cols; ++c) {
                                  const double dxh = d(r, c) * gv(0, c);
                                  (*da)(r, c) += inv_std[r] * (dxh - mean_dx - xhat(r, c) * mean_dx_xhat);
                              }
                          }
                      }
                  },
                  "layer_norm_rows");
}

/// Sum of all entries as a 1x1 node.
inline Var sum(Var a) {
    auto& g = a.graph();
    double s = 0.0;
    for (double v : a.value().values()) s += v;
    const auto ia = a.id();
    return g.make(Matrix(1, 1, s), {a},
                  [ia](Graph& gr, std::size_t self) {
                      if (auto* da = gr.grad_slot(ia)) {
                          const double d = gr.grad(self)(0, 0);
                          for (auto& v : da->values()) v += d;
                      }
                  },
                  "sum");
}

} // namespace courage::autograd
