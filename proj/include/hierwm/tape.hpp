#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "hierwm/tensor.hpp"

namespace hierwm {

// Reverse-mode autodiff tape over whole tensors. Each op records a value and
// a VJP closure; backward() walks the tape in reverse creation order, which
// is a valid topological order because ops only consume earlier refs.
//
// With grad_enabled = false the tape is a plain expression evaluator: no
// closures are stored, and ops may take cheap inference-only shortcuts that
// are numerically identical (e.g. skipping a multiply by an exactly-zero
// gate). All accumulation inside ops is fixed-order, so taped evaluation is
// deterministic under any thread count.
class Tape {
public:
    using Ref = int;
    static constexpr Ref kNone = -1;

    explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

    bool grad_enabled() const { return grad_enabled_; }

    Ref input(Tensor v);  // constant leaf, no gradient
    Ref param(Tensor v);  // differentiable leaf

    const Tensor& val(Ref r) const { return node(r).value; }
    // Valid after backward(); zero tensor if the node did not receive any
    // gradient contribution.
    const Tensor& grad(Ref r) const;

    Ref add(Ref a, Ref b);
    Ref sub(Ref a, Ref b);
    Ref scale(Ref a, double s);
    Ref add_scaled(Ref a, Ref b, double s);  // a + s*b
    // h + g*x with a one-element gate tensor g. When gradients are off and
    // the gate is exactly zero the input passes through bitwise.
    Ref add_gated(Ref h, Ref x, Ref g);
    // x flattened to [rows, in] times w [in, out] plus optional bias [out].
    Ref linear(Ref x, Ref w, Ref b = kNone);
    // Adds v [c] to every row of x [rows, c].
    Ref add_row_broadcast(Ref x, Ref v);
    Ref layer_norm(Ref x, Ref gamma, Ref beta, double eps = 1e-5);
    Ref gelu(Ref x);
    // Full bidirectional multi-head self-attention over x [n, d].
    // Weights are [d, d], biases [d].
    Ref attention(Ref x, Ref wq, Ref bq, Ref wk, Ref bk, Ref wv, Ref bv, Ref wo, Ref bo,
                  int num_heads);
    // out[i] = in[index[i]]; index must be a bijection (pure reindexing).
    Ref permute(Ref x, std::vector<std::int64_t> index, std::vector<int> out_shape);
    // Radial frequency high-pass over trailing [h, w, c] planes (self-adjoint).
    Ref highpass(Ref x, int h, int w, int c, double rho);
    Ref mse(Ref a, Ref b);       // scalar: mean((a-b)^2)
    Ref sum_squares(Ref a);      // scalar: sum(a^2)

    void backward(Ref root);

    size_t num_nodes() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;  // empty until first accumulation
        bool needs_grad = false;
        std::function<void(Tape&)> vjp;  // set only when needs_grad && grad_enabled
    };

    Node& node(Ref r) { return nodes_.at(static_cast<size_t>(r)); }
    const Node& node(Ref r) const { return nodes_.at(static_cast<size_t>(r)); }

    Ref push(Tensor value, bool needs_grad, std::function<void(Tape&)> vjp);
    bool wants_grad(std::initializer_list<Ref> inputs) const;
    void accum(Ref r, const double* g, std::int64_t n);

    std::vector<Node> nodes_;
    bool grad_enabled_;
    Tensor zero_;  // returned by grad() for untouched nodes
};

}  // namespace hierwm
