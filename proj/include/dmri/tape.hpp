#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "dmri/linalg.hpp"
#include "dmri/tensor.hpp"

namespace dmri::num {

using NodeId = std::int32_t;

// Reverse-mode autodiff over RealTensor. Append-only: operation inputs always
// precede the operation on the tape, so a single reverse sweep visits every
// node exactly once. Complex data lives as (re, im) column pairs; the only
// place Wirtinger bookkeeping happens is inside the tikhonov node, which
// round-trips through solve_tikhonov / solve_tikhonov_grad.
//
// backward() may be called once per tape. Unless retain_buffers is set,
// interior values and grads are released as the sweep passes them to keep the
// peak footprint near the largest live layer instead of the whole graph.
class Tape {
  public:
    explicit Tape(bool retain_buffers = false) : retain_buffers_(retain_buffers) {}

    NodeId leaf(RealTensor value, bool requires_grad = false);

    NodeId matmul(NodeId a, NodeId b);
    // x*w + row-broadcast bias; bias is 1-D of length cols(w).
    NodeId linear(NodeId x, NodeId w, NodeId bias);
    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);
    NodeId mul_const(NodeId a, RealTensor c);
    NodeId scale(NodeId a, double c);
    // sin(w0 * x); backward recomputes cos from the stored input.
    NodeId sin_scaled(NodeId a, double w0);
    // sqrt(x^2 + eps^2) - eps: smooth |x| that is exactly 0 at 0.
    NodeId abs_smooth(NodeId a, double eps);
    // [m, 2c] pairs -> [m, c] smooth complex magnitude, same shift as abs_smooth.
    NodeId complex_abs_smooth(NodeId a, double eps);
    NodeId sum_all(NodeId a);
    // out[k] = in[idx[k]] on flat indices; backward scatter-adds.
    NodeId gather(NodeId a, std::vector<std::size_t> idx, std::vector<std::size_t> out_shape);
    // W = tikhonov solve of (P, T) given as (re, im)-paired tensors.
    // grad_through_p = false stops gradient flow into P.
    NodeId tikhonov(NodeId p, NodeId t, double alpha, bool grad_through_p = true);

    void backward(NodeId root);
    void backward_seeded(NodeId root, const RealTensor& seed);

    const RealTensor& value(NodeId id) const { return nodes_[static_cast<std::size_t>(id)].value; }
    double scalar_value(NodeId id) const;
    // Gradient of a leaf after backward. Zero tensor if no gradient reached it.
    RealTensor take_grad(NodeId id);
    const RealTensor& grad(NodeId id) const { return nodes_[static_cast<std::size_t>(id)].grad; }

    std::size_t node_count() const { return nodes_.size(); }

  private:
    enum class Op : std::uint8_t {
        Leaf,
        MatMul,
        Linear,
        Add,
        Sub,
        Mul,
        MulConst,
        Scale,
        SinScaled,
        AbsSmooth,
        ComplexAbsSmooth,
        SumAll,
        Gather,
        Tikhonov,
    };

    struct Node {
        Op op = Op::Leaf;
        NodeId in[3] = {-1, -1, -1};
        RealTensor value;
        RealTensor grad;
        double scalar = 0.0;
        std::shared_ptr<void> payload;
        bool requires_grad = false;
    };

    NodeId push(Node n);
    Node& at(NodeId id) { return nodes_[static_cast<std::size_t>(id)]; }
    const Node& at(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }
    bool needs_grad(NodeId id) const { return at(id).requires_grad; }
    RealTensor& grad_buffer(NodeId id);
    void step_backward(Node& node);

    std::vector<Node> nodes_;
    bool retain_buffers_ = false;
    bool backward_done_ = false;
};

}  // namespace dmri::num
