#include "dmri/tape.hpp"

#include <cmath>

namespace dmri::num {

namespace {

struct GatherPayload {
    std::vector<std::size_t> idx;
};

struct MulConstPayload {
    RealTensor c;
};

struct TikhonovPayload {
    TikhonovFactorization fac;
    bool grad_p = true;
};

}  // namespace

NodeId Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::leaf(RealTensor value, bool requires_grad) {
    Node n;
    n.op = Op::Leaf;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    return push(std::move(n));
}

NodeId Tape::matmul(NodeId a, NodeId b) {
    Node n;
    n.op = Op::MatMul;
    n.in[0] = a;
    n.in[1] = b;
    n.value = num::matmul(at(a).value, at(b).value);
    n.requires_grad = needs_grad(a) || needs_grad(b);
    return push(std::move(n));
}

NodeId Tape::linear(NodeId x, NodeId w, NodeId bias) {
    const RealTensor& xv = at(x).value;
    const RealTensor& wv = at(w).value;
    const RealTensor& bv = at(bias).value;
    if (!xv.is_matrix() || !wv.is_matrix() || xv.cols() != wv.rows())
        throw ShapeMismatch("linear: incompatible x/w shapes");
    if (bv.size() != wv.cols()) throw ShapeMismatch("linear: bias length != output width");
    Node n;
    n.op = Op::Linear;
    n.in[0] = x;
    n.in[1] = w;
    n.in[2] = bias;
    n.value = RealTensor({xv.rows(), wv.cols()});
    n.value.mat().noalias() = xv.mat() * wv.mat();
    n.value.mat().rowwise() +=
        Eigen::Map<const Eigen::RowVectorXd>(bv.data.data(), static_cast<Eigen::Index>(bv.size()));
    n.requires_grad = needs_grad(x) || needs_grad(w) || needs_grad(bias);
    return push(std::move(n));
}

NodeId Tape::add(NodeId a, NodeId b) {
    const RealTensor& av = at(a).value;
    const RealTensor& bv = at(b).value;
    if (!av.same_shape(bv)) throw ShapeMismatch("add: operand shapes differ");
    Node n;
    n.op = Op::Add;
    n.in[0] = a;
    n.in[1] = b;
    n.value = av;
    for (std::size_t i = 0; i < n.value.size(); ++i) n.value.data[i] += bv.data[i];
    n.requires_grad = needs_grad(a) || needs_grad(b);
    return push(std::move(n));
}

NodeId Tape::sub(NodeId a, NodeId b) {
    const RealTensor& av = at(a).value;
    const RealTensor& bv = at(b).value;
    if (!av.same_shape(bv)) throw ShapeMismatch("sub: operand shapes differ");
    Node n;
    n.op = Op::Sub;
    n.in[0] = a;
    n.in[1] = b;
    n.value = av;
    for (std::size_t i = 0; i < n.value.size(); ++i) n.value.data[i] -= bv.data[i];
    n.requires_grad = needs_grad(a) || needs_grad(b);
    return push(std::move(n));
}

NodeId Tape::mul(NodeId a, NodeId b) {
    const RealTensor& av = at(a).value;
    const RealTensor& bv = at(b).value;
    if (!av.same_shape(bv)) throw ShapeMismatch("mul: operand shapes differ");
    Node n;
    n.op = Op::Mul;
    n.in[0] = a;
    n.in[1] = b;
    n.value = av;
    for (std::size_t i = 0; i < n.value.size(); ++i) n.value.data[i] *= bv.data[i];
    n.requires_grad = needs_grad(a) || needs_grad(b);
    return push(std::move(n));
}

NodeId Tape::mul_const(NodeId a, RealTensor c) {
    const RealTensor& av = at(a).value;
    if (!av.same_shape(c)) throw ShapeMismatch("mul_const: constant shape differs");
    Node n;
    n.op = Op::MulConst;
    n.in[0] = a;
    n.value = av;
    for (std::size_t i = 0; i < n.value.size(); ++i) n.value.data[i] *= c.data[i];
    n.payload = std::make_shared<MulConstPayload>(MulConstPayload{std::move(c)});
    n.requires_grad = needs_grad(a);
    return push(std::move(n));
}

NodeId Tape::scale(NodeId a, double c) {
    Node n;
    n.op = Op::Scale;
    n.in[0] = a;
    n.scalar = c;
    n.value = at(a).value;
    for (double& v : n.value.data) v *= c;
    n.requires_grad = needs_grad(a);
    return push(std::move(n));
}

NodeId Tape::sin_scaled(NodeId a, double w0) {
    Node n;
    n.op = Op::SinScaled;
    n.in[0] = a;
    n.scalar = w0;
    n.value = at(a).value;
    for (double& v : n.value.data) v = std::sin(w0 * v);
    n.requires_grad = needs_grad(a);
    return push(std::move(n));
}

NodeId Tape::abs_smooth(NodeId a, double eps) {
    Node n;
    n.op = Op::AbsSmooth;
    n.in[0] = a;
    n.scalar = eps;
    n.value = at(a).value;
    for (double& v : n.value.data) v = std::sqrt(v * v + eps * eps) - eps;
    n.requires_grad = needs_grad(a);
    return push(std::move(n));
}

NodeId Tape::complex_abs_smooth(NodeId a, double eps) {
    const RealTensor& av = at(a).value;
    if (!av.is_matrix() || av.cols() % 2 != 0)
        throw ShapeMismatch("complex_abs_smooth: need [m, 2c] tensor");
    Node n;
    n.op = Op::ComplexAbsSmooth;
    n.in[0] = a;
    n.scalar = eps;
    n.value = RealTensor({av.rows(), av.cols() / 2});
    const std::size_t c = n.value.cols();
    for (std::size_t r = 0; r < av.rows(); ++r)
        for (std::size_t j = 0; j < c; ++j) {
            const double re = av.at(r, 2 * j);
            const double im = av.at(r, 2 * j + 1);
            n.value.at(r, j) = std::sqrt(re * re + im * im + eps * eps) - eps;
        }
    n.requires_grad = needs_grad(a);
    return push(std::move(n));
}

NodeId Tape::sum_all(NodeId a) {
    Node n;
    n.op = Op::SumAll;
    n.in[0] = a;
    n.value = RealTensor({std::size_t{1}});
    double s = 0.0;
    for (double v : at(a).value.data) s += v;
    n.value.data[0] = s;
    n.requires_grad = needs_grad(a);
    return push(std::move(n));
}

NodeId Tape::gather(NodeId a, std::vector<std::size_t> idx, std::vector<std::size_t> out_shape) {
    if (RealTensor::count(out_shape) != idx.size())
        throw ShapeMismatch("gather: index count != output size");
    const RealTensor& av = at(a).value;
    Node n;
    n.op = Op::Gather;
    n.in[0] = a;
    n.value = RealTensor(std::move(out_shape));
    for (std::size_t k = 0; k < idx.size(); ++k) {
        if (idx[k] >= av.size()) throw ShapeMismatch("gather: index out of range");
        n.value.data[k] = av.data[idx[k]];
    }
    n.payload = std::make_shared<GatherPayload>(GatherPayload{std::move(idx)});
    n.requires_grad = needs_grad(a);
    return push(std::move(n));
}

NodeId Tape::tikhonov(NodeId p, NodeId t, double alpha, bool grad_through_p) {
    const ComplexMatrix pc = pairs_to_complex(at(p).value);
    const ComplexMatrix tc = pairs_to_complex(at(t).value);
    auto payload = std::make_shared<TikhonovPayload>();
    payload->fac = solve_tikhonov_factored(pc, tc, alpha);
    payload->grad_p = grad_through_p;
    Node n;
    n.op = Op::Tikhonov;
    n.in[0] = p;
    n.in[1] = t;
    n.scalar = alpha;
    n.value = complex_to_pairs(payload->fac.w);
    n.payload = std::move(payload);
    n.requires_grad = (needs_grad(p) && grad_through_p) || needs_grad(t);
    return push(std::move(n));
}

double Tape::scalar_value(NodeId id) const {
    const RealTensor& v = at(id).value;
    if (v.size() != 1) throw ShapeMismatch("scalar_value: node is not scalar");
    return v.data[0];
}

RealTensor& Tape::grad_buffer(NodeId id) {
    Node& n = at(id);
    if (n.grad.empty()) n.grad = RealTensor(n.value.shape);
    return n.grad;
}

RealTensor Tape::take_grad(NodeId id) {
    Node& n = at(id);
    if (n.grad.empty()) return RealTensor(n.value.shape);
    return std::move(n.grad);
}

void Tape::backward(NodeId root) {
    RealTensor seed({std::size_t{1}});
    if (at(root).value.size() != 1)
        throw ShapeMismatch("backward: root must be scalar (use backward_seeded)");
    seed.data[0] = 1.0;
    backward_seeded(root, seed);
}

void Tape::backward_seeded(NodeId root, const RealTensor& seed) {
    if (backward_done_ && !retain_buffers_)
        throw Error("backward: tape already swept (buffers were released)");
    if (backward_done_) {
        // Repeat sweep: start from clean gradient buffers.
        for (Node& n : nodes_) n.grad = RealTensor();
    }
    backward_done_ = true;
    if (!seed.same_shape(at(root).value))
        throw ShapeMismatch("backward_seeded: seed shape != root value shape");
    grad_buffer(root) = seed;
    for (NodeId id = root; id >= 0; --id) {
        Node& n = at(id);
        if (!n.grad.empty() && n.requires_grad && n.op != Op::Leaf) step_backward(n);
        if (!retain_buffers_ && n.op != Op::Leaf) {
            n.grad = RealTensor();
            if (id != root) n.value = RealTensor();
        }
    }
}

void Tape::step_backward(Node& node) {
    const RealTensor& g = node.grad;
    switch (node.op) {
        case Op::Leaf:
            break;
        case Op::MatMul: {
            const Node& a = at(node.in[0]);
            const Node& b = at(node.in[1]);
            if (a.requires_grad)
                grad_buffer(node.in[0]).mat().noalias() += g.mat() * b.value.mat().transpose();
            if (b.requires_grad)
                grad_buffer(node.in[1]).mat().noalias() += a.value.mat().transpose() * g.mat();
            break;
        }
        case Op::Linear: {
            const Node& x = at(node.in[0]);
            const Node& w = at(node.in[1]);
            const Node& bias = at(node.in[2]);
            if (x.requires_grad)
                grad_buffer(node.in[0]).mat().noalias() += g.mat() * w.value.mat().transpose();
            if (w.requires_grad)
                grad_buffer(node.in[1]).mat().noalias() += x.value.mat().transpose() * g.mat();
            if (bias.requires_grad) {
                RealTensor& gb = grad_buffer(node.in[2]);
                Eigen::Map<Eigen::RowVectorXd>(gb.data.data(),
                                               static_cast<Eigen::Index>(gb.size())) +=
                    g.mat().colwise().sum();
            }
            break;
        }
        case Op::Add: {
            for (int k = 0; k < 2; ++k)
                if (at(node.in[k]).requires_grad) {
                    RealTensor& gi = grad_buffer(node.in[k]);
                    for (std::size_t i = 0; i < g.size(); ++i) gi.data[i] += g.data[i];
                }
            break;
        }
        case Op::Sub: {
            if (at(node.in[0]).requires_grad) {
                RealTensor& gi = grad_buffer(node.in[0]);
                for (std::size_t i = 0; i < g.size(); ++i) gi.data[i] += g.data[i];
            }
            if (at(node.in[1]).requires_grad) {
                RealTensor& gi = grad_buffer(node.in[1]);
                for (std::size_t i = 0; i < g.size(); ++i) gi.data[i] -= g.data[i];
            }
            break;
        }
        case Op::Mul: {
            const Node& a = at(node.in[0]);
            const Node& b = at(node.in[1]);
            if (a.requires_grad) {
                RealTensor& gi = grad_buffer(node.in[0]);
                for (std::size_t i = 0; i < g.size(); ++i)
                    gi.data[i] += g.data[i] * b.value.data[i];
            }
            if (b.requires_grad) {
                RealTensor& gi = grad_buffer(node.in[1]);
                for (std::size_t i = 0; i < g.size(); ++i)
                    gi.data[i] += g.data[i] * a.value.data[i];
            }
            break;
        }
        case Op::MulConst: {
            if (!at(node.in[0]).requires_grad) break;
            const auto& c = static_cast<const MulConstPayload*>(node.payload.get())->c;
            RealTensor& gi = grad_buffer(node.in[0]);
            for (std::size_t i = 0; i < g.size(); ++i) gi.data[i] += g.data[i] * c.data[i];
            break;
        }
        case Op::Scale: {
            if (!at(node.in[0]).requires_grad) break;
            RealTensor& gi = grad_buffer(node.in[0]);
            for (std::size_t i = 0; i < g.size(); ++i) gi.data[i] += g.data[i] * node.scalar;
            break;
        }
        case Op::SinScaled: {
            if (!at(node.in[0]).requires_grad) break;
            const RealTensor& xv = at(node.in[0]).value;
            RealTensor& gi = grad_buffer(node.in[0]);
            const double w0 = node.scalar;
            for (std::size_t i = 0; i < g.size(); ++i)
                gi.data[i] += g.data[i] * w0 * std::cos(w0 * xv.data[i]);
            break;
        }
        case Op::AbsSmooth: {
            if (!at(node.in[0]).requires_grad) break;
            const RealTensor& xv = at(node.in[0]).value;
            RealTensor& gi = grad_buffer(node.in[0]);
            const double eps = node.scalar;
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double x = xv.data[i];
                gi.data[i] += g.data[i] * x / std::sqrt(x * x + eps * eps);
            }
            break;
        }
        case Op::ComplexAbsSmooth: {
            if (!at(node.in[0]).requires_grad) break;
            const RealTensor& xv = at(node.in[0]).value;
            RealTensor& gi = grad_buffer(node.in[0]);
            const double eps = node.scalar;
            const std::size_t c = g.cols();
            for (std::size_t r = 0; r < g.rows(); ++r)
                for (std::size_t j = 0; j < c; ++j) {
                    const double re = xv.at(r, 2 * j);
                    const double im = xv.at(r, 2 * j + 1);
                    const double s = std::sqrt(re * re + im * im + eps * eps);
                    gi.at(r, 2 * j) += g.at(r, j) * re / s;
                    gi.at(r, 2 * j + 1) += g.at(r, j) * im / s;
                }
            break;
        }
        case Op::SumAll: {
            if (!at(node.in[0]).requires_grad) break;
            RealTensor& gi = grad_buffer(node.in[0]);
            const double gv = g.data[0];
            for (double& v : gi.data) v += gv;
            break;
        }
        case Op::Gather: {
            if (!at(node.in[0]).requires_grad) break;
            const auto& idx = static_cast<const GatherPayload*>(node.payload.get())->idx;
            RealTensor& gi = grad_buffer(node.in[0]);
            for (std::size_t k = 0; k < idx.size(); ++k) gi.data[idx[k]] += g.data[k];
            break;
        }
        case Op::Tikhonov: {
            auto* payload = static_cast<TikhonovPayload*>(node.payload.get());
            const ComplexMatrix pc = pairs_to_complex(at(node.in[0]).value);
            const ComplexMatrix tc = pairs_to_complex(at(node.in[1]).value);
            const ComplexMatrix gc = pairs_to_complex(g);
            const TikhonovGrads grads = solve_tikhonov_grad(pc, tc, payload->fac, gc);
            if (at(node.in[0]).requires_grad && payload->grad_p) {
                const RealTensor dp = complex_to_pairs(grads.dp);
                RealTensor& gi = grad_buffer(node.in[0]);
                for (std::size_t i = 0; i < dp.size(); ++i) gi.data[i] += dp.data[i];
            }
            if (at(node.in[1]).requires_grad) {
                const RealTensor dt = complex_to_pairs(grads.dt);
                RealTensor& gi = grad_buffer(node.in[1]);
                for (std::size_t i = 0; i < dt.size(); ++i) gi.data[i] += dt.data[i];
            }
            break;
        }
    }
}

}  // namespace dmri::num
