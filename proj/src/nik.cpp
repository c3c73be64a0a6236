#include "dmri/nik.hpp"

#include <cmath>
#include <numbers>

#include "dmri/rng.hpp"

namespace dmri::nik {

using std::numbers::pi;

FeatureEncoding make_encoding(std::size_t n_freq, double sigma_k, double sigma_t,
                              std::uint64_t seed) {
    if (n_freq < 1) throw Error("make_encoding: need at least one frequency row");
    Rng rng(Rng::derive(seed, 0x656e63ull));  // "enc" substream
    FeatureEncoding enc;
    enc.b.resize(static_cast<Eigen::Index>(n_freq), 3);
    for (Eigen::Index r = 0; r < enc.b.rows(); ++r) {
        enc.b(r, 0) = sigma_k * rng.normal();
        enc.b(r, 1) = sigma_k * rng.normal();
        enc.b(r, 2) = sigma_t * rng.normal();
    }
    return enc;
}

RealTensor encode(const FeatureEncoding& enc, const RealMatrix& coords) {
    if (coords.cols() != 3) throw DimensionMismatch("encode: coords must be m x 3");
    const Eigen::Index m = coords.rows();
    const Eigen::Index f = enc.b.rows();
    RealMatrix phase = 2.0 * pi * coords * enc.b.transpose();  // m x f
    RealTensor out({static_cast<std::size_t>(m), static_cast<std::size_t>(2 * f)});
    auto omat = out.mat();
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < f; ++j) {
            omat(i, j) = std::sin(phase(i, j));
            omat(i, f + j) = std::cos(phase(i, j));
        }
    return out;
}

std::vector<RealTensor*> SirenModel::parameters() {
    std::vector<RealTensor*> out;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        out.push_back(&weights[l]);
        out.push_back(&biases[l]);
    }
    return out;
}

std::vector<const RealTensor*> SirenModel::parameters() const {
    std::vector<const RealTensor*> out;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        out.push_back(&weights[l]);
        out.push_back(&biases[l]);
    }
    return out;
}

SirenModel make_siren(std::size_t n_in, std::size_t hidden, std::size_t n_layers,
                      std::size_t n_coils, double omega0) {
    if (n_layers < 1) throw Error("make_siren: need at least one hidden layer");
    if (!(omega0 > 0.0)) throw Error("make_siren: omega0 must be positive");
    SirenModel model;
    model.n_in = n_in;
    model.hidden = hidden;
    model.n_layers = n_layers;
    model.n_out = 2 * n_coils;
    model.omega0 = omega0;
    std::size_t fan_in = n_in;
    for (std::size_t l = 0; l < n_layers; ++l) {
        model.weights.emplace_back(RealTensor({fan_in, hidden}));
        model.biases.emplace_back(RealTensor({hidden}));
        fan_in = hidden;
    }
    model.weights.emplace_back(RealTensor({fan_in, model.n_out}));
    model.biases.emplace_back(RealTensor({model.n_out}));
    return model;
}

void siren_init(SirenModel& model, std::uint64_t seed) {
    Rng rng(Rng::derive(seed, 0x73697265ull));  // "sire" substream
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        RealTensor& w = model.weights[l];
        const double fan_in = static_cast<double>(w.rows());
        const double bound =
            (l == 0) ? 1.0 / fan_in : std::sqrt(6.0 / fan_in) / model.omega0;
        for (double& v : w.data) v = rng.uniform(-bound, bound);
        for (double& v : model.biases[l].data) v = 0.0;
    }
}

namespace {

constexpr std::size_t kForwardChunk = 8192;

}  // namespace

RealTensor forward(const SirenModel& model, const RealTensor& features) {
    if (features.cols() != model.n_in)
        throw ShapeMismatch("forward: feature width != model input width");
    const std::size_t m = features.rows();
    RealTensor out({m, model.n_out});
    for (std::size_t lo = 0; lo < m; lo += kForwardChunk) {
        const std::size_t hi = std::min(m, lo + kForwardChunk);
        const std::size_t rows = hi - lo;
        RealTensor x({rows, static_cast<std::size_t>(features.cols())});
        x.mat() = features.mat().middleRows(static_cast<Eigen::Index>(lo),
                                            static_cast<Eigen::Index>(rows));
        for (std::size_t l = 0; l < model.weights.size(); ++l) {
            RealTensor z({rows, model.weights[l].cols()});
            z.mat().noalias() = x.mat() * model.weights[l].mat();
            z.mat().rowwise() += Eigen::Map<const Eigen::RowVectorXd>(
                model.biases[l].data.data(), static_cast<Eigen::Index>(model.biases[l].size()));
            if (l + 1 < model.weights.size())
                for (double& v : z.data) v = std::sin(model.omega0 * v);
            x = std::move(z);
        }
        out.mat().middleRows(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(rows)) =
            x.mat();
    }
    return out;
}

NodeId forward_tape(Tape& tape, const SirenModel& model, const std::vector<NodeId>& param_nodes,
                    NodeId features) {
    if (param_nodes.size() != 2 * model.weights.size())
        throw ShapeMismatch("forward_tape: parameter node count mismatch");
    NodeId x = features;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        x = tape.linear(x, param_nodes[2 * l], param_nodes[2 * l + 1]);
        if (l + 1 < model.weights.size()) x = tape.sin_scaled(x, model.omega0);
    }
    return x;
}

ComplexMatrix predict(const SirenModel& model, const FeatureEncoding& enc,
                      const RealMatrix& coords) {
    return num::pairs_to_complex(forward(model, encode(enc, coords)));
}

double dc_loss(const ComplexMatrix& pred, const ComplexMatrix& meas, const DcLossConfig& cfg) {
    if (pred.rows() != meas.rows() || pred.cols() != meas.cols())
        throw ShapeMismatch("dc_loss: prediction/measurement shapes differ");
    if (!(cfg.epsilon > 0.0)) throw Error("dc_loss: epsilon must be positive");
    double acc = 0.0;
    const double e2 = cfg.eps_abs * cfg.eps_abs;
    for (Eigen::Index i = 0; i < pred.rows(); ++i)
        for (Eigen::Index j = 0; j < pred.cols(); ++j) {
            const num::Complex d = pred(i, j) - meas(i, j);
            const double mag =
                std::sqrt(d.real() * d.real() + d.imag() * d.imag() + e2) - cfg.eps_abs;
            acc += mag / (std::abs(meas(i, j)) + cfg.epsilon);
        }
    return acc / (static_cast<double>(pred.rows()) * static_cast<double>(pred.cols()));
}

LossStepResult loss_step(const SirenModel& model, const RealTensor& features,
                         const LossBuilder& build_loss, double grad_scale,
                         std::size_t chunk_rows) {
    const std::size_t m = features.rows();
    const std::size_t n_params = 2 * model.weights.size();
    LossStepResult result;
    RealTensor seed({std::size_t{1}});
    seed.data[0] = grad_scale;

    if (m <= chunk_rows) {
        Tape tape;
        std::vector<NodeId> params;
        params.reserve(n_params);
        for (const RealTensor* p : model.parameters()) params.push_back(tape.leaf(*p, true));
        const NodeId feat = tape.leaf(features, false);
        const NodeId out = forward_tape(tape, model, params, feat);
        const NodeId loss = build_loss(tape, out);
        result.loss = tape.scalar_value(loss);
        tape.backward_seeded(loss, seed);
        for (NodeId p : params) result.grads.push_back(tape.take_grad(p));
        return result;
    }

    // Phase 1: graph-free outputs for the whole batch.
    const RealTensor outputs = forward(model, features);
    // Phase 2: loss graph over outputs only, yielding dL/d(outputs).
    RealTensor d_outputs;
    {
        Tape tape;
        const NodeId y = tape.leaf(outputs, true);
        const NodeId loss = build_loss(tape, y);
        result.loss = tape.scalar_value(loss);
        tape.backward_seeded(loss, seed);
        d_outputs = tape.take_grad(y);
    }
    // Phase 3: pull the output gradient back through the network per chunk.
    result.grads.assign(n_params, RealTensor());
    for (std::size_t lo = 0; lo < m; lo += chunk_rows) {
        const std::size_t hi = std::min(m, lo + chunk_rows);
        const std::size_t rows = hi - lo;
        RealTensor feat_chunk({rows, static_cast<std::size_t>(features.cols())});
        feat_chunk.mat() = features.mat().middleRows(static_cast<Eigen::Index>(lo),
                                                     static_cast<Eigen::Index>(rows));
        RealTensor dy_chunk({rows, model.n_out});
        dy_chunk.mat() = d_outputs.mat().middleRows(static_cast<Eigen::Index>(lo),
                                                    static_cast<Eigen::Index>(rows));
        Tape tape;
        std::vector<NodeId> params;
        params.reserve(n_params);
        for (const RealTensor* p : model.parameters()) params.push_back(tape.leaf(*p, true));
        const NodeId feat = tape.leaf(std::move(feat_chunk), false);
        const NodeId out = forward_tape(tape, model, params, feat);
        tape.backward_seeded(out, dy_chunk);
        for (std::size_t i = 0; i < n_params; ++i) {
            RealTensor g = tape.take_grad(params[i]);
            if (result.grads[i].empty()) {
                result.grads[i] = std::move(g);
            } else {
                for (std::size_t k = 0; k < g.size(); ++k)
                    result.grads[i].data[k] += g.data[k];
            }
        }
    }
    return result;
}

NodeId dc_loss_tape(Tape& tape, NodeId pred, const ComplexMatrix& meas, const DcLossConfig& cfg) {
    if (!(cfg.epsilon > 0.0)) throw Error("dc_loss_tape: epsilon must be positive");
    const RealTensor& pv = tape.value(pred);
    if (pv.rows() != static_cast<std::size_t>(meas.rows()) ||
        pv.cols() != static_cast<std::size_t>(2 * meas.cols()))
        throw ShapeMismatch("dc_loss_tape: prediction/measurement shapes differ");
    const NodeId meas_leaf = tape.leaf(num::complex_to_pairs(meas), false);
    const NodeId diff = tape.sub(pred, meas_leaf);
    const NodeId mag = tape.complex_abs_smooth(diff, cfg.eps_abs);
    // 1 / ((|meas| + eps) * count), folded into one constant weight tensor.
    RealTensor wts({static_cast<std::size_t>(meas.rows()), static_cast<std::size_t>(meas.cols())});
    const double inv_count = 1.0 / static_cast<double>(meas.size());
    for (Eigen::Index i = 0; i < meas.rows(); ++i)
        for (Eigen::Index j = 0; j < meas.cols(); ++j)
            wts.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
                inv_count / (std::abs(meas(i, j)) + cfg.epsilon);
    return tape.sum_all(tape.mul_const(mag, std::move(wts)));
}

}  // namespace dmri::nik
