#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dmri/tape.hpp"
#include "dmri/tensor.hpp"

namespace dmri::nik {

using num::ComplexMatrix;
using num::NodeId;
using num::RealMatrix;
using num::RealTensor;
using num::Tape;

// Gaussian Fourier features over (k_x, k_y, t). B is drawn once per seed with
// per-axis scales (sigma_k, sigma_k, sigma_t) and frozen; a coordinate row
// maps to [sin(2 pi c B^T), cos(2 pi c B^T)].
struct FeatureEncoding {
    RealMatrix b;  // n_freq x 3
    std::size_t n_features() const { return 2 * static_cast<std::size_t>(b.rows()); }
};

FeatureEncoding make_encoding(std::size_t n_freq, double sigma_k, double sigma_t,
                              std::uint64_t seed);

RealTensor encode(const FeatureEncoding& enc, const RealMatrix& coords);

// Sine-activated MLP: features -> hidden x n_layers (sin(omega0 .)) -> linear
// output of width 2 * n_coils read as n_coils complex values.
struct SirenModel {
    std::size_t n_in = 0;
    std::size_t hidden = 512;
    std::size_t n_layers = 4;
    std::size_t n_out = 0;  // 2 * n_coils
    double omega0 = 30.0;
    std::vector<RealTensor> weights;  // n_layers + 1 matrices
    std::vector<RealTensor> biases;   // matching 1-D biases

    std::size_t n_coils() const { return n_out / 2; }
    std::vector<RealTensor*> parameters();
    std::vector<const RealTensor*> parameters() const;
};

SirenModel make_siren(std::size_t n_in, std::size_t hidden, std::size_t n_layers,
                      std::size_t n_coils, double omega0);

// First layer uniform(-1/fan_in, 1/fan_in), later layers
// uniform(-sqrt(6/fan_in)/omega0, +sqrt(6/fan_in)/omega0); biases zero.
void siren_init(SirenModel& model, std::uint64_t seed);

// Plain forward (no graph). Chunks rows internally to bound scratch memory.
RealTensor forward(const SirenModel& model, const RealTensor& features);

// Forward as tape graph. param_nodes must hold leaves for weights/biases in
// parameters() order; returns the output node ([m, 2 n_coils]).
NodeId forward_tape(Tape& tape, const SirenModel& model, const std::vector<NodeId>& param_nodes,
                    NodeId features);

// Convenience: encode + forward + reinterpret as complex m x n_coils.
ComplexMatrix predict(const SirenModel& model, const FeatureEncoding& enc,
                      const RealMatrix& coords);

// High-dynamic-range data consistency: mean over entries of
// |pred - meas| / (|meas| + epsilon), with the smooth |.| used for gradients.
struct DcLossConfig {
    double epsilon = 1e-3;
    double eps_abs = 1e-12;  // smoothing of |.| at zero
};

double dc_loss(const ComplexMatrix& pred, const ComplexMatrix& meas, const DcLossConfig& cfg);

// Same loss as a graph on an existing prediction node ([m, 2 n_coils] pairs).
NodeId dc_loss_tape(Tape& tape, NodeId pred, const ComplexMatrix& meas, const DcLossConfig& cfg);

// One optimizer-ready gradient evaluation: run the network over `features`,
// apply a caller-built scalar loss graph to the outputs, and return the loss
// with d(grad_scale * loss)/d(parameters).
//
// Batches larger than chunk_rows switch to a two-phase sweep: outputs for the
// whole batch are computed graph-free, the loss graph runs on them alone, and
// the resulting output gradient is pulled back through the network chunk by
// chunk. That caps the live graph at chunk_rows rows regardless of batch size.
struct LossStepResult {
    double loss = 0.0;
    std::vector<RealTensor> grads;  // parameters() order
};

using LossBuilder = std::function<NodeId(Tape&, NodeId pred)>;

LossStepResult loss_step(const SirenModel& model, const RealTensor& features,
                         const LossBuilder& build_loss, double grad_scale = 1.0,
                         std::size_t chunk_rows = 16384);

}  // namespace dmri::nik
