#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dmri/neighborhood.hpp"
#include "dmri/nik.hpp"
#include "dmri/tape.hpp"

namespace dmri::pisco {

using num::ComplexMatrix;
using num::NodeId;
using num::RealMatrix;
using num::RealTensor;
using num::Tape;

// Solved weights of one subset system.
struct WeightSet {
    ComplexMatrix w;  // (n_neighbors * n_coils_in) x n_coils_out
    int subset_id = 0;
    std::optional<double> min_normal_eigenvalue;  // conditioning diagnostic
};

struct PiscoConfig {
    double alpha = 1e-4;                 // ridge weight of the subset solves
    double f_od = 1.1;                   // equations per unknown
    double lambda = 0.01;                // loss weight
    std::size_t coils_out_per_iter = 0;  // 0 = solve for all coils each step
    bool grad_through_p = true;          // gradient flow into the neighbor matrix
    bool random_partition = false;       // shuffle instead of temporal sort
    double eps_abs = 1e-12;              // |.| smoothing; sole deviation from exact L1
};

// One solve per subset, order preserved. Requires at least two systems and
// each system overdetermined (rows >= unknown count).
std::vector<WeightSet> solve_subset_weights(const std::vector<nbhd::SubsetSystem>& systems,
                                            double alpha, bool with_diagnostics = false);

// (1/N_s^2) sum_i sum_j [ ||Re(W_i - W_j)||_1 + ||Im(W_i - W_j)||_1 ] over all
// ordered pairs, i == j included (those terms are zero).
double pisco_loss(const std::vector<WeightSet>& weights, double eps_abs = 1e-12);

// Same loss as a graph over solved weight nodes ((re, im)-paired tensors).
NodeId pisco_loss_tape(Tape& tape, const std::vector<NodeId>& w_nodes, double eps_abs);

struct PiscoStepResult {
    double loss = 0.0;               // unscaled L_PISCO
    std::vector<RealTensor> grads;   // d(lambda * L_PISCO)/d(parameters)
    std::size_t n_subsets = 0;
    std::size_t coil_window_start = 0;
};

// Full regularization step: query the model at the batch targets and their
// kernel neighbors, partition into subsets, solve, and differentiate
// lambda * L_PISCO back into the model parameters.
//
// step_index drives the round-robin output-coil window when
// coils_out_per_iter < n_coils; seed feeds the optional random partition.
PiscoStepResult pisco_step(const nik::SirenModel& model, const nik::FeatureEncoding& enc,
                           const RealMatrix& batch_coords, const nbhd::KernelGeometry& kernel,
                           const PiscoConfig& cfg, std::size_t step_index = 0,
                           std::uint64_t seed = 0);

// Trainer-facing variant with precomputed feature rows: `features` stacks the
// target rows first, then the n_neighbors patch rows of each target
// (target-major). t_values holds the targets' time coordinates.
PiscoStepResult pisco_step_features(const nik::SirenModel& model, const RealTensor& features,
                                    const std::vector<double>& t_values, std::size_t n_neighbors,
                                    const PiscoConfig& cfg, std::size_t step_index = 0,
                                    std::uint64_t seed = 0);

}  // namespace dmri::pisco
