#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "dmri/tensor.hpp"

namespace dmri::nbhd {

using num::ComplexMatrix;
using num::RealMatrix;

// Neighbor offset pattern around a target, in normalized k-space units.
// The center (0, 0) is never included.
struct KernelGeometry {
    std::vector<std::array<double, 2>> offsets;
    std::size_t n_neighbors() const { return offsets.size(); }
};

// Full (h x w) box of offsets (i * delta, j * delta), i in [-(h-1)/2, (h-1)/2],
// row-major order, center excluded. h and w must be odd and >= 3.
KernelGeometry kernel_offsets(std::size_t h, std::size_t w, double delta);

// Neighbor j of target i is (k_x + off_x, k_y + off_y, t_i): neighbors share
// the target's time coordinate and may leave [-0.5, 0.5). Output is
// target-major, (m * n_neighbors) x 3.
RealMatrix build_patches(const RealMatrix& targets, const KernelGeometry& kernel);

// One stacked linear system T_s = P_s W of a temporally adjacent subset.
struct SubsetSystem {
    ComplexMatrix p;  // n_m x (n_neighbors * n_coils_in)
    ComplexMatrix t;  // n_m x n_coils_out
    double t_min = 0.0;
    double t_max = 0.0;
};

// Index plan for splitting m rows into floor(m / n_m) subsets of n_m rows
// after sorting by t (ties broken by original index). Trailing remainder rows
// are dropped.
struct SubsetPlan {
    std::vector<std::size_t> order;  // sorted row indices, length n_subsets * n_m
    std::size_t n_m = 0;
    std::size_t n_subsets = 0;
    std::vector<std::array<double, 2>> t_ranges;  // per subset (t_min, t_max)
};

SubsetPlan plan_subsets(const std::vector<double>& t_values, std::size_t n_m);

// Randomized variant: rows are shuffled instead of sorted, so subsets mix
// times. t_ranges then record each subset's min/max over its members.
SubsetPlan plan_subsets_random(const std::vector<double>& t_values, std::size_t n_m,
                               std::uint64_t seed);

// Materialize the stacked systems from per-row values.
std::vector<SubsetSystem> partition_subsets(const std::vector<double>& t_values,
                                            const ComplexMatrix& values_t,
                                            const ComplexMatrix& values_p, std::size_t n_m);

// N_w = n_neighbors * n_coils_in * n_coils_out and n_m = ceil(f_od * N_w).
struct Overdetermination {
    std::size_t n_weights = 0;
    std::size_t n_measurements = 0;
};
Overdetermination overdetermination(std::size_t n_neighbors, std::size_t n_coils_in,
                                    std::size_t n_coils_out, double f_od);

}  // namespace dmri::nbhd
