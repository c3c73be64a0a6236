#pragma once

#include <vector>

#include "dmri/neighborhood.hpp"
#include "dmri/pisco.hpp"
#include "dmri/tensor.hpp"

namespace dmri::grappa {

using num::Complex;
using num::ComplexMatrix;
using BoolGrid = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Multi-coil Cartesian k-space with a sampling mask. Unsampled entries are
// kept exactly zero.
struct CartesianKSpace {
    std::vector<ComplexMatrix> coils;
    BoolGrid mask;

    std::size_t n_coils() const { return coils.size(); }
    std::size_t nx() const { return coils.empty() ? 0 : static_cast<std::size_t>(coils[0].rows()); }
    std::size_t ny() const { return coils.empty() ? 0 : static_cast<std::size_t>(coils[0].cols()); }

    void zero_unsampled();
};

// Kernel offsets in integer grid steps, derived from a KernelGeometry whose
// normalized offsets must be integer multiples of the grid spacing
// (1/nx, 1/ny).
std::vector<std::array<int, 2>> grid_steps(const nbhd::KernelGeometry& kernel, std::size_t nx,
                                           std::size_t ny);

// Row-undersampling kernel: one sampled row above and below the target,
// three columns each. This is the pattern-matched kernel that makes every
// missing row of a uniform R=2 mask fillable in a single pass.
nbhd::KernelGeometry undersampled_rows_kernel(double delta_x, double delta_y);

// Keep every r-th row plus a centered fully sampled band of acs_rows rows.
BoolGrid uniform_row_mask(std::size_t nx, std::size_t ny, std::size_t r, std::size_t acs_rows);

// Crop a centered fully sampled row band for calibration.
CartesianKSpace central_acs_band(const CartesianKSpace& ksp, std::size_t acs_rows);

// Solve T = P W over every ACS point whose whole kernel patch is inside the
// region and sampled. P columns are ordered neighbor-major: (j * n_coils + c).
pisco::WeightSet calibrate(const CartesianKSpace& acs, const nbhd::KernelGeometry& kernel,
                           double alpha);

// Fill every unsampled location whose full neighbor patch is sampled with
// y_T = y_P W; sampled locations pass through untouched, filled locations are
// marked sampled in the output mask.
CartesianKSpace apply(const pisco::WeightSet& weights, const nbhd::KernelGeometry& kernel,
                      const CartesianKSpace& undersampled);

}  // namespace dmri::grappa
