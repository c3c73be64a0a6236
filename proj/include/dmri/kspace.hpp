#pragma once

#include <array>
#include <vector>

#include "dmri/phantom.hpp"
#include "dmri/tensor.hpp"

namespace dmri::kspace {

using num::Complex;
using num::ComplexMatrix;
using num::RealMatrix;

// Golden-angle radial sampling pattern. Coordinates are normalized spatial
// frequencies in [-0.5, 0.5) with radial step 1/n_readout; every spoke passes
// through k = 0 at sample n_readout/2.
struct Trajectory {
    std::size_t n_spokes = 0;
    std::size_t n_readout = 0;
    std::vector<std::array<double, 2>> coords;  // spoke-major (k_x, k_y)

    std::size_t n_samples() const { return coords.size(); }
};

// Spoke n sits at angle mod(n * pi / golden_ratio, pi).
Trajectory golden_angle_radial(std::size_t n_spokes, std::size_t n_readout);

// Acquired samples: coords rows are (k_x, k_y, t) with t in [0, 0.5]; values
// holds one complex sample per coil. n_readout is carried along so spoke
// structure survives slicing operations.
struct KSampleSet {
    RealMatrix coords;      // m x 3
    ComplexMatrix values;   // m x n_coils
    std::size_t n_readout = 0;

    std::size_t n_samples() const { return static_cast<std::size_t>(coords.rows()); }
    std::size_t n_coils() const { return static_cast<std::size_t>(values.cols()); }
    std::size_t n_spokes() const { return n_readout == 0 ? 0 : n_samples() / n_readout; }
};

// Exact non-uniform DFT of an nx x ny image at arbitrary (k_x, k_y) coords:
// y(k) = sum_r x(r) exp(-2 pi i (k_x r_x + k_y r_y)), with r in pixel units
// centered at the grid middle. No gridding approximation.
Eigen::VectorXcd nudft_forward(const ComplexMatrix& image, const RealMatrix& coords);

// Exact adjoint: x(r) = sum_m y_m exp(+2 pi i k_m . r).
ComplexMatrix nudft_adjoint(const Eigen::VectorXcd& samples, const RealMatrix& coords,
                            std::size_t nx, std::size_t ny);

// Render the scene at each spoke's navigator value, weight by every coil map,
// and evaluate the spoke's k-space samples. Output coords carry (k_x, k_y, t_i).
KSampleSet simulate_acquisition(const phantom::DynamicPhantom& ph, const phantom::CoilMaps& maps,
                                const Trajectory& traj, const phantom::Navigator& nav);

// Keep spokes with index == 0 (mod r). r == 1 returns the input unchanged.
KSampleSet accelerate(const KSampleSet& samples, std::size_t r);

// Motion-state binning: sample with navigator value t goes to bin
// floor(t / (0.5 / n_ms)), clamped to n_ms - 1. Bins partition the input.
std::vector<KSampleSet> bin_by_navigator(const KSampleSet& samples, std::size_t n_ms);

}  // namespace dmri::kspace
