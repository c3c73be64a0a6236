#pragma once

#include <string>
#include <vector>

#include "dmri/kspace.hpp"
#include "dmri/nik.hpp"
#include "dmri/phantom.hpp"

namespace dmri::recon {

using num::ComplexMatrix;
using num::RealMatrix;

// Temporal image stack with its navigator values, ascending in [0, 0.5].
struct FrameStack {
    std::vector<ComplexMatrix> frames;
    std::vector<double> t_values;
};

// Query the model over the full Cartesian k-space grid at fixed t. Returns
// one nx x ny k-space plane per coil, rescaled by data_scale (the measurement
// normalization divided out during training).
std::vector<ComplexMatrix> infer_grid(const nik::SirenModel& model,
                                      const nik::FeatureEncoding& enc, double t, std::size_t nx,
                                      std::size_t ny, double data_scale = 1.0);

// Exact inverse of the NUDFT restricted to the centered Cartesian grid,
// computed as two small matrix products (works for any even size).
ComplexMatrix idft2_centered(const ComplexMatrix& kspace);

// Roemer combination x = sum_c conj(s_c) x_c / sum_c |s_c|^2; pixels with
// vanishing sensitivity are set to zero.
ComplexMatrix coil_combine(const std::vector<ComplexMatrix>& coil_images,
                           const phantom::CoilMaps& maps);

// Model inference at n_frames times t_j = 0.5 j / (n_frames - 1): grid query,
// per-coil inverse FFT, coil combination.
FrameStack nik_reconstruct(const nik::SirenModel& model, const nik::FeatureEncoding& enc,
                           const phantom::CoilMaps& maps, std::size_t n_frames,
                           double data_scale = 1.0);

// Adjoint-NUDFT baseline: bin by navigator, radial-ramp density compensation
// (w(0) = 1/(2 n_fe)), per-coil adjoint, coil combination. Empty bins yield
// zero frames and are flagged.
FrameStack inufft_recon(const kspace::KSampleSet& samples, const phantom::CoilMaps& maps,
                        std::size_t n_ms, std::vector<bool>* empty_bins = nullptr);

// 10 log10(max(ref)^2 / MSE), capped at 99 dB (exact-match convention).
double psnr(const RealMatrix& ref, const RealMatrix& test);

// Mean SSIM over all fully interior 8x8 sliding windows, stabilizers
// C1 = (0.01 L)^2, C2 = (0.03 L)^2 with L = max(ref).
double ssim(const RealMatrix& ref, const RealMatrix& test);

// Per-frame PSNR/SSIM plus SSIM of yt slices (fixed x column, frames stacked
// along rows) at n_frames evenly spaced columns; yt metrics are skipped when
// fewer than 8 frames exist.
struct MetricReport {
    std::vector<double> psnr_frames;
    std::vector<double> ssim_frames;
    std::vector<double> ssim_yt;
    double psnr_mean = 0.0, psnr_median = 0.0;
    double ssim_mean = 0.0, ssim_median = 0.0;
    double ssim_yt_mean = 0.0, ssim_yt_median = 0.0;
};

MetricReport evaluate_frames(const std::vector<RealMatrix>& ref, const std::vector<RealMatrix>& test);

void write_metrics_csv(const std::string& path, const MetricReport& report);

// 8-bit binary PGM (P5) magnitude dump, scaled to the given maximum.
void write_pgm(const std::string& path, const RealMatrix& image, double max_value);

RealMatrix magnitude(const ComplexMatrix& image);

double median(std::vector<double> values);

}  // namespace dmri::recon
