#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dmri/phantom.hpp"

namespace dmri::cli {

// Flat key-value experiment description with [phantom], [trajectory], [nik],
// [train] and [pisco] sections. Unknown sections or keys are rejected.
// Defaults follow the reference training setup.
struct ExperimentConfig {
    // [phantom]
    std::size_t nx = 64;
    std::size_t ny = 64;
    std::size_t n_coils = 6;
    std::size_t period = 200;       // spokes per breathing cycle
    std::size_t eval_frames = 50;   // ground-truth frames written by simulate
    std::vector<phantom::Ellipse> ellipses;  // empty -> built-in default scene

    // [trajectory]
    std::size_t n_spokes = 1341;
    std::size_t n_fe = 128;
    std::size_t accel = 1;  // R

    // [nik]
    std::size_t layers = 4;
    std::size_t hidden = 512;
    std::size_t n_freq = 128;
    double omega0 = 30.0;
    double sigma_k = 32.0;
    double sigma_t = 4.0;

    // [train]
    std::size_t epochs = 1000;
    std::size_t e_pre = 200;
    std::size_t batch = 10000;
    double lr = 3e-5;
    std::uint64_t seed = 1234;

    // [pisco]
    bool pisco_enabled = true;
    double alpha = 1e-4;
    double f_od = 1.1;
    double lambda = 0.01;
    std::size_t kernel_h = 3;
    std::size_t kernel_w = 3;
    std::size_t coils_out = 0;  // 0 = all
    bool grad_p = true;
    bool random_partition = false;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Canonical serialization; deterministic so config copies are reproducible.
std::string config_to_text(const ExperimentConfig& cfg);
void write_config_file(const std::string& path, const ExperimentConfig& cfg);

}  // namespace dmri::cli
