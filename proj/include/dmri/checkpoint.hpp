#pragma once

#include <string>

#include "dmri/nik.hpp"
#include "dmri/phantom.hpp"

namespace dmri::nik {

// Model checkpoint: a structured-text manifest (layer shapes, omega0, seed,
// data scale, grid size) plus one NDA file per parameter tensor, the frozen
// encoding matrix B, and the coil maps needed at inference time.
struct Checkpoint {
    SirenModel model;
    FeatureEncoding encoding;
    phantom::CoilMaps maps;
    double data_scale = 1.0;
    std::uint64_t seed = 0;
    std::size_t grid_nx = 0;
    std::size_t grid_ny = 0;
};

void save_checkpoint(const std::string& dir, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& dir);

}  // namespace dmri::nik
