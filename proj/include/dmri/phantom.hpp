#pragma once

#include <cstdint>
#include <vector>

#include "dmri/tensor.hpp"

namespace dmri::phantom {

using num::Complex;
using num::ComplexMatrix;

// One scene element. Positions and semi-axes are in normalized image units
// ([-0.5, 0.5) across the field of view); kappa couples the center's y
// position to the navigator value: center_y(t) = cy + kappa * t.
struct Ellipse {
    double cx = 0.0;
    double cy = 0.0;
    double a = 0.1;
    double b = 0.1;
    double angle = 0.0;  // radians
    Complex amplitude{1.0, 0.0};
    double kappa = 0.0;
};

struct DynamicPhantom {
    std::vector<Ellipse> ellipses;
    std::size_t nx = 64;
    std::size_t ny = 64;
};

// Per-coil complex sensitivity maps, nx x ny each.
struct CoilMaps {
    std::vector<ComplexMatrix> maps;
    std::size_t n_coils() const { return maps.size(); }
    std::size_t nx() const { return maps.empty() ? 0 : static_cast<std::size_t>(maps[0].rows()); }
    std::size_t ny() const { return maps.empty() ? 0 : static_cast<std::size_t>(maps[0].cols()); }
};

// Surrogate respiratory signal, one value per spoke, range [0, 0.5].
struct Navigator {
    std::vector<double> values;
};

// t_i = 0.25 * (1 - cos(2 pi i / period)): starts at end-expiration 0,
// peaks at 0.5 half a breath later.
Navigator navigator_signal(std::size_t n_spokes, std::size_t period);

// Rasterize the scene at navigator value t. Pixel (ix, iy) samples the scene
// at normalized coordinates ((ix - nx/2)/nx, (iy - ny/2)/ny); the value is the
// sum of amplitudes of all covering ellipses.
ComplexMatrix render_frame(const DynamicPhantom& ph, double t);

// Gaussian-magnitude coils centered on a radius-0.4 circle with linear phase
// ramps of at most 2 cycles per field of view, so sum_c |s_c|^2 stays well
// away from zero everywhere on the grid.
CoilMaps coil_maps(std::size_t n_coils, std::size_t nx, std::size_t ny, std::uint64_t seed);

// A default dynamic scene used by the CLI when the config lists no ellipses:
// torso-like static background plus a breathing "liver" edge and two small
// moving vessels.
DynamicPhantom default_phantom(std::size_t nx, std::size_t ny);

}  // namespace dmri::phantom
