#include "dmri/phantom.hpp"

#include <cmath>
#include <numbers>

#include "dmri/rng.hpp"

namespace dmri::phantom {

using std::numbers::pi;

Navigator navigator_signal(std::size_t n_spokes, std::size_t period) {
    if (n_spokes < 1) throw Error("navigator_signal: need at least one spoke");
    if (period < 2) throw Error("navigator_signal: period must be >= 2");
    Navigator nav;
    nav.values.resize(n_spokes);
    for (std::size_t i = 0; i < n_spokes; ++i)
        nav.values[i] =
            0.25 * (1.0 - std::cos(2.0 * pi * static_cast<double>(i) / static_cast<double>(period)));
    return nav;
}

ComplexMatrix render_frame(const DynamicPhantom& ph, double t) {
    if (ph.nx < 8 || ph.ny < 8 || ph.nx % 2 != 0 || ph.ny % 2 != 0)
        throw Error("render_frame: grid must be even and >= 8");
    ComplexMatrix frame = ComplexMatrix::Zero(static_cast<Eigen::Index>(ph.nx),
                                              static_cast<Eigen::Index>(ph.ny));
    for (const Ellipse& e : ph.ellipses) {
        const double cy = e.cy + e.kappa * t;
        const double ca = std::cos(e.angle);
        const double sa = std::sin(e.angle);
        // Bounding box in pixels keeps the inner loop tight.
        const double r = std::max(e.a, e.b);
        const auto nx = static_cast<double>(ph.nx);
        const auto ny = static_cast<double>(ph.ny);
        const auto ix_lo = static_cast<std::ptrdiff_t>(std::floor((e.cx - r + 0.5) * nx)) - 1;
        const auto ix_hi = static_cast<std::ptrdiff_t>(std::ceil((e.cx + r + 0.5) * nx)) + 1;
        const auto iy_lo = static_cast<std::ptrdiff_t>(std::floor((cy - r + 0.5) * ny)) - 1;
        const auto iy_hi = static_cast<std::ptrdiff_t>(std::ceil((cy + r + 0.5) * ny)) + 1;
        for (std::ptrdiff_t ix = std::max<std::ptrdiff_t>(0, ix_lo);
             ix <= std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(ph.nx) - 1, ix_hi); ++ix) {
            const double x = (static_cast<double>(ix) - nx / 2.0) / nx;
            for (std::ptrdiff_t iy = std::max<std::ptrdiff_t>(0, iy_lo);
                 iy <= std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(ph.ny) - 1, iy_hi);
                 ++iy) {
                const double y = (static_cast<double>(iy) - ny / 2.0) / ny;
                const double dx = x - e.cx;
                const double dy = y - cy;
                const double u = ca * dx + sa * dy;
                const double v = -sa * dx + ca * dy;
                if ((u / e.a) * (u / e.a) + (v / e.b) * (v / e.b) <= 1.0)
                    frame(ix, iy) += e.amplitude;
            }
        }
    }
    return frame;
}

CoilMaps coil_maps(std::size_t n_coils, std::size_t nx, std::size_t ny, std::uint64_t seed) {
    if (n_coils < 1) throw Error("coil_maps: need at least one coil");
    Rng rng(Rng::derive(seed, 0x636f696cull));  // "coil" substream
    CoilMaps cm;
    cm.maps.reserve(n_coils);
    const double sigma = 0.35;
    for (std::size_t c = 0; c < n_coils; ++c) {
        const double phi = 2.0 * pi * static_cast<double>(c) / static_cast<double>(n_coils);
        const double gx = 0.4 * std::cos(phi);
        const double gy = 0.4 * std::sin(phi);
        // Phase ramp direction and strength, |(u, v)| <= 2 cycles/FOV.
        const double ramp_mag = (n_coils == 1) ? 0.0 : rng.uniform(0.0, 2.0);
        const double ramp_ang = rng.uniform(0.0, 2.0 * pi);
        const double u = ramp_mag * std::cos(ramp_ang);
        const double v = ramp_mag * std::sin(ramp_ang);
        ComplexMatrix map(static_cast<Eigen::Index>(nx), static_cast<Eigen::Index>(ny));
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const double x = (static_cast<double>(ix) - static_cast<double>(nx) / 2.0) /
                             static_cast<double>(nx);
            for (std::size_t iy = 0; iy < ny; ++iy) {
                const double y = (static_cast<double>(iy) - static_cast<double>(ny) / 2.0) /
                                 static_cast<double>(ny);
                const double d2 = (x - gx) * (x - gx) + (y - gy) * (y - gy);
                const double mag = std::exp(-d2 / (2.0 * sigma * sigma));
                const double phase = 2.0 * pi * (u * x + v * y);
                map(static_cast<Eigen::Index>(ix), static_cast<Eigen::Index>(iy)) =
                    Complex(mag * std::cos(phase), mag * std::sin(phase));
            }
        }
        cm.maps.push_back(std::move(map));
    }
    return cm;
}

DynamicPhantom default_phantom(std::size_t nx, std::size_t ny) {
    DynamicPhantom ph;
    ph.nx = nx;
    ph.ny = ny;
    ph.ellipses = {
        // body outline
        {0.0, 0.0, 0.42, 0.36, 0.0, {1.0, 0.0}, 0.0},
        // liver-like blob, moves with the navigator
        {-0.10, 0.02, 0.17, 0.13, 0.35, {0.7, 0.25}, 0.30},
        // two small bright vessels with stronger motion
        {0.12, -0.14, 0.045, 0.045, 0.0, {1.2, -0.35}, 0.42},
        {0.20, 0.10, 0.035, 0.055, 0.8, {0.9, 0.4}, 0.38},
        // static dark-ish wedge for contrast
        {-0.22, -0.20, 0.09, 0.04, -0.5, {-0.45, 0.1}, 0.0},
    };
    return ph;
}

}  // namespace dmri::phantom
