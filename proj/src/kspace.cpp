#include "dmri/kspace.hpp"

#include <cmath>
#include <numbers>

namespace dmri::kspace {

using std::numbers::pi;

Trajectory golden_angle_radial(std::size_t n_spokes, std::size_t n_readout) {
    if (n_readout < 8 || n_readout % 2 != 0)
        throw Error("golden_angle_radial: n_readout must be even and >= 8");
    const double golden_ratio = (1.0 + std::sqrt(5.0)) / 2.0;
    Trajectory traj;
    traj.n_spokes = n_spokes;
    traj.n_readout = n_readout;
    traj.coords.resize(n_spokes * n_readout);
    for (std::size_t n = 0; n < n_spokes; ++n) {
        const double theta = std::fmod(static_cast<double>(n) * pi / golden_ratio, pi);
        const double ct = std::cos(theta);
        const double st = std::sin(theta);
        for (std::size_t m = 0; m < n_readout; ++m) {
            const double r = (static_cast<double>(m) - static_cast<double>(n_readout) / 2.0) /
                             static_cast<double>(n_readout);
            traj.coords[n * n_readout + m] = {r * ct, r * st};
        }
    }
    return traj;
}

namespace {

// Phase-vector tables for one batch of samples: ex(m, a) = e^(-2 pi i kx_m a'),
// ey likewise, with a' the centered pixel coordinate. The NUDFT then becomes
// per-sample bilinear forms evaluated with one GEMM.
void phase_tables(const RealMatrix& coords, Eigen::Index lo, Eigen::Index hi, std::size_t nx,
                  std::size_t ny, double sign, ComplexMatrix& ex, ComplexMatrix& ey) {
    const auto m = hi - lo;
    ex.resize(m, static_cast<Eigen::Index>(nx));
    ey.resize(m, static_cast<Eigen::Index>(ny));
    for (Eigen::Index i = 0; i < m; ++i) {
        const double kx = coords(lo + i, 0);
        const double ky = coords(lo + i, 1);
        for (std::size_t a = 0; a < nx; ++a) {
            const double rx = static_cast<double>(a) - static_cast<double>(nx) / 2.0;
            const double ph = sign * 2.0 * pi * kx * rx;
            ex(i, static_cast<Eigen::Index>(a)) = Complex(std::cos(ph), std::sin(ph));
        }
        for (std::size_t b = 0; b < ny; ++b) {
            const double ry = static_cast<double>(b) - static_cast<double>(ny) / 2.0;
            const double ph = sign * 2.0 * pi * ky * ry;
            ey(i, static_cast<Eigen::Index>(b)) = Complex(std::cos(ph), std::sin(ph));
        }
    }
}

constexpr Eigen::Index kSampleChunk = 2048;

}  // namespace

Eigen::VectorXcd nudft_forward(const ComplexMatrix& image, const RealMatrix& coords) {
    if (coords.cols() < 2) throw DimensionMismatch("nudft_forward: coords must be m x 2");
    const auto nx = static_cast<std::size_t>(image.rows());
    const auto ny = static_cast<std::size_t>(image.cols());
    const Eigen::Index m = coords.rows();
    Eigen::VectorXcd out(m);
    ComplexMatrix ex, ey, gx;
    for (Eigen::Index lo = 0; lo < m; lo += kSampleChunk) {
        const Eigen::Index hi = std::min(m, lo + kSampleChunk);
        phase_tables(coords, lo, hi, nx, ny, -1.0, ex, ey);
        gx.noalias() = ex * image;  // (chunk x ny)
        for (Eigen::Index i = 0; i < hi - lo; ++i)
            out(lo + i) = (gx.row(i).array() * ey.row(i).array()).sum();
    }
    return out;
}

ComplexMatrix nudft_adjoint(const Eigen::VectorXcd& samples, const RealMatrix& coords,
                            std::size_t nx, std::size_t ny) {
    if (coords.rows() != samples.size())
        throw DimensionMismatch("nudft_adjoint: sample/coord counts differ");
    if (coords.cols() < 2) throw DimensionMismatch("nudft_adjoint: coords must be m x 2");
    ComplexMatrix image = ComplexMatrix::Zero(static_cast<Eigen::Index>(nx),
                                              static_cast<Eigen::Index>(ny));
    const Eigen::Index m = coords.rows();
    ComplexMatrix ex, ey;
    for (Eigen::Index lo = 0; lo < m; lo += kSampleChunk) {
        const Eigen::Index hi = std::min(m, lo + kSampleChunk);
        phase_tables(coords, lo, hi, nx, ny, +1.0, ex, ey);
        for (Eigen::Index i = 0; i < hi - lo; ++i) ey.row(i) *= samples(lo + i);
        image.noalias() += ex.transpose() * ey;
    }
    return image;
}

KSampleSet simulate_acquisition(const phantom::DynamicPhantom& ph, const phantom::CoilMaps& maps,
                                const Trajectory& traj, const phantom::Navigator& nav) {
    if (nav.values.size() != traj.n_spokes)
        throw DimensionMismatch("simulate_acquisition: navigator must have one value per spoke");
    if (maps.nx() != ph.nx || maps.ny() != ph.ny)
        throw DimensionMismatch("simulate_acquisition: coil map grid != phantom grid");
    const std::size_t n_coils = maps.n_coils();
    const std::size_t n_ro = traj.n_readout;
    KSampleSet out;
    out.n_readout = n_ro;
    out.coords.resize(static_cast<Eigen::Index>(traj.n_samples()), 3);
    out.values.resize(static_cast<Eigen::Index>(traj.n_samples()),
                      static_cast<Eigen::Index>(n_coils));
    RealMatrix spoke_coords(static_cast<Eigen::Index>(n_ro), 2);
    for (std::size_t s = 0; s < traj.n_spokes; ++s) {
        const double t = nav.values[s];
        const ComplexMatrix frame = phantom::render_frame(ph, t);
        for (std::size_t m = 0; m < n_ro; ++m) {
            const auto& k = traj.coords[s * n_ro + m];
            spoke_coords(static_cast<Eigen::Index>(m), 0) = k[0];
            spoke_coords(static_cast<Eigen::Index>(m), 1) = k[1];
            const auto row = static_cast<Eigen::Index>(s * n_ro + m);
            out.coords(row, 0) = k[0];
            out.coords(row, 1) = k[1];
            out.coords(row, 2) = t;
        }
        for (std::size_t c = 0; c < n_coils; ++c) {
            const ComplexMatrix weighted = maps.maps[c].cwiseProduct(frame);
            const Eigen::VectorXcd spoke = nudft_forward(weighted, spoke_coords);
            for (std::size_t m = 0; m < n_ro; ++m)
                out.values(static_cast<Eigen::Index>(s * n_ro + m), static_cast<Eigen::Index>(c)) =
                    spoke(static_cast<Eigen::Index>(m));
        }
    }
    return out;
}

KSampleSet accelerate(const KSampleSet& samples, std::size_t r) {
    if (r < 1) throw Error("accelerate: factor must be >= 1");
    if (r == 1) return samples;
    if (samples.n_readout == 0 || samples.n_samples() % samples.n_readout != 0)
        throw Error("accelerate: sample set lacks spoke structure");
    const std::size_t n_sp = samples.n_spokes();
    const std::size_t n_ro = samples.n_readout;
    const std::size_t kept = (n_sp + r - 1) / r;
    KSampleSet out;
    out.n_readout = n_ro;
    out.coords.resize(static_cast<Eigen::Index>(kept * n_ro), 3);
    out.values.resize(static_cast<Eigen::Index>(kept * n_ro), samples.values.cols());
    std::size_t w = 0;
    for (std::size_t s = 0; s < n_sp; s += r) {
        for (std::size_t m = 0; m < n_ro; ++m, ++w) {
            out.coords.row(static_cast<Eigen::Index>(w)) =
                samples.coords.row(static_cast<Eigen::Index>(s * n_ro + m));
            out.values.row(static_cast<Eigen::Index>(w)) =
                samples.values.row(static_cast<Eigen::Index>(s * n_ro + m));
        }
    }
    return out;
}

std::vector<KSampleSet> bin_by_navigator(const KSampleSet& samples, std::size_t n_ms) {
    if (n_ms < 1) throw Error("bin_by_navigator: need at least one bin");
    const double width = 0.5 / static_cast<double>(n_ms);
    std::vector<std::vector<Eigen::Index>> members(n_ms);
    for (Eigen::Index i = 0; i < samples.coords.rows(); ++i) {
        auto b = static_cast<std::size_t>(std::floor(samples.coords(i, 2) / width));
        if (b >= n_ms) b = n_ms - 1;
        members[b].push_back(i);
    }
    std::vector<KSampleSet> bins(n_ms);
    for (std::size_t b = 0; b < n_ms; ++b) {
        KSampleSet& bin = bins[b];
        bin.n_readout = 0;  // spoke structure does not survive binning
        bin.coords.resize(static_cast<Eigen::Index>(members[b].size()), 3);
        bin.values.resize(static_cast<Eigen::Index>(members[b].size()), samples.values.cols());
        for (std::size_t j = 0; j < members[b].size(); ++j) {
            bin.coords.row(static_cast<Eigen::Index>(j)) = samples.coords.row(members[b][j]);
            bin.values.row(static_cast<Eigen::Index>(j)) = samples.values.row(members[b][j]);
        }
    }
    return bins;
}

}  // namespace dmri::kspace
