#include "dmri/grappa.hpp"

#include <cmath>

#include "dmri/linalg.hpp"

namespace dmri::grappa {

void CartesianKSpace::zero_unsampled() {
    for (ComplexMatrix& coil : coils)
        for (Eigen::Index i = 0; i < coil.rows(); ++i)
            for (Eigen::Index j = 0; j < coil.cols(); ++j)
                if (!mask(i, j)) coil(i, j) = Complex(0.0, 0.0);
}

std::vector<std::array<int, 2>> grid_steps(const nbhd::KernelGeometry& kernel, std::size_t nx,
                                           std::size_t ny) {
    std::vector<std::array<int, 2>> steps;
    steps.reserve(kernel.offsets.size());
    for (const auto& off : kernel.offsets) {
        const double di = off[0] * static_cast<double>(nx);
        const double dj = off[1] * static_cast<double>(ny);
        const double ri = std::round(di);
        const double rj = std::round(dj);
        if (std::abs(di - ri) > 1e-9 || std::abs(dj - rj) > 1e-9)
            throw Error("grappa: kernel offsets are not grid-aligned for this matrix size");
        steps.push_back({static_cast<int>(ri), static_cast<int>(rj)});
    }
    return steps;
}

nbhd::KernelGeometry undersampled_rows_kernel(double delta_x, double delta_y) {
    nbhd::KernelGeometry kernel;
    for (int di : {-1, 1})
        for (int dj : {-1, 0, 1})
            kernel.offsets.push_back({di * delta_x, dj * delta_y});
    return kernel;
}

BoolGrid uniform_row_mask(std::size_t nx, std::size_t ny, std::size_t r, std::size_t acs_rows) {
    BoolGrid mask(static_cast<Eigen::Index>(nx), static_cast<Eigen::Index>(ny));
    mask.setConstant(false);
    for (std::size_t i = 0; i < nx; i += r) mask.row(static_cast<Eigen::Index>(i)).setConstant(true);
    const std::size_t lo = (nx - std::min(acs_rows, nx)) / 2;
    for (std::size_t i = lo; i < lo + std::min(acs_rows, nx); ++i)
        mask.row(static_cast<Eigen::Index>(i)).setConstant(true);
    return mask;
}

CartesianKSpace central_acs_band(const CartesianKSpace& ksp, std::size_t acs_rows) {
    if (acs_rows > ksp.nx()) throw AcsTooSmall("central_acs_band: band taller than the grid");
    const std::size_t lo = (ksp.nx() - acs_rows) / 2;
    CartesianKSpace out;
    out.mask = ksp.mask.middleRows(static_cast<Eigen::Index>(lo),
                                   static_cast<Eigen::Index>(acs_rows));
    if (!out.mask.all())
        throw AcsTooSmall("central_acs_band: central band is not fully sampled");
    out.coils.reserve(ksp.n_coils());
    for (const ComplexMatrix& coil : ksp.coils)
        out.coils.emplace_back(coil.middleRows(static_cast<Eigen::Index>(lo),
                                               static_cast<Eigen::Index>(acs_rows)));
    return out;
}

namespace {

struct KernelBox {
    int lo_i = 0, hi_i = 0, lo_j = 0, hi_j = 0;
};

KernelBox bounding_box(const std::vector<std::array<int, 2>>& steps) {
    KernelBox box;
    for (const auto& s : steps) {
        box.lo_i = std::min(box.lo_i, s[0]);
        box.hi_i = std::max(box.hi_i, s[0]);
        box.lo_j = std::min(box.lo_j, s[1]);
        box.hi_j = std::max(box.hi_j, s[1]);
    }
    return box;
}

}  // namespace

pisco::WeightSet calibrate(const CartesianKSpace& acs, const nbhd::KernelGeometry& kernel,
                           double alpha) {
    const auto steps = grid_steps(kernel, acs.nx(), acs.ny());
    const auto box = bounding_box(steps);
    const auto bb_h = static_cast<std::size_t>(box.hi_i - box.lo_i + 1);
    const auto bb_w = static_cast<std::size_t>(box.hi_j - box.lo_j + 1);
    if (acs.nx() < bb_h + 2 || acs.ny() < bb_w + 2)
        throw AcsTooSmall("calibrate: ACS region smaller than kernel patch + margin");

    const std::size_t n_coils = acs.n_coils();
    const std::size_t n_n = steps.size();
    std::vector<std::array<Eigen::Index, 2>> targets;
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(acs.nx()); ++i)
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(acs.ny()); ++j) {
            if (!acs.mask(i, j)) continue;
            bool interior = true;
            for (const auto& s : steps) {
                const Eigen::Index ni = i + s[0];
                const Eigen::Index nj = j + s[1];
                if (ni < 0 || nj < 0 || ni >= static_cast<Eigen::Index>(acs.nx()) ||
                    nj >= static_cast<Eigen::Index>(acs.ny()) || !acs.mask(ni, nj)) {
                    interior = false;
                    break;
                }
            }
            if (interior) targets.push_back({i, j});
        }
    if (targets.empty()) throw AcsTooSmall("calibrate: no fully interior ACS points");

    ComplexMatrix p(static_cast<Eigen::Index>(targets.size()),
                    static_cast<Eigen::Index>(n_n * n_coils));
    ComplexMatrix t(static_cast<Eigen::Index>(targets.size()), static_cast<Eigen::Index>(n_coils));
    for (std::size_t r = 0; r < targets.size(); ++r) {
        const auto [i, j] = targets[r];
        for (std::size_t c = 0; c < n_coils; ++c)
            t(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = acs.coils[c](i, j);
        for (std::size_t k = 0; k < n_n; ++k)
            for (std::size_t c = 0; c < n_coils; ++c)
                p(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k * n_coils + c)) =
                    acs.coils[c](i + steps[k][0], j + steps[k][1]);
    }
    pisco::WeightSet ws;
    ws.w = num::solve_tikhonov(p, t, alpha);
    return ws;
}

CartesianKSpace apply(const pisco::WeightSet& weights, const nbhd::KernelGeometry& kernel,
                      const CartesianKSpace& undersampled) {
    const auto steps = grid_steps(kernel, undersampled.nx(), undersampled.ny());
    const std::size_t n_coils = undersampled.n_coils();
    const std::size_t n_n = steps.size();
    if (weights.w.rows() != static_cast<Eigen::Index>(n_n * n_coils) ||
        weights.w.cols() != static_cast<Eigen::Index>(n_coils))
        throw ShapeMismatch("apply: weight matrix does not match kernel and coil count");

    CartesianKSpace out = undersampled;
    Eigen::RowVectorXcd patch(static_cast<Eigen::Index>(n_n * n_coils));
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(undersampled.nx()); ++i)
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(undersampled.ny()); ++j) {
            if (undersampled.mask(i, j)) continue;
            bool patch_sampled = true;
            for (const auto& s : steps) {
                const Eigen::Index ni = i + s[0];
                const Eigen::Index nj = j + s[1];
                if (ni < 0 || nj < 0 || ni >= static_cast<Eigen::Index>(undersampled.nx()) ||
                    nj >= static_cast<Eigen::Index>(undersampled.ny()) ||
                    !undersampled.mask(ni, nj)) {
                    patch_sampled = false;
                    break;
                }
            }
            if (!patch_sampled) continue;
            for (std::size_t k = 0; k < n_n; ++k)
                for (std::size_t c = 0; c < n_coils; ++c)
                    patch(static_cast<Eigen::Index>(k * n_coils + c)) =
                        undersampled.coils[c](i + steps[k][0], j + steps[k][1]);
            const Eigen::RowVectorXcd filled = patch * weights.w;
            for (std::size_t c = 0; c < n_coils; ++c)
                out.coils[c](i, j) = filled(static_cast<Eigen::Index>(c));
            out.mask(i, j) = true;
        }
    return out;
}

}  // namespace dmri::grappa
