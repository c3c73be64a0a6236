#include "dmri/neighborhood.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dmri/rng.hpp"

namespace dmri::nbhd {

KernelGeometry kernel_offsets(std::size_t h, std::size_t w, double delta) {
    if (h % 2 == 0 || w % 2 == 0) throw EvenKernel("kernel_offsets: kernel sides must be odd");
    if (h < 3 || w < 3) throw Error("kernel_offsets: kernel sides must be >= 3");
    if (!(delta > 0.0)) throw Error("kernel_offsets: delta must be positive");
    KernelGeometry kernel;
    kernel.offsets.reserve(h * w - 1);
    const auto hh = static_cast<std::ptrdiff_t>((h - 1) / 2);
    const auto hw = static_cast<std::ptrdiff_t>((w - 1) / 2);
    for (std::ptrdiff_t i = -hh; i <= hh; ++i)
        for (std::ptrdiff_t j = -hw; j <= hw; ++j) {
            if (i == 0 && j == 0) continue;
            kernel.offsets.push_back(
                {static_cast<double>(i) * delta, static_cast<double>(j) * delta});
        }
    return kernel;
}

RealMatrix build_patches(const RealMatrix& targets, const KernelGeometry& kernel) {
    if (targets.cols() != 3) throw DimensionMismatch("build_patches: targets must be m x 3");
    const Eigen::Index m = targets.rows();
    const auto nn = static_cast<Eigen::Index>(kernel.n_neighbors());
    RealMatrix patches(m * nn, 3);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < nn; ++j) {
            patches(i * nn + j, 0) = targets(i, 0) + kernel.offsets[static_cast<std::size_t>(j)][0];
            patches(i * nn + j, 1) = targets(i, 1) + kernel.offsets[static_cast<std::size_t>(j)][1];
            patches(i * nn + j, 2) = targets(i, 2);
        }
    return patches;
}

namespace {

SubsetPlan finish_plan(std::vector<std::size_t> order, const std::vector<double>& t_values,
                       std::size_t n_m) {
    SubsetPlan plan;
    plan.n_m = n_m;
    plan.n_subsets = order.size() / n_m;
    order.resize(plan.n_subsets * n_m);
    plan.order = std::move(order);
    plan.t_ranges.resize(plan.n_subsets);
    for (std::size_t s = 0; s < plan.n_subsets; ++s) {
        double lo = t_values[plan.order[s * n_m]];
        double hi = lo;
        for (std::size_t r = 1; r < n_m; ++r) {
            const double t = t_values[plan.order[s * n_m + r]];
            lo = std::min(lo, t);
            hi = std::max(hi, t);
        }
        plan.t_ranges[s] = {lo, hi};
    }
    return plan;
}

}  // namespace

SubsetPlan plan_subsets(const std::vector<double>& t_values, std::size_t n_m) {
    if (n_m < 1) throw Error("plan_subsets: n_m must be >= 1");
    if (t_values.size() < n_m)
        throw TooFewSamples("plan_subsets: fewer rows than one subset needs");
    std::vector<std::size_t> order(t_values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return t_values[a] < t_values[b]; });
    return finish_plan(std::move(order), t_values, n_m);
}

SubsetPlan plan_subsets_random(const std::vector<double>& t_values, std::size_t n_m,
                               std::uint64_t seed) {
    if (n_m < 1) throw Error("plan_subsets_random: n_m must be >= 1");
    if (t_values.size() < n_m)
        throw TooFewSamples("plan_subsets_random: fewer rows than one subset needs");
    std::vector<std::size_t> order(t_values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order);
    return finish_plan(std::move(order), t_values, n_m);
}

std::vector<SubsetSystem> partition_subsets(const std::vector<double>& t_values,
                                            const ComplexMatrix& values_t,
                                            const ComplexMatrix& values_p, std::size_t n_m) {
    const auto m = static_cast<std::size_t>(values_t.rows());
    if (t_values.size() != m || static_cast<std::size_t>(values_p.rows()) != m)
        throw DimensionMismatch("partition_subsets: row counts differ");
    const SubsetPlan plan = plan_subsets(t_values, n_m);
    std::vector<SubsetSystem> systems(plan.n_subsets);
    for (std::size_t s = 0; s < plan.n_subsets; ++s) {
        SubsetSystem& sys = systems[s];
        sys.p.resize(static_cast<Eigen::Index>(n_m), values_p.cols());
        sys.t.resize(static_cast<Eigen::Index>(n_m), values_t.cols());
        for (std::size_t r = 0; r < n_m; ++r) {
            const auto src = static_cast<Eigen::Index>(plan.order[s * n_m + r]);
            sys.p.row(static_cast<Eigen::Index>(r)) = values_p.row(src);
            sys.t.row(static_cast<Eigen::Index>(r)) = values_t.row(src);
        }
        sys.t_min = plan.t_ranges[s][0];
        sys.t_max = plan.t_ranges[s][1];
    }
    return systems;
}

Overdetermination overdetermination(std::size_t n_neighbors, std::size_t n_coils_in,
                                    std::size_t n_coils_out, double f_od) {
    if (!(f_od > 1.0)) throw Error("overdetermination: f_od must exceed 1");
    Overdetermination od;
    od.n_weights = n_neighbors * n_coils_in * n_coils_out;
    od.n_measurements =
        static_cast<std::size_t>(std::ceil(f_od * static_cast<double>(od.n_weights)));
    return od;
}

}  // namespace dmri::nbhd
