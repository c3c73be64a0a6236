#include "dmri/pisco.hpp"

#include <cmath>

#include "dmri/linalg.hpp"

namespace dmri::pisco {

std::vector<WeightSet> solve_subset_weights(const std::vector<nbhd::SubsetSystem>& systems,
                                            double alpha, bool with_diagnostics) {
    if (systems.size() < 2)
        throw TooFewSamples("solve_subset_weights: need at least two subset systems");
    std::vector<WeightSet> out;
    out.reserve(systems.size());
    for (std::size_t s = 0; s < systems.size(); ++s) {
        const nbhd::SubsetSystem& sys = systems[s];
        if (sys.p.rows() < sys.p.cols())
            throw Error("solve_subset_weights: subset system is underdetermined");
        WeightSet ws;
        ws.w = num::solve_tikhonov(sys.p, sys.t, alpha);
        ws.subset_id = static_cast<int>(s);
        if (with_diagnostics)
            ws.min_normal_eigenvalue = num::normal_matrix_min_eigenvalue(sys.p, alpha);
        out.push_back(std::move(ws));
    }
    return out;
}

namespace {

double smooth_l1(const ComplexMatrix& a, const ComplexMatrix& b, double eps) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            const num::Complex d = a(i, j) - b(i, j);
            acc += std::sqrt(d.real() * d.real() + eps * eps) - eps;
            acc += std::sqrt(d.imag() * d.imag() + eps * eps) - eps;
        }
    return acc;
}

}  // namespace

double pisco_loss(const std::vector<WeightSet>& weights, double eps_abs) {
    if (weights.size() < 2) throw TooFewSamples("pisco_loss: need at least two weight sets");
    const auto n_s = weights.size();
    for (const WeightSet& ws : weights)
        if (ws.w.rows() != weights[0].w.rows() || ws.w.cols() != weights[0].w.cols())
            throw ShapeMismatch("pisco_loss: weight set shapes differ");
    double acc = 0.0;
    for (std::size_t i = 0; i < n_s; ++i)
        for (std::size_t j = 0; j < n_s; ++j)
            acc += smooth_l1(weights[i].w, weights[j].w, eps_abs);
    return acc / (static_cast<double>(n_s) * static_cast<double>(n_s));
}

NodeId pisco_loss_tape(Tape& tape, const std::vector<NodeId>& w_nodes, double eps_abs) {
    if (w_nodes.size() < 2) throw TooFewSamples("pisco_loss_tape: need at least two weight sets");
    const auto n_s = w_nodes.size();
    NodeId acc = -1;
    for (std::size_t i = 0; i < n_s; ++i)
        for (std::size_t j = 0; j < n_s; ++j) {
            const NodeId term =
                tape.sum_all(tape.abs_smooth(tape.sub(w_nodes[i], w_nodes[j]), eps_abs));
            acc = (acc < 0) ? term : tape.add(acc, term);
        }
    return tape.scale(acc, 1.0 / (static_cast<double>(n_s) * static_cast<double>(n_s)));
}

PiscoStepResult pisco_step_features(const nik::SirenModel& model, const RealTensor& features,
                                    const std::vector<double>& t_values, std::size_t n_neighbors,
                                    const PiscoConfig& cfg, std::size_t step_index,
                                    std::uint64_t seed) {
    const std::size_t m = t_values.size();
    if (features.rows() != m * (1 + n_neighbors))
        throw ShapeMismatch("pisco_step: features must stack targets then patches");
    const std::size_t n_coils = model.n_coils();
    const std::size_t n_out = (cfg.coils_out_per_iter == 0)
                                  ? n_coils
                                  : std::min(cfg.coils_out_per_iter, n_coils);
    const std::size_t window_start =
        (n_out < n_coils) ? (step_index * n_out) % n_coils : 0;

    const auto od = nbhd::overdetermination(n_neighbors, n_coils, n_out, cfg.f_od);
    const nbhd::SubsetPlan plan = cfg.random_partition
                                      ? nbhd::plan_subsets_random(t_values, od.n_measurements, seed)
                                      : nbhd::plan_subsets(t_values, od.n_measurements);
    if (plan.n_subsets < 2)
        throw TooFewSamples("pisco_step: batch too small for two subsets (need >= 2 * n_m rows)");

    const std::size_t row_width = 2 * n_coils;  // network output row, paired
    auto build_loss = [&](Tape& tape, NodeId pred) {
        std::vector<NodeId> w_nodes;
        w_nodes.reserve(plan.n_subsets);
        for (std::size_t s = 0; s < plan.n_subsets; ++s) {
            std::vector<std::size_t> t_idx;
            t_idx.reserve(plan.n_m * 2 * n_out);
            std::vector<std::size_t> p_idx;
            p_idx.reserve(plan.n_m * 2 * n_neighbors * n_coils);
            for (std::size_t r = 0; r < plan.n_m; ++r) {
                const std::size_t tgt = plan.order[s * plan.n_m + r];
                for (std::size_t c = 0; c < n_out; ++c) {
                    const std::size_t coil = (window_start + c) % n_coils;
                    t_idx.push_back(tgt * row_width + 2 * coil);
                    t_idx.push_back(tgt * row_width + 2 * coil + 1);
                }
                for (std::size_t j = 0; j < n_neighbors; ++j) {
                    const std::size_t src_row = m + tgt * n_neighbors + j;
                    for (std::size_t c = 0; c < n_coils; ++c) {
                        p_idx.push_back(src_row * row_width + 2 * c);
                        p_idx.push_back(src_row * row_width + 2 * c + 1);
                    }
                }
            }
            const NodeId t_node =
                tape.gather(pred, std::move(t_idx), {plan.n_m, 2 * n_out});
            const NodeId p_node =
                tape.gather(pred, std::move(p_idx), {plan.n_m, 2 * n_neighbors * n_coils});
            w_nodes.push_back(tape.tikhonov(p_node, t_node, cfg.alpha, cfg.grad_through_p));
        }
        return pisco_loss_tape(tape, w_nodes, cfg.eps_abs);
    };

    const nik::LossStepResult step = nik::loss_step(model, features, build_loss, cfg.lambda);
    PiscoStepResult out;
    out.loss = step.loss;
    out.grads = step.grads;
    out.n_subsets = plan.n_subsets;
    out.coil_window_start = window_start;
    return out;
}

PiscoStepResult pisco_step(const nik::SirenModel& model, const nik::FeatureEncoding& enc,
                           const RealMatrix& batch_coords, const nbhd::KernelGeometry& kernel,
                           const PiscoConfig& cfg, std::size_t step_index, std::uint64_t seed) {
    if (batch_coords.cols() != 3) throw DimensionMismatch("pisco_step: coords must be m x 3");
    const std::size_t m = static_cast<std::size_t>(batch_coords.rows());
    const RealMatrix patches = nbhd::build_patches(batch_coords, kernel);
    RealMatrix all(batch_coords.rows() + patches.rows(), 3);
    all.topRows(batch_coords.rows()) = batch_coords;
    all.bottomRows(patches.rows()) = patches;
    const RealTensor features = nik::encode(enc, all);
    std::vector<double> t_values(m);
    for (std::size_t i = 0; i < m; ++i) t_values[i] = batch_coords(static_cast<Eigen::Index>(i), 2);
    return pisco_step_features(model, features, t_values, kernel.n_neighbors(), cfg, step_index,
                               seed);
}

}  // namespace dmri::pisco
