#include "dmri/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "dmri/neighborhood.hpp"
#include "dmri/rng.hpp"

namespace dmri::train {

void adam_step(const std::vector<RealTensor*>& params, const std::vector<RealTensor>& grads,
               AdamState& state, const AdamConfig& cfg) {
    if (params.size() != grads.size())
        throw ShapeMismatch("adam_step: parameter/gradient counts differ");
    if (state.m.empty()) {
        for (const RealTensor* p : params) {
            state.m.emplace_back(RealTensor(p->shape));
            state.v.emplace_back(RealTensor(p->shape));
        }
    }
    state.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        RealTensor& p = *params[i];
        const RealTensor& g = grads[i];
        if (!p.same_shape(g) || !p.same_shape(state.m[i]))
            throw ShapeMismatch("adam_step: shape mismatch at parameter " + std::to_string(i));
        for (std::size_t k = 0; k < p.size(); ++k) {
            double& m = state.m[i].data[k];
            double& v = state.v[i].data[k];
            m = cfg.beta1 * m + (1.0 - cfg.beta1) * g.data[k];
            v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.data[k] * g.data[k];
            p.data[k] -= cfg.lr * (m / bc1) / (std::sqrt(v / bc2) + cfg.eps);
        }
    }
}

void TrainLog::write_csv(const std::string& path) const {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw IoError("trainlog: cannot open " + path);
    std::fprintf(f, "epoch,step,l_dc,l_pisco,ratio,ms\n");
    for (const TrainRecord& r : records) {
        std::fprintf(f, "%zu,%zu,%.17g,", r.epoch, r.step, r.l_dc);
        if (r.l_pisco) std::fprintf(f, "%.17g", *r.l_pisco);
        std::fprintf(f, ",");
        if (r.ratio) std::fprintf(f, "%.17g", *r.ratio);
        std::fprintf(f, ",%.3f\n", r.ms);
    }
    std::fclose(f);
}

namespace {

RealTensor gather_feature_rows(const RealTensor& src, const std::vector<std::size_t>& rows) {
    RealTensor out({rows.size(), src.cols()});
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.mat().row(static_cast<Eigen::Index>(i)) =
            src.mat().row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

}  // namespace

TrainResult train(const kspace::KSampleSet& data, nik::SirenModel& model,
                  const nik::FeatureEncoding& enc, const TrainConfig& cfg) {
    const std::size_t m = data.n_samples();
    if (m == 0) throw Error("train: empty sample set");
    if (model.n_coils() != data.n_coils())
        throw ShapeMismatch("train: model coil count != data coil count");
    if (cfg.batch < 1) throw Error("train: batch size must be >= 1");

    TrainResult result;
    // Normalize measurement magnitudes to [0, 1]; the scale is reported so
    // inference can undo it.
    double scale = 0.0;
    for (Eigen::Index i = 0; i < data.values.rows(); ++i)
        for (Eigen::Index j = 0; j < data.values.cols(); ++j)
            scale = std::max(scale, std::abs(data.values(i, j)));
    if (scale == 0.0) scale = 1.0;
    result.data_scale = scale;
    num::ComplexMatrix values = data.values / scale;

    const RealTensor enc_targets = nik::encode(enc, data.coords);
    RealTensor enc_patches;
    std::size_t n_neighbors = 0;
    std::size_t min_pisco_rows = 0;
    if (cfg.pisco_enabled) {
        n_neighbors = cfg.kernel.n_neighbors();
        if (n_neighbors == 0) throw Error("train: PISCO enabled but kernel is empty");
        const std::size_t n_out = (cfg.pisco.coils_out_per_iter == 0)
                                      ? model.n_coils()
                                      : std::min(cfg.pisco.coils_out_per_iter, model.n_coils());
        const auto od =
            nbhd::overdetermination(n_neighbors, model.n_coils(), n_out, cfg.pisco.f_od);
        min_pisco_rows = 2 * od.n_measurements;
        if (cfg.batch < min_pisco_rows)
            throw Error("train: batch must hold at least two PISCO subsets (2 * n_m = " +
                        std::to_string(min_pisco_rows) + ")");
        enc_patches = nik::encode(enc, nbhd::build_patches(data.coords, cfg.kernel));
    }

    const std::vector<RealTensor*> params = model.parameters();
    AdamState opt_dc;
    AdamState opt_pisco;
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t global_step = 0;
    std::size_t pisco_steps = 0;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        Rng shuffle_rng(Rng::derive(cfg.seed, 0x73687566ull ^ (epoch * 0x9e37ull)));
        shuffle_rng.shuffle(order);
        for (std::size_t lo = 0; lo < m; lo += cfg.batch) {
            const auto t0 = std::chrono::steady_clock::now();
            const std::size_t hi = std::min(m, lo + cfg.batch);
            const std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(lo),
                                                 order.begin() + static_cast<std::ptrdiff_t>(hi));
            ++global_step;

            // Data-consistency update.
            RealTensor feats = gather_feature_rows(enc_targets, batch);
            num::ComplexMatrix meas(static_cast<Eigen::Index>(batch.size()), values.cols());
            for (std::size_t i = 0; i < batch.size(); ++i)
                meas.row(static_cast<Eigen::Index>(i)) =
                    values.row(static_cast<Eigen::Index>(batch[i]));
            const nik::LossStepResult dc = nik::loss_step(
                model, feats,
                [&](num::Tape& tape, num::NodeId pred) {
                    return nik::dc_loss_tape(tape, pred, meas, cfg.dc);
                },
                1.0);
            if (!std::isfinite(dc.loss))
                throw NonFiniteLoss("train: non-finite L_DC at epoch " + std::to_string(epoch) +
                                    " step " + std::to_string(global_step));
            adam_step(params, dc.grads, opt_dc, cfg.adam);

            TrainRecord rec;
            rec.epoch = epoch;
            rec.step = global_step;
            rec.l_dc = dc.loss;

            // Alternating PISCO update on the same batch's coordinates.
            if (cfg.pisco_enabled && epoch > cfg.pretrain_epochs &&
                batch.size() >= min_pisco_rows) {
                std::vector<std::size_t> rows;
                rows.reserve(batch.size() * (1 + n_neighbors));
                for (std::size_t b : batch) rows.push_back(b);
                // patch row block of target b starts at b * n_neighbors
                std::vector<std::size_t> patch_rows;
                patch_rows.reserve(batch.size() * n_neighbors);
                for (std::size_t b : batch)
                    for (std::size_t j = 0; j < n_neighbors; ++j)
                        patch_rows.push_back(b * n_neighbors + j);
                RealTensor pisco_feats({batch.size() * (1 + n_neighbors), enc_targets.cols()});
                pisco_feats.mat().topRows(static_cast<Eigen::Index>(batch.size())) =
                    gather_feature_rows(enc_targets, batch).mat();
                pisco_feats.mat().bottomRows(static_cast<Eigen::Index>(patch_rows.size())) =
                    gather_feature_rows(enc_patches, patch_rows).mat();
                std::vector<double> t_values(batch.size());
                for (std::size_t i = 0; i < batch.size(); ++i)
                    t_values[i] = data.coords(static_cast<Eigen::Index>(batch[i]), 2);

                const pisco::PiscoStepResult ps = pisco::pisco_step_features(
                    model, pisco_feats, t_values, n_neighbors, cfg.pisco, pisco_steps,
                    Rng::derive(cfg.seed, 0x72616e64ull ^ global_step));
                if (!std::isfinite(ps.loss))
                    throw NonFiniteLoss("train: non-finite L_PISCO at epoch " +
                                        std::to_string(epoch));
                adam_step(params, ps.grads, opt_pisco, cfg.adam);
                ++pisco_steps;
                rec.l_pisco = ps.loss;
                rec.ratio = (ps.loss != 0.0) ? std::optional<double>(dc.loss / ps.loss)
                                             : std::nullopt;
            }

            const auto t1 = std::chrono::steady_clock::now();
            rec.ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            result.log.records.push_back(rec);
        }
    }
    return result;
}

}  // namespace dmri::train
