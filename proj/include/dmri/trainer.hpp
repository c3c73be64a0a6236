#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dmri/kspace.hpp"
#include "dmri/nik.hpp"
#include "dmri/pisco.hpp"

namespace dmri::train {

using num::RealTensor;

// Standard Adam with bias correction. One state per parameter list; the DC
// and PISCO paths each own a separate instance so their moment estimates
// never mix.
struct AdamState {
    std::vector<RealTensor> m;
    std::vector<RealTensor> v;
    std::size_t step = 0;
};

struct AdamConfig {
    double lr = 3e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

void adam_step(const std::vector<RealTensor*>& params, const std::vector<RealTensor>& grads,
               AdamState& state, const AdamConfig& cfg);

struct TrainConfig {
    std::size_t epochs = 1000;
    std::size_t pretrain_epochs = 200;  // PISCO joins after this many epochs
    std::size_t batch = 10000;
    AdamConfig adam;  // shared settings for both optimizers
    std::uint64_t seed = 1234;
    bool pisco_enabled = true;
    pisco::PiscoConfig pisco;
    nik::DcLossConfig dc;
    nbhd::KernelGeometry kernel;  // neighbor pattern for PISCO patches
};

struct TrainRecord {
    std::size_t epoch = 0;
    std::size_t step = 0;
    double l_dc = 0.0;
    std::optional<double> l_pisco;
    std::optional<double> ratio;  // l_dc / l_pisco
    double ms = 0.0;
};

struct TrainLog {
    std::vector<TrainRecord> records;
    void write_csv(const std::string& path) const;
};

struct TrainResult {
    TrainLog log;
    double data_scale = 1.0;  // max |y| divided out of the measurements
};

// Alternating training per batch: a data-consistency Adam update, then (after
// the pretraining gate) an independent PISCO Adam update on the same batch's
// coordinates. Deterministic for a fixed config and seed; the only
// non-reproducible output is the wall-time column of the log.
TrainResult train(const kspace::KSampleSet& data, nik::SirenModel& model,
                  const nik::FeatureEncoding& enc, const TrainConfig& cfg);

}  // namespace dmri::train
