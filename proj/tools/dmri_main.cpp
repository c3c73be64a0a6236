// Command-line front end: simulate -> train -> reconstruct -> evaluate, plus
// a Cartesian GRAPPA subcommand. All array exchange uses the NDA container.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dmri/checkpoint.hpp"
#include "dmri/config.hpp"
#include "dmri/grappa.hpp"
#include "dmri/kspace.hpp"
#include "dmri/ndarray_io.hpp"
#include "dmri/recon.hpp"
#include "dmri/trainer.hpp"

namespace fs = std::filesystem;
using namespace dmri;

namespace {

std::string join(const std::string& dir, const std::string& name) { return dir + "/" + name; }

phantom::DynamicPhantom phantom_from_config(const cli::ExperimentConfig& cfg) {
    if (cfg.ellipses.empty()) return phantom::default_phantom(cfg.nx, cfg.ny);
    phantom::DynamicPhantom ph;
    ph.nx = cfg.nx;
    ph.ny = cfg.ny;
    ph.ellipses = cfg.ellipses;
    return ph;
}

void write_frames_nda(const std::string& path, const std::vector<num::ComplexMatrix>& frames) {
    if (frames.empty()) throw Error("no frames to write");
    const auto nx = static_cast<std::uint64_t>(frames[0].rows());
    const auto ny = static_cast<std::uint64_t>(frames[0].cols());
    std::vector<num::Complex> data;
    data.reserve(frames.size() * nx * ny);
    for (const auto& f : frames) data.insert(data.end(), f.data(), f.data() + f.size());
    nda::write_nda(path, nda::make_c128({frames.size(), nx, ny}, std::move(data)));
}

std::vector<num::ComplexMatrix> read_frames_nda(const std::string& path) {
    const nda::NdArray a = nda::read_nda(path);
    if (a.dims.size() != 3) throw ShapeMismatch("frame stack must be n x nx x ny: " + path);
    std::vector<num::ComplexMatrix> frames;
    const std::size_t plane = a.dims[1] * a.dims[2];
    for (std::size_t f = 0; f < a.dims[0]; ++f) {
        num::ComplexMatrix m(static_cast<Eigen::Index>(a.dims[1]),
                             static_cast<Eigen::Index>(a.dims[2]));
        if (a.is_complex()) {
            std::copy(a.cdata.begin() + static_cast<std::ptrdiff_t>(f * plane),
                      a.cdata.begin() + static_cast<std::ptrdiff_t>((f + 1) * plane), m.data());
        } else {
            for (std::size_t i = 0; i < plane; ++i)
                m.data()[i] = num::Complex(a.rdata[f * plane + i], 0.0);
        }
        frames.push_back(std::move(m));
    }
    return frames;
}

phantom::CoilMaps read_maps_nda(const std::string& path) {
    const nda::NdArray a = nda::read_nda(path);
    if (a.dims.size() != 3 || !a.is_complex())
        throw ShapeMismatch("coil maps must be c128 coils x nx x ny: " + path);
    phantom::CoilMaps maps;
    const std::size_t plane = a.dims[1] * a.dims[2];
    for (std::size_t c = 0; c < a.dims[0]; ++c) {
        num::ComplexMatrix m(static_cast<Eigen::Index>(a.dims[1]),
                             static_cast<Eigen::Index>(a.dims[2]));
        std::copy(a.cdata.begin() + static_cast<std::ptrdiff_t>(c * plane),
                  a.cdata.begin() + static_cast<std::ptrdiff_t>((c + 1) * plane), m.data());
        maps.maps.push_back(std::move(m));
    }
    return maps;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
    cli::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = cli::parse_config_file(config_path);
    fs::create_directories(out_dir);

    const phantom::DynamicPhantom ph = phantom_from_config(cfg);
    const phantom::CoilMaps maps = phantom::coil_maps(cfg.n_coils, cfg.nx, cfg.ny, cfg.seed);
    const kspace::Trajectory traj = kspace::golden_angle_radial(cfg.n_spokes, cfg.n_fe);
    const phantom::Navigator nav = phantom::navigator_signal(cfg.n_spokes, cfg.period);
    kspace::KSampleSet samples = kspace::simulate_acquisition(ph, maps, traj, nav);
    samples = kspace::accelerate(samples, cfg.accel);

    const std::size_t m = samples.n_samples();
    {
        std::vector<num::Complex> v(samples.values.data(), samples.values.data() + samples.values.size());
        nda::write_nda(join(out_dir, "kspace.nda"), nda::make_c128({m, cfg.n_coils}, std::move(v)));
    }
    {
        std::vector<double> c(samples.coords.data(), samples.coords.data() + samples.coords.size());
        nda::write_nda(join(out_dir, "coords.nda"), nda::make_f64({m, 3}, std::move(c)));
    }
    {
        std::vector<num::Complex> md;
        md.reserve(cfg.n_coils * cfg.nx * cfg.ny);
        for (const auto& map : maps.maps) md.insert(md.end(), map.data(), map.data() + map.size());
        nda::write_nda(join(out_dir, "maps.nda"),
                       nda::make_c128({cfg.n_coils, cfg.nx, cfg.ny}, std::move(md)));
    }
    {
        std::vector<double> kept;
        for (std::size_t s = 0; s < samples.n_spokes(); ++s)
            kept.push_back(samples.coords(static_cast<Eigen::Index>(s * samples.n_readout), 2));
        const std::size_t n = kept.size();
        nda::write_nda(join(out_dir, "nav.nda"), nda::make_f64({n}, std::move(kept)));
    }
    {
        std::vector<num::ComplexMatrix> refs;
        for (std::size_t j = 0; j < cfg.eval_frames; ++j) {
            const double t = (cfg.eval_frames == 1)
                                 ? 0.0
                                 : 0.5 * static_cast<double>(j) /
                                       static_cast<double>(cfg.eval_frames - 1);
            refs.push_back(phantom::render_frame(ph, t));
        }
        write_frames_nda(join(out_dir, "ref_frames.nda"), refs);
    }
    cli::write_config_file(join(out_dir, "config.ini"), cfg);
    std::fprintf(stderr, "simulate: %zu samples, %zu coils -> %s\n", m, cfg.n_coils,
                 out_dir.c_str());
    return 0;
}

int cmd_train(const std::string& data_dir, const std::string& out_dir, const std::string& pisco) {
    cli::ExperimentConfig cfg = cli::parse_config_file(join(data_dir, "config.ini"));
    if (pisco == "on") cfg.pisco_enabled = true;
    else if (pisco == "off") cfg.pisco_enabled = false;
    else if (!pisco.empty()) throw ConfigError("train: --pisco must be on or off");
    fs::create_directories(out_dir);

    kspace::KSampleSet data;
    {
        const nda::NdArray k = nda::read_nda(join(data_dir, "kspace.nda"));
        const nda::NdArray c = nda::read_nda(join(data_dir, "coords.nda"));
        if (k.dims.size() != 2 || c.dims.size() != 2 || c.dims[1] != 3 || k.dims[0] != c.dims[0])
            throw ShapeMismatch("train: kspace/coords dims inconsistent");
        data.values.resize(static_cast<Eigen::Index>(k.dims[0]),
                           static_cast<Eigen::Index>(k.dims[1]));
        std::copy(k.cdata.begin(), k.cdata.end(), data.values.data());
        data.coords.resize(static_cast<Eigen::Index>(c.dims[0]), 3);
        std::copy(c.rdata.begin(), c.rdata.end(), data.coords.data());
        data.n_readout = cfg.n_fe;
    }
    const phantom::CoilMaps maps = read_maps_nda(join(data_dir, "maps.nda"));

    const nik::FeatureEncoding enc =
        nik::make_encoding(cfg.n_freq, cfg.sigma_k, cfg.sigma_t, cfg.seed);
    nik::SirenModel model =
        nik::make_siren(enc.n_features(), cfg.hidden, cfg.layers, cfg.n_coils, cfg.omega0);
    nik::siren_init(model, cfg.seed);

    train::TrainConfig tc;
    tc.epochs = cfg.epochs;
    tc.pretrain_epochs = cfg.e_pre;
    tc.batch = cfg.batch;
    tc.adam.lr = cfg.lr;
    tc.seed = cfg.seed;
    tc.pisco_enabled = cfg.pisco_enabled;
    tc.pisco.alpha = cfg.alpha;
    tc.pisco.f_od = cfg.f_od;
    tc.pisco.lambda = cfg.lambda;
    tc.pisco.coils_out_per_iter = cfg.coils_out;
    tc.pisco.grad_through_p = cfg.grad_p;
    tc.pisco.random_partition = cfg.random_partition;
    tc.kernel = nbhd::kernel_offsets(cfg.kernel_h, cfg.kernel_w, 1.0 / static_cast<double>(cfg.n_fe));

    const train::TrainResult result = train::train(data, model, enc, tc);

    nik::Checkpoint ckpt;
    ckpt.model = std::move(model);
    ckpt.encoding = enc;
    ckpt.maps = maps;
    ckpt.data_scale = result.data_scale;
    ckpt.seed = cfg.seed;
    ckpt.grid_nx = cfg.nx;
    ckpt.grid_ny = cfg.ny;
    nik::save_checkpoint(out_dir, ckpt);
    result.log.write_csv(join(out_dir, "trainlog.csv"));
    cli::write_config_file(join(out_dir, "config.ini"), cfg);
    std::fprintf(stderr, "train: %zu steps logged -> %s\n", result.log.records.size(),
                 out_dir.c_str());
    return 0;
}

int cmd_reconstruct(const std::string& model_dir, const std::string& out_file,
                    std::size_t n_frames, const std::string& pgm_dir) {
    const nik::Checkpoint ckpt = nik::load_checkpoint(model_dir);
    const recon::FrameStack stack =
        recon::nik_reconstruct(ckpt.model, ckpt.encoding, ckpt.maps, n_frames, ckpt.data_scale);
    write_frames_nda(out_file, stack.frames);
    if (!pgm_dir.empty()) {
        fs::create_directories(pgm_dir);
        double peak = 0.0;
        std::vector<num::RealMatrix> mags;
        for (const auto& f : stack.frames) {
            mags.push_back(recon::magnitude(f));
            peak = std::max(peak, mags.back().maxCoeff());
        }
        for (std::size_t i = 0; i < mags.size(); ++i) {
            char name[64];
            std::snprintf(name, sizeof(name), "frame_%03zu.pgm", i);
            recon::write_pgm(join(pgm_dir, name), mags[i], peak);
        }
    }
    std::fprintf(stderr, "reconstruct: %zu frames -> %s\n", stack.frames.size(), out_file.c_str());
    return 0;
}

int cmd_evaluate(const std::string& ref_file, const std::string& test_file,
                 const std::string& out_csv) {
    const auto ref = read_frames_nda(ref_file);
    const auto test = read_frames_nda(test_file);
    std::vector<num::RealMatrix> ref_mags, test_mags;
    for (const auto& f : ref) ref_mags.push_back(recon::magnitude(f));
    for (const auto& f : test) test_mags.push_back(recon::magnitude(f));
    const recon::MetricReport report = recon::evaluate_frames(ref_mags, test_mags);
    recon::write_metrics_csv(out_csv, report);
    std::fprintf(stderr, "evaluate: psnr median %.3f dB, ssim median %.5f -> %s\n",
                 report.psnr_median, report.ssim_median, out_csv.c_str());
    return 0;
}

int cmd_grappa(const std::string& kspace_file, const std::string& mask_file,
               std::size_t acs_rows, const std::string& out_file, double alpha) {
    const nda::NdArray k = nda::read_nda(kspace_file);
    if (k.dims.size() != 3 || !k.is_complex())
        throw ShapeMismatch("grappa: k-space must be c128 coils x nx x ny");
    const nda::NdArray mk = nda::read_nda(mask_file);
    if (mk.dims.size() != 2 || mk.dims[0] != k.dims[1] || mk.dims[1] != k.dims[2])
        throw ShapeMismatch("grappa: mask dims must match k-space planes");

    grappa::CartesianKSpace ksp;
    const std::size_t plane = k.dims[1] * k.dims[2];
    for (std::size_t c = 0; c < k.dims[0]; ++c) {
        num::ComplexMatrix m(static_cast<Eigen::Index>(k.dims[1]),
                             static_cast<Eigen::Index>(k.dims[2]));
        std::copy(k.cdata.begin() + static_cast<std::ptrdiff_t>(c * plane),
                  k.cdata.begin() + static_cast<std::ptrdiff_t>((c + 1) * plane), m.data());
        ksp.coils.push_back(std::move(m));
    }
    ksp.mask.resize(static_cast<Eigen::Index>(k.dims[1]), static_cast<Eigen::Index>(k.dims[2]));
    for (std::size_t i = 0; i < plane; ++i)
        ksp.mask.data()[i] = mk.rdata[i] != 0.0;
    ksp.zero_unsampled();

    const auto kernel = grappa::undersampled_rows_kernel(1.0 / static_cast<double>(ksp.nx()),
                                                         1.0 / static_cast<double>(ksp.ny()));
    const grappa::CartesianKSpace acs = grappa::central_acs_band(ksp, acs_rows);
    const pisco::WeightSet weights = grappa::calibrate(acs, kernel, alpha);
    const grappa::CartesianKSpace filled = grappa::apply(weights, kernel, ksp);

    std::vector<num::Complex> out;
    out.reserve(k.cdata.size());
    for (const auto& coil : filled.coils)
        out.insert(out.end(), coil.data(), coil.data() + coil.size());
    nda::write_nda(out_file, nda::make_c128({k.dims[0], k.dims[1], k.dims[2]}, std::move(out)));
    std::fprintf(stderr, "grappa: filled k-space -> %s\n", out_file.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dynamic MRI reconstruction with a PISCO-regularized k-space network"};
    app.require_subcommand(1);

    std::string config_path, out_dir, data_dir, model_dir, out_file, pgm_dir;
    std::string ref_file, test_file, out_csv, kspace_file, mask_file, pisco_flag;
    std::size_t n_frames = 50;
    std::size_t acs_rows = 16;
    double grappa_alpha = 1e-6;

    auto* sim = app.add_subcommand("simulate", "generate radial multi-coil k-space data");
    sim->add_option("--config", config_path, "experiment config (defaults when omitted)");
    sim->add_option("--out", out_dir, "output directory")->required();

    auto* tr = app.add_subcommand("train", "fit the k-space network to simulated data");
    tr->add_option("--data", data_dir, "simulate output directory")->required();
    tr->add_option("--out", out_dir, "checkpoint directory")->required();
    tr->add_option("--pisco", pisco_flag, "on|off (overrides config)");

    auto* rec = app.add_subcommand("reconstruct", "sample the model on a Cartesian grid");
    rec->add_option("--model", model_dir, "checkpoint directory")->required();
    rec->add_option("--out", out_file, "output frame stack (.nda)")->required();
    rec->add_option("--frames", n_frames, "number of frames (default 50)");
    rec->add_option("--pgm", pgm_dir, "optional directory for magnitude PGM dumps");

    auto* ev = app.add_subcommand("evaluate", "PSNR/SSIM against a reference stack");
    ev->add_option("--ref", ref_file, "reference frame stack (.nda)")->required();
    ev->add_option("--test", test_file, "test frame stack (.nda)")->required();
    ev->add_option("--out", out_csv, "metrics CSV")->required();

    auto* gr = app.add_subcommand("grappa", "calibrate and fill Cartesian k-space");
    gr->add_option("--kspace", kspace_file, "c128 coils x nx x ny (.nda)")->required();
    gr->add_option("--mask", mask_file, "f64 nx x ny 0/1 mask (.nda)")->required();
    gr->add_option("--acs-rows", acs_rows, "height of the central calibration band");
    gr->add_option("--out", out_file, "filled k-space (.nda)")->required();
    gr->add_option("--alpha", grappa_alpha, "calibration ridge weight");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sim->parsed()) return cmd_simulate(config_path, out_dir);
        if (tr->parsed()) return cmd_train(data_dir, out_dir, pisco_flag);
        if (rec->parsed()) return cmd_reconstruct(model_dir, out_file, n_frames, pgm_dir);
        if (ev->parsed()) return cmd_evaluate(ref_file, test_file, out_csv);
        if (gr->parsed()) return cmd_grappa(kspace_file, mask_file, acs_rows, out_file, grappa_alpha);
    } catch (const NonFiniteLoss& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const SingularSystem& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const BadMagic& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const TruncatedPayload& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const UnknownDtype& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
