#include "dmri/recon.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace dmri::recon {

using std::numbers::pi;

std::vector<ComplexMatrix> infer_grid(const nik::SirenModel& model,
                                      const nik::FeatureEncoding& enc, double t, std::size_t nx,
                                      std::size_t ny, double data_scale) {
    if (t < 0.0 || t > 0.5) throw Error("infer_grid: t must lie in [0, 0.5]");
    RealMatrix coords(static_cast<Eigen::Index>(nx * ny), 3);
    for (std::size_t a = 0; a < nx; ++a) {
        const double kx = (static_cast<double>(a) - static_cast<double>(nx) / 2.0) /
                          static_cast<double>(nx);
        for (std::size_t b = 0; b < ny; ++b) {
            const double ky = (static_cast<double>(b) - static_cast<double>(ny) / 2.0) /
                              static_cast<double>(ny);
            const auto row = static_cast<Eigen::Index>(a * ny + b);
            coords(row, 0) = kx;
            coords(row, 1) = ky;
            coords(row, 2) = t;
        }
    }
    const ComplexMatrix pred = nik::predict(model, enc, coords) * data_scale;
    std::vector<ComplexMatrix> planes(model.n_coils());
    for (std::size_t c = 0; c < model.n_coils(); ++c) {
        planes[c].resize(static_cast<Eigen::Index>(nx), static_cast<Eigen::Index>(ny));
        for (std::size_t a = 0; a < nx; ++a)
            for (std::size_t b = 0; b < ny; ++b)
                planes[c](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                    pred(static_cast<Eigen::Index>(a * ny + b), static_cast<Eigen::Index>(c));
    }
    return planes;
}

namespace {

// Centered DFT matrix: F(a, r) = exp(-2 pi i (a - n/2)(r - n/2) / n).
ComplexMatrix centered_dft_matrix(std::size_t n) {
    ComplexMatrix f(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const double c = static_cast<double>(n) / 2.0;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t r = 0; r < n; ++r) {
            const double ph =
                -2.0 * pi * (static_cast<double>(a) - c) * (static_cast<double>(r) - c) /
                static_cast<double>(n);
            f(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(r)) =
                num::Complex(std::cos(ph), std::sin(ph));
        }
    return f;
}

}  // namespace

ComplexMatrix idft2_centered(const ComplexMatrix& kspace) {
    const auto nx = static_cast<std::size_t>(kspace.rows());
    const auto ny = static_cast<std::size_t>(kspace.cols());
    const ComplexMatrix fx = centered_dft_matrix(nx);
    const ComplexMatrix fy = centered_dft_matrix(ny);
    // Y = Fx X Fy^T  =>  X = Fx^H Y conj(Fy) / (nx ny)
    ComplexMatrix image = fx.adjoint() * kspace * fy.conjugate();
    image /= static_cast<double>(nx) * static_cast<double>(ny);
    return image;
}

ComplexMatrix coil_combine(const std::vector<ComplexMatrix>& coil_images,
                           const phantom::CoilMaps& maps) {
    if (coil_images.size() != maps.n_coils())
        throw ShapeMismatch("coil_combine: image/map coil counts differ");
    if (coil_images.empty()) throw ShapeMismatch("coil_combine: no coils");
    const Eigen::Index nx = coil_images[0].rows();
    const Eigen::Index ny = coil_images[0].cols();
    ComplexMatrix out = ComplexMatrix::Zero(nx, ny);
    for (Eigen::Index i = 0; i < nx; ++i)
        for (Eigen::Index j = 0; j < ny; ++j) {
            num::Complex acc(0.0, 0.0);
            double denom = 0.0;
            for (std::size_t c = 0; c < maps.n_coils(); ++c) {
                const num::Complex s = maps.maps[c](i, j);
                acc += std::conj(s) * coil_images[c](i, j);
                denom += std::norm(s);
            }
            out(i, j) = (denom > 1e-12) ? acc / denom : num::Complex(0.0, 0.0);
        }
    return out;
}

FrameStack nik_reconstruct(const nik::SirenModel& model, const nik::FeatureEncoding& enc,
                           const phantom::CoilMaps& maps, std::size_t n_frames,
                           double data_scale) {
    if (n_frames < 1) throw Error("nik_reconstruct: need at least one frame");
    FrameStack stack;
    stack.frames.reserve(n_frames);
    stack.t_values.reserve(n_frames);
    for (std::size_t j = 0; j < n_frames; ++j) {
        const double t = (n_frames == 1)
                             ? 0.0
                             : 0.5 * static_cast<double>(j) / static_cast<double>(n_frames - 1);
        const auto planes = infer_grid(model, enc, t, maps.nx(), maps.ny(), data_scale);
        std::vector<ComplexMatrix> images(planes.size());
        for (std::size_t c = 0; c < planes.size(); ++c) images[c] = idft2_centered(planes[c]);
        stack.frames.push_back(coil_combine(images, maps));
        stack.t_values.push_back(t);
    }
    return stack;
}

FrameStack inufft_recon(const kspace::KSampleSet& samples, const phantom::CoilMaps& maps,
                        std::size_t n_ms, std::vector<bool>* empty_bins) {
    if (samples.n_readout == 0)
        throw Error("inufft_recon: sample set lacks spoke structure (n_readout unknown)");
    const std::size_t n_fe = samples.n_readout;
    const auto bins = kspace::bin_by_navigator(samples, n_ms);
    FrameStack stack;
    if (empty_bins) empty_bins->assign(n_ms, false);
    for (std::size_t b = 0; b < n_ms; ++b) {
        const kspace::KSampleSet& bin = bins[b];
        const double t_center = 0.5 * (static_cast<double>(b) + 0.5) / static_cast<double>(n_ms);
        stack.t_values.push_back(t_center);
        if (bin.n_samples() == 0) {
            stack.frames.push_back(
                ComplexMatrix::Zero(static_cast<Eigen::Index>(maps.nx()),
                                    static_cast<Eigen::Index>(maps.ny())));
            if (empty_bins) (*empty_bins)[b] = true;
            continue;
        }
        // Radial ramp density compensation, finite at DC.
        Eigen::VectorXd w(bin.coords.rows());
        for (Eigen::Index i = 0; i < bin.coords.rows(); ++i) {
            const double r = std::hypot(bin.coords(i, 0), bin.coords(i, 1));
            w(i) = (r > 1e-12) ? r : 1.0 / (2.0 * static_cast<double>(n_fe));
        }
        const double n_spokes_bin =
            static_cast<double>(bin.n_samples()) / static_cast<double>(n_fe);
        const double norm = pi / (n_spokes_bin * static_cast<double>(n_fe));
        std::vector<ComplexMatrix> images(maps.n_coils());
        for (std::size_t c = 0; c < maps.n_coils(); ++c) {
            Eigen::VectorXcd weighted =
                bin.values.col(static_cast<Eigen::Index>(c)).cwiseProduct(w.cast<num::Complex>());
            images[c] = kspace::nudft_adjoint(weighted, bin.coords, maps.nx(), maps.ny()) * norm;
        }
        stack.frames.push_back(coil_combine(images, maps));
    }
    return stack;
}

double psnr(const RealMatrix& ref, const RealMatrix& test) {
    if (ref.rows() != test.rows() || ref.cols() != test.cols())
        throw ShapeMismatch("psnr: image shapes differ");
    const double peak = ref.maxCoeff();
    if (!(peak > 0.0)) throw Error("psnr: reference image has no positive peak");
    const double mse = (ref - test).squaredNorm() / static_cast<double>(ref.size());
    if (mse == 0.0) return 99.0;
    return std::min(99.0, 10.0 * std::log10(peak * peak / mse));
}

double ssim(const RealMatrix& ref, const RealMatrix& test) {
    if (ref.rows() != test.rows() || ref.cols() != test.cols())
        throw ShapeMismatch("ssim: image shapes differ");
    constexpr Eigen::Index kWin = 8;
    if (ref.rows() < kWin || ref.cols() < kWin)
        throw ShapeMismatch("ssim: images must be at least 8 x 8");
    const double l = ref.maxCoeff();
    const double c1 = (0.01 * l) * (0.01 * l);
    const double c2 = (0.03 * l) * (0.03 * l);

    // Summed-area tables over x, y, x^2, y^2, x y.
    const Eigen::Index nr = ref.rows(), nc = ref.cols();
    auto sat = [nr, nc](auto&& f) {
        RealMatrix s = RealMatrix::Zero(nr + 1, nc + 1);
        for (Eigen::Index i = 0; i < nr; ++i)
            for (Eigen::Index j = 0; j < nc; ++j)
                s(i + 1, j + 1) = f(i, j) + s(i, j + 1) + s(i + 1, j) - s(i, j);
        return s;
    };
    const RealMatrix sx = sat([&](Eigen::Index i, Eigen::Index j) { return ref(i, j); });
    const RealMatrix sy = sat([&](Eigen::Index i, Eigen::Index j) { return test(i, j); });
    const RealMatrix sxx = sat([&](Eigen::Index i, Eigen::Index j) { return ref(i, j) * ref(i, j); });
    const RealMatrix syy =
        sat([&](Eigen::Index i, Eigen::Index j) { return test(i, j) * test(i, j); });
    const RealMatrix sxy =
        sat([&](Eigen::Index i, Eigen::Index j) { return ref(i, j) * test(i, j); });
    auto window_sum = [kWin](const RealMatrix& s, Eigen::Index i, Eigen::Index j) {
        return s(i + kWin, j + kWin) - s(i, j + kWin) - s(i + kWin, j) + s(i, j);
    };

    const double inv_n = 1.0 / static_cast<double>(kWin * kWin);
    double acc = 0.0;
    std::size_t count = 0;
    for (Eigen::Index i = 0; i + kWin <= nr; ++i)
        for (Eigen::Index j = 0; j + kWin <= nc; ++j) {
            const double mx = window_sum(sx, i, j) * inv_n;
            const double my = window_sum(sy, i, j) * inv_n;
            const double vx = window_sum(sxx, i, j) * inv_n - mx * mx;
            const double vy = window_sum(syy, i, j) * inv_n - my * my;
            const double cov = window_sum(sxy, i, j) * inv_n - mx * my;
            acc += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
                   ((mx * mx + my * my + c1) * (vx + vy + c2));
            ++count;
        }
    return acc / static_cast<double>(count);
}

double median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return (n % 2 == 1) ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

double mean(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc / static_cast<double>(values.size());
}

}  // namespace

MetricReport evaluate_frames(const std::vector<RealMatrix>& ref,
                             const std::vector<RealMatrix>& test) {
    if (ref.size() != test.size()) throw ShapeMismatch("evaluate_frames: frame counts differ");
    if (ref.empty()) throw ShapeMismatch("evaluate_frames: no frames");
    MetricReport report;
    for (std::size_t f = 0; f < ref.size(); ++f) {
        report.psnr_frames.push_back(psnr(ref[f], test[f]));
        report.ssim_frames.push_back(ssim(ref[f], test[f]));
    }
    const auto n_frames = static_cast<Eigen::Index>(ref.size());
    const Eigen::Index nx = ref[0].rows();
    const Eigen::Index ny = ref[0].cols();
    if (n_frames >= 8) {
        // yt slices: fix an x column, stack frames along rows.
        for (Eigen::Index s = 0; s < n_frames; ++s) {
            const Eigen::Index col = s * nx / n_frames;
            RealMatrix ref_yt(n_frames, ny), test_yt(n_frames, ny);
            for (Eigen::Index f = 0; f < n_frames; ++f) {
                ref_yt.row(f) = ref[static_cast<std::size_t>(f)].row(col);
                test_yt.row(f) = test[static_cast<std::size_t>(f)].row(col);
            }
            report.ssim_yt.push_back(ssim(ref_yt, test_yt));
        }
    }
    report.psnr_mean = mean(report.psnr_frames);
    report.psnr_median = median(report.psnr_frames);
    report.ssim_mean = mean(report.ssim_frames);
    report.ssim_median = median(report.ssim_frames);
    report.ssim_yt_mean = mean(report.ssim_yt);
    report.ssim_yt_median = median(report.ssim_yt);
    return report;
}

void write_metrics_csv(const std::string& path, const MetricReport& report) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw IoError("metrics: cannot open " + path);
    std::fprintf(f, "metric,frame,value\n");
    for (std::size_t i = 0; i < report.psnr_frames.size(); ++i)
        std::fprintf(f, "psnr,%zu,%.17g\n", i, report.psnr_frames[i]);
    for (std::size_t i = 0; i < report.ssim_frames.size(); ++i)
        std::fprintf(f, "ssim,%zu,%.17g\n", i, report.ssim_frames[i]);
    for (std::size_t i = 0; i < report.ssim_yt.size(); ++i)
        std::fprintf(f, "ssim_yt,%zu,%.17g\n", i, report.ssim_yt[i]);
    std::fprintf(f, "psnr,mean,%.17g\npsnr,median,%.17g\n", report.psnr_mean, report.psnr_median);
    std::fprintf(f, "ssim,mean,%.17g\nssim,median,%.17g\n", report.ssim_mean, report.ssim_median);
    std::fprintf(f, "ssim_yt,mean,%.17g\nssim_yt,median,%.17g\n", report.ssim_yt_mean,
                 report.ssim_yt_median);
    std::fclose(f);
}

void write_pgm(const std::string& path, const RealMatrix& image, double max_value) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw IoError("pgm: cannot open " + path);
    std::fprintf(f, "P5\n%ld %ld\n255\n", static_cast<long>(image.cols()),
                 static_cast<long>(image.rows()));
    const double scale = (max_value > 0.0) ? 255.0 / max_value : 0.0;
    for (Eigen::Index i = 0; i < image.rows(); ++i)
        for (Eigen::Index j = 0; j < image.cols(); ++j) {
            const double v = std::clamp(image(i, j) * scale, 0.0, 255.0);
            const auto byte = static_cast<unsigned char>(std::lround(v));
            std::fwrite(&byte, 1, 1, f);
        }
    std::fclose(f);
}

RealMatrix magnitude(const ComplexMatrix& image) {
    RealMatrix out(image.rows(), image.cols());
    for (Eigen::Index i = 0; i < image.rows(); ++i)
        for (Eigen::Index j = 0; j < image.cols(); ++j) out(i, j) = std::abs(image(i, j));
    return out;
}

}  // namespace dmri::recon
