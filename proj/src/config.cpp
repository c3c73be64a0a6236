#include "dmri/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dmri/errors.hpp"

namespace dmri::cli {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value for " + key + ": '" + v + "'");
    }
}

std::size_t parse_count(const std::string& key, const std::string& v) {
    const double x = parse_double(key, v);
    if (x < 0 || x != std::floor(x))
        throw ConfigError("config: " + key + " must be a nonnegative integer");
    return static_cast<std::size_t>(x);
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "on" || v == "1") return true;
    if (v == "false" || v == "off" || v == "0") return false;
    throw ConfigError("config: bad boolean for " + key + ": '" + v + "'");
}

phantom::Ellipse parse_ellipse(const std::string& key, const std::string& v) {
    std::istringstream in(v);
    double cx, cy, a, b, angle, re, im, kappa;
    if (!(in >> cx >> cy >> a >> b >> angle >> re >> im >> kappa))
        throw ConfigError("config: " + key +
                          " needs 8 numbers: cx cy a b angle amp_re amp_im kappa");
    std::string rest;
    if (in >> rest) throw ConfigError("config: trailing junk in " + key);
    if (!(a > 0.0) || !(b > 0.0)) throw ConfigError("config: " + key + " semi-axes must be > 0");
    if (std::hypot(re, im) > 10.0)
        throw ConfigError("config: " + key + " amplitude magnitude must be <= 10");
    return phantom::Ellipse{cx, cy, a, b, angle, {re, im}, kappa};
}

void parse_kernel(const std::string& v, std::size_t& h, std::size_t& w) {
    const auto x = v.find('x');
    if (x == std::string::npos) throw ConfigError("config: kernel must look like 3x3");
    h = parse_count("kernel", v.substr(0, x));
    w = parse_count("kernel", v.substr(x + 1));
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config: malformed section at line " + std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            if (section != "phantom" && section != "trajectory" && section != "nik" &&
                section != "train" && section != "pisco")
                throw ConfigError("config: unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: expected key = value at line " + std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty())
            throw ConfigError("config: key '" + key + "' outside any section");

        if (section == "phantom") {
            if (key == "nx") cfg.nx = parse_count(key, value);
            else if (key == "ny") cfg.ny = parse_count(key, value);
            else if (key == "n_coils") cfg.n_coils = parse_count(key, value);
            else if (key == "period") cfg.period = parse_count(key, value);
            else if (key == "eval_frames") cfg.eval_frames = parse_count(key, value);
            else if (key.rfind("ellipse", 0) == 0) cfg.ellipses.push_back(parse_ellipse(key, value));
            else throw ConfigError("config: unknown key '" + key + "' in [phantom]");
        } else if (section == "trajectory") {
            if (key == "n_spokes") cfg.n_spokes = parse_count(key, value);
            else if (key == "n_fe") cfg.n_fe = parse_count(key, value);
            else if (key == "r") cfg.accel = parse_count(key, value);
            else throw ConfigError("config: unknown key '" + key + "' in [trajectory]");
        } else if (section == "nik") {
            if (key == "layers") cfg.layers = parse_count(key, value);
            else if (key == "hidden") cfg.hidden = parse_count(key, value);
            else if (key == "n_freq") cfg.n_freq = parse_count(key, value);
            else if (key == "omega0") cfg.omega0 = parse_double(key, value);
            else if (key == "sigma_k") cfg.sigma_k = parse_double(key, value);
            else if (key == "sigma_t") cfg.sigma_t = parse_double(key, value);
            else throw ConfigError("config: unknown key '" + key + "' in [nik]");
        } else if (section == "train") {
            if (key == "epochs") cfg.epochs = parse_count(key, value);
            else if (key == "e_pre") cfg.e_pre = parse_count(key, value);
            else if (key == "batch") cfg.batch = parse_count(key, value);
            else if (key == "lr") cfg.lr = parse_double(key, value);
            else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_count(key, value));
            else throw ConfigError("config: unknown key '" + key + "' in [train]");
        } else if (section == "pisco") {
            if (key == "enabled") cfg.pisco_enabled = parse_bool(key, value);
            else if (key == "alpha") cfg.alpha = parse_double(key, value);
            else if (key == "f_od") cfg.f_od = parse_double(key, value);
            else if (key == "lambda") cfg.lambda = parse_double(key, value);
            else if (key == "kernel") parse_kernel(value, cfg.kernel_h, cfg.kernel_w);
            else if (key == "coils_out") cfg.coils_out = parse_count(key, value);
            else if (key == "grad_p") cfg.grad_p = parse_bool(key, value);
            else if (key == "random_partition") cfg.random_partition = parse_bool(key, value);
            else throw ConfigError("config: unknown key '" + key + "' in [pisco]");
        }
    }
    if (cfg.e_pre > cfg.epochs && cfg.pisco_enabled) {
        // Legal: the gate simply never opens. Nothing to do.
    }
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string config_to_text(const ExperimentConfig& cfg) {
    char buf[256];
    std::string out;
    auto raw = [&](const char* text) {
        out += text;
        out += '\n';
    };
    auto line = [&](const char* fmt, auto... args) {
        std::snprintf(buf, sizeof(buf), fmt, args...);
        out += buf;
        out += '\n';
    };
    raw("[phantom]");
    line("nx = %zu", cfg.nx);
    line("ny = %zu", cfg.ny);
    line("n_coils = %zu", cfg.n_coils);
    line("period = %zu", cfg.period);
    line("eval_frames = %zu", cfg.eval_frames);
    for (std::size_t i = 0; i < cfg.ellipses.size(); ++i) {
        const auto& e = cfg.ellipses[i];
        line("ellipse%zu = %.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g", i, e.cx, e.cy, e.a,
             e.b, e.angle, e.amplitude.real(), e.amplitude.imag(), e.kappa);
    }
    raw("");
    raw("[trajectory]");
    line("n_spokes = %zu", cfg.n_spokes);
    line("n_fe = %zu", cfg.n_fe);
    line("r = %zu", cfg.accel);
    raw("");
    raw("[nik]");
    line("layers = %zu", cfg.layers);
    line("hidden = %zu", cfg.hidden);
    line("n_freq = %zu", cfg.n_freq);
    line("omega0 = %.17g", cfg.omega0);
    line("sigma_k = %.17g", cfg.sigma_k);
    line("sigma_t = %.17g", cfg.sigma_t);
    raw("");
    raw("[train]");
    line("epochs = %zu", cfg.epochs);
    line("e_pre = %zu", cfg.e_pre);
    line("batch = %zu", cfg.batch);
    line("lr = %.17g", cfg.lr);
    line("seed = %llu", static_cast<unsigned long long>(cfg.seed));
    raw("");
    raw("[pisco]");
    line("enabled = %s", cfg.pisco_enabled ? "true" : "false");
    line("alpha = %.17g", cfg.alpha);
    line("f_od = %.17g", cfg.f_od);
    line("lambda = %.17g", cfg.lambda);
    line("kernel = %zux%zu", cfg.kernel_h, cfg.kernel_w);
    line("coils_out = %zu", cfg.coils_out);
    line("grad_p = %s", cfg.grad_p ? "true" : "false");
    line("random_partition = %s", cfg.random_partition ? "true" : "false");
    return out;
}

void write_config_file(const std::string& path, const ExperimentConfig& cfg) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw IoError("config: cannot write " + path);
    const std::string text = config_to_text(cfg);
    std::fwrite(text.data(), 1, text.size(), f);
    std::fclose(f);
}

}  // namespace dmri::cli
