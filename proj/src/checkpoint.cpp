#include "dmri/checkpoint.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "dmri/ndarray_io.hpp"

namespace dmri::nik {

namespace {

std::string join(const std::string& dir, const std::string& name) { return dir + "/" + name; }

nda::NdArray tensor_to_nda(const num::RealTensor& t) {
    std::vector<std::uint64_t> dims(t.shape.begin(), t.shape.end());
    return nda::make_f64(std::move(dims), t.data);
}

num::RealTensor nda_to_tensor(const nda::NdArray& a) {
    num::RealTensor t(std::vector<std::size_t>(a.dims.begin(), a.dims.end()));
    t.data = a.rdata;
    return t;
}

}  // namespace

void save_checkpoint(const std::string& dir, const Checkpoint& ckpt) {
    const SirenModel& m = ckpt.model;
    std::string manifest;
    char buf[256];
    auto line = [&](const char* fmt, auto... args) {
        std::snprintf(buf, sizeof(buf), fmt, args...);
        manifest += buf;
        manifest += '\n';
    };
    manifest += "format = checkpoint-v1\n";
    line("n_coils = %zu", m.n_coils());
    line("n_in = %zu", m.n_in);
    line("hidden = %zu", m.hidden);
    line("layers = %zu", m.n_layers);
    line("omega0 = %.17g", m.omega0);
    line("seed = %llu", static_cast<unsigned long long>(ckpt.seed));
    line("data_scale = %.17g", ckpt.data_scale);
    line("grid_nx = %zu", ckpt.grid_nx);
    line("grid_ny = %zu", ckpt.grid_ny);
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        line("layer%zu_w = layer%zu_w.nda %zu %zu", l, l, m.weights[l].rows(),
             m.weights[l].cols());
        line("layer%zu_b = layer%zu_b.nda %zu", l, l, m.biases[l].size());
        char name[64];
        std::snprintf(name, sizeof(name), "layer%zu_w.nda", l);
        nda::write_nda(join(dir, name), tensor_to_nda(m.weights[l]));
        std::snprintf(name, sizeof(name), "layer%zu_b.nda", l);
        nda::write_nda(join(dir, name), tensor_to_nda(m.biases[l]));
    }
    line("encoding = encoding_b.nda %ld 3", static_cast<long>(ckpt.encoding.b.rows()));
    {
        std::vector<double> bdata(ckpt.encoding.b.data(),
                                  ckpt.encoding.b.data() + ckpt.encoding.b.size());
        nda::write_nda(join(dir, "encoding_b.nda"),
                       nda::make_f64({static_cast<std::uint64_t>(ckpt.encoding.b.rows()), 3},
                                     std::move(bdata)));
    }
    line("maps = maps.nda %zu %zu %zu", ckpt.maps.n_coils(), ckpt.maps.nx(), ckpt.maps.ny());
    {
        std::vector<num::Complex> mdata;
        mdata.reserve(ckpt.maps.n_coils() * ckpt.maps.nx() * ckpt.maps.ny());
        for (const auto& map : ckpt.maps.maps)
            mdata.insert(mdata.end(), map.data(), map.data() + map.size());
        nda::write_nda(join(dir, "maps.nda"),
                       nda::make_c128({ckpt.maps.n_coils(), ckpt.maps.nx(), ckpt.maps.ny()},
                                      std::move(mdata)));
    }
    std::FILE* f = std::fopen(join(dir, "manifest.txt").c_str(), "wb");
    if (!f) throw IoError("checkpoint: cannot write manifest in " + dir);
    std::fwrite(manifest.data(), 1, manifest.size(), f);
    std::fclose(f);
}

Checkpoint load_checkpoint(const std::string& dir) {
    std::ifstream in(join(dir, "manifest.txt"), std::ios::binary);
    if (!in) throw IoError("checkpoint: cannot open manifest in " + dir);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
                s.erase(s.begin());
            while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
            return s;
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    auto need = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw Error("checkpoint: manifest missing key " + key);
        return it->second;
    };
    if (need("format") != "checkpoint-v1") throw Error("checkpoint: unsupported format");

    Checkpoint ckpt;
    const auto n_coils = static_cast<std::size_t>(std::stoull(need("n_coils")));
    const auto n_in = static_cast<std::size_t>(std::stoull(need("n_in")));
    const auto hidden = static_cast<std::size_t>(std::stoull(need("hidden")));
    const auto layers = static_cast<std::size_t>(std::stoull(need("layers")));
    const double omega0 = std::stod(need("omega0"));
    ckpt.seed = std::stoull(need("seed"));
    ckpt.data_scale = std::stod(need("data_scale"));
    ckpt.grid_nx = static_cast<std::size_t>(std::stoull(need("grid_nx")));
    ckpt.grid_ny = static_cast<std::size_t>(std::stoull(need("grid_ny")));

    ckpt.model = make_siren(n_in, hidden, layers, n_coils, omega0);
    for (std::size_t l = 0; l <= layers; ++l) {
        char name[64];
        std::snprintf(name, sizeof(name), "layer%zu_w.nda", l);
        ckpt.model.weights[l] = nda_to_tensor(nda::read_nda(join(dir, name)));
        std::snprintf(name, sizeof(name), "layer%zu_b.nda", l);
        ckpt.model.biases[l] = nda_to_tensor(nda::read_nda(join(dir, name)));
    }
    {
        const nda::NdArray b = nda::read_nda(join(dir, "encoding_b.nda"));
        if (b.dims.size() != 2 || b.dims[1] != 3)
            throw Error("checkpoint: encoding matrix must be n x 3");
        ckpt.encoding.b.resize(static_cast<Eigen::Index>(b.dims[0]), 3);
        std::copy(b.rdata.begin(), b.rdata.end(), ckpt.encoding.b.data());
    }
    {
        const nda::NdArray m = nda::read_nda(join(dir, "maps.nda"));
        if (m.dims.size() != 3) throw Error("checkpoint: maps must be coils x nx x ny");
        const std::size_t plane = m.dims[1] * m.dims[2];
        for (std::size_t c = 0; c < m.dims[0]; ++c) {
            num::ComplexMatrix map(static_cast<Eigen::Index>(m.dims[1]),
                                   static_cast<Eigen::Index>(m.dims[2]));
            std::copy(m.cdata.begin() + static_cast<std::ptrdiff_t>(c * plane),
                      m.cdata.begin() + static_cast<std::ptrdiff_t>((c + 1) * plane), map.data());
            ckpt.maps.maps.push_back(std::move(map));
        }
    }
    if (ckpt.model.n_in != ckpt.encoding.n_features())
        throw Error("checkpoint: encoding width does not match model input");
    return ckpt;
}

}  // namespace dmri::nik
