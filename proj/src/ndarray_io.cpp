#include "dmri/ndarray_io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <memory>

static_assert(std::endian::native == std::endian::little,
              "NDA I/O writes raw little-endian words");

namespace dmri::nda {

namespace {

constexpr char kMagic[4] = {'N', 'D', 'A', '1'};

std::size_t element_bytes(Dtype dt) {
    switch (dt) {
        case Dtype::f32: return 4;
        case Dtype::f64: return 8;
        case Dtype::c64: return 8;
        case Dtype::c128: return 16;
    }
    throw UnknownDtype("nda: bad dtype enum");
}

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

void write_all(std::FILE* f, const void* p, std::size_t n, const std::string& path) {
    if (std::fwrite(p, 1, n, f) != n) throw IoError("nda: short write to " + path);
}

void read_all(std::FILE* f, void* p, std::size_t n, const std::string& path) {
    if (std::fread(p, 1, n, f) != n) throw TruncatedPayload("nda: truncated file " + path);
}

}  // namespace

void write_nda(const std::string& path, const NdArray& array) {
    const std::uint64_t n = array.count();
    if (array.is_complex() ? array.cdata.size() != n : array.rdata.size() != n)
        throw ShapeMismatch("nda: payload size does not match dims");
    File f(std::fopen(path.c_str(), "wb"));
    if (!f) throw IoError("nda: cannot open for writing: " + path);
    write_all(f.get(), kMagic, 4, path);
    const std::uint8_t head[4] = {static_cast<std::uint8_t>(array.dtype),
                                  static_cast<std::uint8_t>(array.dims.size()), 0, 0};
    write_all(f.get(), head, 4, path);
    write_all(f.get(), array.dims.data(), 8 * array.dims.size(), path);
    switch (array.dtype) {
        case Dtype::f64:
            write_all(f.get(), array.rdata.data(), 8 * n, path);
            break;
        case Dtype::f32: {
            std::vector<float> buf(array.rdata.begin(), array.rdata.end());
            write_all(f.get(), buf.data(), 4 * n, path);
            break;
        }
        case Dtype::c128:
            write_all(f.get(), array.cdata.data(), 16 * n, path);
            break;
        case Dtype::c64: {
            std::vector<std::complex<float>> buf(n);
            for (std::uint64_t i = 0; i < n; ++i)
                buf[i] = {static_cast<float>(array.cdata[i].real()),
                          static_cast<float>(array.cdata[i].imag())};
            write_all(f.get(), buf.data(), 8 * n, path);
            break;
        }
    }
    if (std::fflush(f.get()) != 0) throw IoError("nda: flush failed: " + path);
}

NdArray read_nda(const std::string& path) {
    File f(std::fopen(path.c_str(), "rb"));
    if (!f) throw IoError("nda: cannot open: " + path);
    char magic[4];
    read_all(f.get(), magic, 4, path);
    if (std::memcmp(magic, kMagic, 4) != 0) throw BadMagic("nda: bad magic in " + path);
    std::uint8_t head[4];
    read_all(f.get(), head, 4, path);
    if (head[0] < 1 || head[0] > 4)
        throw UnknownDtype("nda: unknown dtype code " + std::to_string(head[0]) + " in " + path);
    NdArray array;
    array.dtype = static_cast<Dtype>(head[0]);
    array.dims.resize(head[1]);
    read_all(f.get(), array.dims.data(), 8 * array.dims.size(), path);
    const std::uint64_t n = array.count();
    switch (array.dtype) {
        case Dtype::f64:
            array.rdata.resize(n);
            read_all(f.get(), array.rdata.data(), 8 * n, path);
            break;
        case Dtype::f32: {
            std::vector<float> buf(n);
            read_all(f.get(), buf.data(), 4 * n, path);
            array.rdata.assign(buf.begin(), buf.end());
            break;
        }
        case Dtype::c128:
            array.cdata.resize(n);
            read_all(f.get(), array.cdata.data(), 16 * n, path);
            break;
        case Dtype::c64: {
            std::vector<std::complex<float>> buf(n);
            read_all(f.get(), buf.data(), 8 * n, path);
            array.cdata.resize(n);
            for (std::uint64_t i = 0; i < n; ++i) array.cdata[i] = {buf[i].real(), buf[i].imag()};
            break;
        }
    }
    // Anything past the payload means the header lied about the shape.
    char extra;
    if (std::fread(&extra, 1, 1, f.get()) == 1)
        throw TruncatedPayload("nda: trailing bytes after payload in " + path);
    (void)element_bytes(array.dtype);
    return array;
}

NdArray make_f64(std::vector<std::uint64_t> dims, std::vector<double> data) {
    NdArray a;
    a.dtype = Dtype::f64;
    a.dims = std::move(dims);
    a.rdata = std::move(data);
    if (a.count() != a.rdata.size()) throw ShapeMismatch("make_f64: dims/payload mismatch");
    return a;
}

NdArray make_c128(std::vector<std::uint64_t> dims, std::vector<Complex> data) {
    NdArray a;
    a.dtype = Dtype::c128;
    a.dims = std::move(dims);
    a.cdata = std::move(data);
    if (a.count() != a.cdata.size()) throw ShapeMismatch("make_c128: dims/payload mismatch");
    return a;
}

}  // namespace dmri::nda
