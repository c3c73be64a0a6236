#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dmri/tensor.hpp"

namespace dmri::nda {

using num::Complex;

// On-disk container for dense arrays, used for every data exchange of the
// CLI. Layout (all little endian):
//   bytes 0..3   magic "NDA1"
//   byte  4      dtype: 1 = f32, 2 = f64, 3 = c64, 4 = c128
//   byte  5      ndim
//   bytes 6..7   zero padding
//   then ndim x u64 dims, then the row-major payload (complex interleaved
//   re, im). Payload length must equal product(dims) * element size.
enum class Dtype : std::uint8_t { f32 = 1, f64 = 2, c64 = 3, c128 = 4 };

struct NdArray {
    Dtype dtype = Dtype::f64;
    std::vector<std::uint64_t> dims;
    std::vector<double> rdata;    // f32/f64 payloads (held as f64)
    std::vector<Complex> cdata;   // c64/c128 payloads (held as c128)

    std::uint64_t count() const {
        std::uint64_t n = 1;
        for (auto d : dims) n *= d;
        return n;
    }
    bool is_complex() const { return dtype == Dtype::c64 || dtype == Dtype::c128; }
};

void write_nda(const std::string& path, const NdArray& array);
NdArray read_nda(const std::string& path);

// Shorthand constructors for the common cases.
NdArray make_f64(std::vector<std::uint64_t> dims, std::vector<double> data);
NdArray make_c128(std::vector<std::uint64_t> dims, std::vector<Complex> data);

}  // namespace dmri::nda
