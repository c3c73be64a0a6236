#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstring>
#include <initializer_list>
#include <vector>

#include <Eigen/Dense>

#include "dmri/errors.hpp"

namespace dmri::num {

using Complex = std::complex<double>;
using RealMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Dense row-major float64 array. All autodiff traffic is made of these;
// complex quantities travel as (re, im) column pairs.
struct RealTensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    RealTensor() = default;
    RealTensor(std::initializer_list<std::size_t> s) : shape(s) { data.assign(count(shape), 0.0); }
    explicit RealTensor(std::vector<std::size_t> s) : shape(std::move(s)) {
        data.assign(count(shape), 0.0);
    }

    static std::size_t count(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (auto d : s) n *= d;
        return n;
    }

    std::size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }

    std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
    std::size_t cols() const { return shape.size() < 2 ? (shape.empty() ? 0 : 1) : shape[1]; }

    bool is_matrix() const { return shape.size() == 2; }

    double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

    Eigen::Map<RealMatrix> mat() {
        return Eigen::Map<RealMatrix>(data.data(), static_cast<Eigen::Index>(rows()),
                                      static_cast<Eigen::Index>(cols()));
    }
    Eigen::Map<const RealMatrix> mat() const {
        return Eigen::Map<const RealMatrix>(data.data(), static_cast<Eigen::Index>(rows()),
                                            static_cast<Eigen::Index>(cols()));
    }

    static RealTensor zeros(std::vector<std::size_t> s) { return RealTensor(std::move(s)); }

    static RealTensor from_matrix(const RealMatrix& m) {
        RealTensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
        Eigen::Map<RealMatrix>(t.data.data(), m.rows(), m.cols()) = m;
        return t;
    }

    bool same_shape(const RealTensor& o) const { return shape == o.shape; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

// C = A * B through Eigen's GEMM; the one hot loop in the whole project.
inline RealTensor matmul(const RealTensor& a, const RealTensor& b) {
    if (!a.is_matrix() || !b.is_matrix() || a.cols() != b.rows())
        throw ShapeMismatch("matmul: incompatible shapes");
    RealTensor c({a.rows(), b.cols()});
    c.mat().noalias() = a.mat() * b.mat();
    return c;
}

// Reinterpret an [m, 2c] (re, im)-paired tensor as an m x c complex matrix.
// Row-major std::complex storage is exactly the paired layout, so this is a
// straight copy.
inline ComplexMatrix pairs_to_complex(const RealTensor& t) {
    if (!t.is_matrix() || t.cols() % 2 != 0)
        throw ShapeMismatch("pairs_to_complex: need [m, 2c] tensor");
    const auto m = static_cast<Eigen::Index>(t.rows());
    const auto c = static_cast<Eigen::Index>(t.cols() / 2);
    ComplexMatrix out(m, c);
    std::memcpy(out.data(), t.data.data(), sizeof(double) * t.size());
    return out;
}

inline RealTensor complex_to_pairs(const ComplexMatrix& m) {
    RealTensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(2 * m.cols())});
    std::memcpy(t.data.data(), m.data(), sizeof(double) * t.size());
    return t;
}

}  // namespace dmri::num
