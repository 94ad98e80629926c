#pragma once

#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <random>

#include "fouriergnn/model.hpp"

namespace testing {

using fgnn::Complex;
using fgnn::ComplexMatrix;
using fgnn::Index;
using fgnn::RealMatrix;

inline RealMatrix random_real(Index rows, Index cols, std::uint64_t seed, double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-scale, scale);
    RealMatrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = u(rng);
    return m;
}

inline ComplexMatrix random_complex(Index rows, Index cols, std::uint64_t seed) {
    const RealMatrix re = random_real(rows, cols, seed);
    const RealMatrix im = random_real(rows, cols, seed + 7919);
    ComplexMatrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = {re(i, j), im(i, j)};
    return m;
}

// Direct summation along rows: out[f, c] = sum_j x[j, c] exp(sign 2 pi i f j / n).
inline ComplexMatrix naive_dft(const ComplexMatrix& x, int sign = -1) {
    const Index n = x.rows();
    ComplexMatrix out = ComplexMatrix::Zero(n, x.cols());
    for (Index f = 0; f < n; ++f)
        for (Index j = 0; j < n; ++j) {
            const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>((f * j) % n) / n;
            const Complex w(std::cos(angle), std::sin(angle));
            for (Index c = 0; c < x.cols(); ++c) out(f, c) += x(j, c) * w;
        }
    return out;
}

// 2-D DFT over a (rows_a, rows_b) grid laid out row-major along the node axis.
inline ComplexMatrix naive_dft_2d(const ComplexMatrix& x, Index a, Index b) {
    ComplexMatrix out = ComplexMatrix::Zero(x.rows(), x.cols());
    for (Index fa = 0; fa < a; ++fa)
        for (Index fb = 0; fb < b; ++fb)
            for (Index ja = 0; ja < a; ++ja)
                for (Index jb = 0; jb < b; ++jb) {
                    const double angle = -2.0 * std::numbers::pi *
                                         (static_cast<double>(fa * ja) / a + static_cast<double>(fb * jb) / b);
                    const Complex w(std::cos(angle), std::sin(angle));
                    for (Index c = 0; c < x.cols(); ++c) out(fa * b + fb, c) += x(ja * b + jb, c) * w;
                }
    return out;
}

template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::path(FGNN_TEST_TMP) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace testing
