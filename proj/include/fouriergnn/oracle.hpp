#pragma once

// Brute-force time-domain references for the spectral path. Everything here is
// dense and O(n^2) or worse; it exists to check the fast path on small sizes.

#include <cstdint>
#include <vector>

#include "fouriergnn/model.hpp"
#include "fouriergnn/spectral.hpp"

namespace fgnn::oracle {

/// Circulant graph shift operator from a translation-invariant kernel:
/// matrix(i, j) = kernel[(i - j) mod n].
struct GreenKernelGso {
    RealVector kernel;
    RealMatrix matrix;

    static GreenKernelGso from_kernel(RealVector kernel);
    Index size() const { return kernel.size(); }
};

struct TimeDomainLayer {
    GreenKernelGso a;
    RealMatrix w; // (d, d)
};

/// General (n-variant) Fourier operator: one d x d complex matrix per
/// frequency, acting on the row of that frequency from the right.
struct SpectralOperator {
    std::vector<ComplexMatrix> per_frequency;
};

/// F(kappa) with kappa[i] = kernel[i] * W, i.e. per_frequency[f] = DFT(kernel)[f] * W.
SpectralOperator fgo_from_kernel(const TimeDomainLayer& layer);

/// Row f of the result is x.row(f) * op.per_frequency[f].
Spectrum apply_spectral_operator(const Spectrum& x, const SpectralOperator& op);

/// sum_{k=0..K} A_k ... A_1 X W_1 ... W_k with dense products; the k = 0 term is X.
RealMatrix time_domain_multi_order(const RealMatrix& x, const std::vector<TimeDomainLayer>& layers);

/// y[i] = sum_j x[j] h[(i - j) mod n], by direct summation.
RealVector circular_convolve(const RealVector& x, const RealVector& h);

/// Random circulant layer with kernel and weight entries uniform in [-1, 1].
TimeDomainLayer random_layer(Index n, Index d, std::uint64_t seed);

struct Report {
    Index n = 0;
    Index d = 0;
    Index k = 0;
    std::uint64_t seed = 0;
    double max_abs_error = 0.0;
    bool pass = false;
};

inline constexpr double kEquivalenceTolerance = 1e-8;
inline constexpr double kConvolutionTolerance = 1e-9;
inline constexpr Index kDefaultNodeCap = 64;

/// Compares IDFT(sum_k F(X) S_{0:k}) built from per-frequency operators with
/// `time_domain_multi_order` on random data drawn from `seed`.
Report verify_multi_order_equivalence(Index n, Index d, Index k, std::uint64_t seed,
                           Index node_cap = kDefaultNodeCap);

/// Space-invariant kernels (c * delta) collapse each operator to the single
/// matrix c * W; runs the model's `fgo_forward` with those matrices against
/// the time-domain reference.
Report verify_n_invariant(Index n, Index d, Index k, std::uint64_t seed);

/// DFT(x (*) h) against DFT(x) .* DFT(h) for random real x, h.
Report verify_convolution_theorem(Index n, std::uint64_t seed);

} // namespace fgnn::oracle
