#include "fouriergnn/oracle.hpp"

#include <random>
#include <string>

#include "fouriergnn/error.hpp"

namespace fgnn::oracle {
namespace {

RealMatrix random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    RealMatrix m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
    return m;
}

RealVector random_vector(Index size, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    RealVector v(size);
    for (Index i = 0; i < size; ++i) v[i] = dist(rng);
    return v;
}

} // namespace

GreenKernelGso GreenKernelGso::from_kernel(RealVector kernel) {
    const Index n = kernel.size();
    if (n < 1) throw ShapeError("kernel must have at least one entry");
    GreenKernelGso gso;
    gso.matrix.resize(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) gso.matrix(i, j) = kernel[((i - j) % n + n) % n];
    }
    gso.kernel = std::move(kernel);
    return gso;
}

SpectralOperator fgo_from_kernel(const TimeDomainLayer& layer) {
    const Index n = layer.a.size();
    if (layer.w.rows() != layer.w.cols()) throw ShapeError("layer weight must be square");
    const Spectrum kernel_hat = dft_nodes(RealMatrix(layer.a.kernel));
    const ComplexMatrix w = layer.w.cast<Complex>();
    SpectralOperator op;
    op.per_frequency.reserve(static_cast<std::size_t>(n));
    for (Index f = 0; f < n; ++f) op.per_frequency.push_back(kernel_hat(f, 0) * w);
    return op;
}

Spectrum apply_spectral_operator(const Spectrum& x, const SpectralOperator& op) {
    if (static_cast<std::size_t>(x.rows()) != op.per_frequency.size()) {
        throw ShapeError("operator has " + std::to_string(op.per_frequency.size()) +
                         " frequencies, input has " + std::to_string(x.rows()));
    }
    Spectrum out(x.rows(), x.cols());
    for (Index f = 0; f < x.rows(); ++f) {
        out.row(f) = complex_matmul(x.row(f), op.per_frequency[static_cast<std::size_t>(f)]);
    }
    return out;
}

RealMatrix time_domain_multi_order(const RealMatrix& x, const std::vector<TimeDomainLayer>& layers) {
    RealMatrix total = x;
    RealMatrix term = x;
    for (const auto& layer : layers) {
        if (layer.a.matrix.rows() != x.rows() || layer.w.rows() != x.cols() || layer.w.cols() != x.cols()) {
            throw ShapeError("time-domain layer does not match input shape");
        }
        term = layer.a.matrix * term * layer.w;
        total += term;
    }
    return total;
}

RealVector circular_convolve(const RealVector& x, const RealVector& h) {
    if (x.size() != h.size()) throw ShapeError("circular_convolve needs equal lengths");
    const Index n = x.size();
    RealVector y = RealVector::Zero(n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) y[i] += x[j] * h[((i - j) % n + n) % n];
    }
    return y;
}

TimeDomainLayer random_layer(Index n, Index d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    RealVector kernel = random_vector(n, rng);
    return {GreenKernelGso::from_kernel(std::move(kernel)), random_matrix(d, d, rng)};
}

Report verify_multi_order_equivalence(Index n, Index d, Index k, std::uint64_t seed, Index node_cap) {
    if (n < 1 || n > node_cap) throw Error("verify_multi_order_equivalence: n must lie in [1, " + std::to_string(node_cap) + "]");
    if (d < 1 || d > 8) throw Error("verify_multi_order_equivalence: d must lie in [1, 8]");
    if (k < 0 || k > 4) throw Error("verify_multi_order_equivalence: K must lie in [0, 4]");

    std::mt19937_64 rng(seed);
    const RealMatrix x = random_matrix(n, d, rng);
    std::vector<TimeDomainLayer> layers;
    for (Index i = 0; i < k; ++i) layers.push_back(random_layer(n, d, rng()));

    Spectrum chain = dft_nodes(x);
    Spectrum sum = chain;
    for (const auto& layer : layers) {
        chain = apply_spectral_operator(chain, fgo_from_kernel(layer));
        sum += chain;
    }
    const RealMatrix spectral = to_real(idft_nodes(sum));
    const RealMatrix reference = time_domain_multi_order(x, layers);

    Report r{n, d, k, seed, (spectral - reference).cwiseAbs().maxCoeff(), false};
    r.pass = r.max_abs_error < kEquivalenceTolerance;
    return r;
}

Report verify_n_invariant(Index n, Index d, Index k, std::uint64_t seed) {
    if (k < 1) throw Error("verify_n_invariant: K must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const RealMatrix x = random_matrix(n, d, rng);

    std::vector<TimeDomainLayer> layers;
    std::vector<FgoLayer> fgo;
    for (Index i = 0; i < k; ++i) {
        const double c = dist(rng);
        RealVector kernel = RealVector::Zero(n);
        kernel[0] = c;
        RealMatrix w = random_matrix(d, d, rng);
        fgo.push_back({(c * w).cast<Complex>(), ComplexVector::Zero(d)});
        layers.push_back({GreenKernelGso::from_kernel(std::move(kernel)), std::move(w)});
    }
    const Spectrum out = fgo_forward(x, fgo, Activation::identity(), false);
    const RealMatrix spectral = to_real(idft_nodes(out));
    const RealMatrix reference = time_domain_multi_order(x, layers);

    Report r{n, d, k, seed, (spectral - reference).cwiseAbs().maxCoeff(), false};
    r.pass = r.max_abs_error < 1e-10;
    return r;
}

Report verify_convolution_theorem(Index n, std::uint64_t seed) {
    if (n < 1 || n > kDefaultNodeCap) throw Error("verify_convolution_theorem: n must lie in [1, 64]");
    std::mt19937_64 rng(seed);
    const RealVector x = random_vector(n, rng);
    const RealVector h = random_vector(n, rng);

    const Spectrum lhs = dft_nodes(RealMatrix(circular_convolve(x, h)));
    const Spectrum rhs = dft_nodes(RealMatrix(x)).cwiseProduct(dft_nodes(RealMatrix(h)));

    Report r{n, 1, 0, seed, (lhs - rhs).cwiseAbs().maxCoeff(), false};
    r.pass = r.max_abs_error < kConvolutionTolerance;
    return r;
}

} // namespace fgnn::oracle
