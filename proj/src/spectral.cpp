#include "fouriergnn/spectral.hpp"

#include <array>
#include <map>
#include <mutex>
#include <string>
#include <tuple>

#include <fftw3.h>

#include "fouriergnn/error.hpp"

namespace fgnn {
namespace {

// FFTW planning is not thread-safe, execution is. Plans are created once per
// geometry under a lock and then executed concurrently with new-array calls.
class PlanCache {
public:
    using Key = std::tuple<int, Index, Index, Index, int>; // rank, n0, n1, howmany, sign

    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(const NodeAxis& axis, Index rows, Index cols, int sign) {
        const bool planar = axis.mode == DftMode::Planar2d;
        const Key key{planar ? 2 : 1, planar ? axis.n_vars : rows, planar ? axis.n_steps : 1,
                      cols, sign};
        std::lock_guard lock(mutex_);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;

        const auto total = static_cast<std::size_t>(rows * cols);
        auto* in = fftw_alloc_complex(total);
        std::array<int, 2> dims{static_cast<int>(std::get<1>(key)),
                                static_cast<int>(std::get<2>(key))};
        const int howmany = static_cast<int>(cols);
        // Columns are contiguous: the caller hands over column-major storage.
        const int dist = static_cast<int>(rows);
        fftw_plan plan = fftw_plan_many_dft(std::get<0>(key), dims.data(), howmany, in, nullptr, 1,
                                            dist, in, nullptr, 1, dist, sign,
                                            FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(in);
        if (plan == nullptr) throw Error("FFTW failed to create a plan");
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<Key, fftw_plan> plans_;
};

using ColumnMajor = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>;

PlanCache& plan_cache() {
    static PlanCache cache;
    return cache;
}

void check_axis(const NodeAxis& axis, Index rows) {
    if (rows < 1) throw ShapeError("node axis must have at least one node");
    if (axis.mode == DftMode::Planar2d && axis.n_vars * axis.n_steps != rows) {
        throw ShapeError("planar DFT expects " + std::to_string(axis.n_vars) + "x" +
                         std::to_string(axis.n_steps) + " nodes, got " + std::to_string(rows));
    }
}

Spectrum transform(const Spectrum& x, const NodeAxis& axis, int sign) {
    check_axis(axis, x.rows());
    if (x.size() == 0) return Spectrum(x.rows(), x.cols());
    fftw_plan plan = plan_cache().get(axis, x.rows(), x.cols(), sign);
    // Row-major (n, d) strides every column by d, which thrashes the cache for
    // large n; transform a column-major copy in place instead.
    ColumnMajor buf = x;
    auto* data = reinterpret_cast<fftw_complex*>(buf.data());
    fftw_execute_dft(plan, data, data);
    return buf;
}

} // namespace

Activation Activation::leaky_relu(double slope) {
    if (!(slope > 0.0 && slope < 1.0)) throw ConfigError("", "LeakyRelu slope must lie in (0, 1)");
    return {Kind::LeakyRelu, slope};
}

void require_finite(const RealMatrix& x, std::string_view what) {
    if (!x.allFinite()) throw NumericError("non-finite value in " + std::string(what));
}

void require_finite(const ComplexMatrix& x, std::string_view what) {
    if (!x.real().allFinite() || !x.imag().allFinite()) {
        throw NumericError("non-finite value in " + std::string(what));
    }
}

Spectrum dft_nodes(const RealNodeFeatures& x, const NodeAxis& axis) {
    require_finite(x, "dft_nodes input");
    return transform(x.cast<Complex>(), axis, FFTW_FORWARD);
}

Spectrum dft_nodes(const Spectrum& x, const NodeAxis& axis) {
    require_finite(x, "dft_nodes input");
    return transform(x, axis, FFTW_FORWARD);
}

Spectrum dft_nodes_adjoint(const Spectrum& x, const NodeAxis& axis) {
    require_finite(x, "inverse DFT input");
    return transform(x, axis, FFTW_BACKWARD);
}

Spectrum idft_nodes(const Spectrum& x, const NodeAxis& axis) {
    Spectrum out = dft_nodes_adjoint(x, axis);
    out /= static_cast<double>(x.rows());
    return out;
}

RealMatrix to_real(const Spectrum& x, ImagPolicy policy) {
    if (policy == ImagPolicy::Verify && x.size() > 0) {
        const double worst = x.imag().cwiseAbs().maxCoeff();
        if (!(worst < kRealTolerance)) {
            throw NumericError("imaginary residue " + std::to_string(worst) +
                               " exceeds real-output tolerance");
        }
    }
    return x.real();
}

ComplexMatrix complex_matmul(const ComplexMatrix& x, const ComplexMatrix& w) {
    if (x.cols() != w.rows()) {
        throw ShapeError("complex_matmul: inner dimensions " + std::to_string(x.cols()) +
                         " and " + std::to_string(w.rows()) + " differ");
    }
    return x * w;
}

Spectrum apply_activation(const Spectrum& x, const Activation& kind) {
    switch (kind.kind) {
    case Activation::Kind::Identity:
        return x;
    case Activation::Kind::SplitRelu:
        return x.unaryExpr([](const Complex& z) {
            return Complex(std::max(z.real(), 0.0), std::max(z.imag(), 0.0));
        });
    case Activation::Kind::LeakyRelu: {
        const double s = kind.slope;
        return x.unaryExpr([s](const Complex& z) {
            return Complex(std::max(z.real(), s * z.real()), std::max(z.imag(), s * z.imag()));
        });
    }
    }
    return x;
}

Spectrum activation_backward(const Spectrum& pre, const Spectrum& grad, const Activation& kind) {
    if (kind.kind == Activation::Kind::Identity) return grad;
    const double low = kind.kind == Activation::Kind::LeakyRelu ? kind.slope : 0.0;
    return pre.binaryExpr(grad, [low](const Complex& z, const Complex& g) {
        return Complex(z.real() > 0.0 ? g.real() : low * g.real(),
                       z.imag() > 0.0 ? g.imag() : low * g.imag());
    });
}

RealMatrix leaky_relu_real(const RealMatrix& x, double slope) {
    return x.unaryExpr([slope](double v) { return std::max(v, slope * v); });
}

RealMatrix leaky_relu_real_backward(const RealMatrix& pre, const RealMatrix& grad, double slope) {
    return pre.binaryExpr(grad, [slope](double z, double g) { return z > 0.0 ? g : slope * g; });
}

} // namespace fgnn
