#pragma once

// Complex arithmetic, DFTs along the node axis, and activations.

#include <complex>
#include <string_view>

#include <Eigen/Dense>

namespace fgnn {

using Index = Eigen::Index;
using Complex = std::complex<double>;

using RealMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

/// Real node features, shape (n, d). Row i is node i.
using RealNodeFeatures = RealMatrix;

/// Fourier-space node features, shape (n, d), as produced by an
/// unnormalized forward DFT over the node axis.
using Spectrum = ComplexMatrix;

enum class DftMode {
    Flat1d,   ///< one length-n transform per feature column
    Planar2d, ///< one (n_vars x n_steps) transform per feature column
};

/// Geometry of the node axis. Planar mode reads the n rows as a row-major
/// (n_vars, n_steps) grid, so n must equal n_vars * n_steps.
struct NodeAxis {
    DftMode mode = DftMode::Flat1d;
    Index n_vars = 0;
    Index n_steps = 0;

    static NodeAxis flat() { return {}; }
    static NodeAxis planar(Index n_vars, Index n_steps) {
        return {DftMode::Planar2d, n_vars, n_steps};
    }
};

struct Activation {
    enum class Kind { Identity, SplitRelu, LeakyRelu };

    Kind kind = Kind::SplitRelu;
    double slope = 0.0; // LeakyRelu only, in (0, 1)

    static Activation identity() { return {Kind::Identity, 0.0}; }
    static Activation split_relu() { return {Kind::SplitRelu, 0.0}; }
    static Activation leaky_relu(double slope);

    friend bool operator==(const Activation&, const Activation&) = default;
};

/// What `to_real` does with leftover imaginary mass.
enum class ImagPolicy {
    Discard, ///< training mode: drop silently
    Verify,  ///< throw NumericError if max |imag| >= kRealTolerance
};

inline constexpr double kRealTolerance = 1e-8;

Spectrum dft_nodes(const RealNodeFeatures& x, const NodeAxis& axis = {});
Spectrum dft_nodes(const Spectrum& x, const NodeAxis& axis = {});

/// Inverse of `dft_nodes`, scaled by 1/n.
Spectrum idft_nodes(const Spectrum& x, const NodeAxis& axis = {});

/// Unscaled inverse transform, i.e. the conjugate transpose of `dft_nodes`.
/// Backward passes of both transforms are expressed through this and
/// `dft_nodes`.
Spectrum dft_nodes_adjoint(const Spectrum& x, const NodeAxis& axis = {});

RealMatrix to_real(const Spectrum& x, ImagPolicy policy = ImagPolicy::Discard);

ComplexMatrix complex_matmul(const ComplexMatrix& x, const ComplexMatrix& w);

Spectrum apply_activation(const Spectrum& x, const Activation& kind);

/// Gradient of `apply_activation` w.r.t. its input. `grad` holds
/// dL/dRe + i dL/dIm of the output; the result uses the same convention.
Spectrum activation_backward(const Spectrum& pre, const Spectrum& grad,
                             const Activation& kind);

RealMatrix leaky_relu_real(const RealMatrix& x, double slope);
RealMatrix leaky_relu_real_backward(const RealMatrix& pre, const RealMatrix& grad,
                                    double slope);

/// Throws NumericError naming `what` if any entry is NaN or infinite.
void require_finite(const RealMatrix& x, std::string_view what);
void require_finite(const ComplexMatrix& x, std::string_view what);

} // namespace fgnn
