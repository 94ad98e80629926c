#pragma once

// FourierGNN forecaster: hypervariate graph, node embedding, the FGO stack in
// Fourier space, the feed-forward head, and adjacency export.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fouriergnn/spectral.hpp"

namespace fgnn {

enum class Ablation { Full, NoEmbedding, NoDynamicFgo, NoResidual, NoSummation };

std::string_view to_string(Ablation kind);
Ablation ablation_from_string(std::string_view name);
std::string_view to_string(DftMode mode);
DftMode dft_mode_from_string(std::string_view name);

struct ModelConfig {
    Index n_vars = 1;        // N
    Index n_steps = 12;      // T, lookback
    Index horizon = 12;      // tau
    Index embed_dim = 128;   // d
    Index layers = 3;        // K
    Index reduced_steps = 12; // l; l == T disables the time reduction
    Index ffn1 = 64;
    Index ffn2 = 256;
    DftMode dft_mode = DftMode::Flat1d;
    bool recursive_activation = false;
    Activation activation = Activation::split_relu();
    double leaky_slope = 0.01; // FFN LeakyReLU
    Ablation ablation = Ablation::Full;

    Index node_count() const { return n_vars * n_steps; }
    NodeAxis node_axis() const;
    bool has_time_reduce() const { return reduced_steps < n_steps; }
    bool trainable_embedding() const { return ablation != Ablation::NoEmbedding; }

    /// Throws ConfigError naming the offending field ("model.<field>").
    void validate() const;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// One lookback window and its forecast target.
struct MtsWindow {
    RealMatrix input;  // (N, T)
    RealMatrix target; // (N, tau)
    Index origin = 0;  // row of the first input step in the source table
};

/// N*T nodes, one per (variable, step). Node index = variable * T + step.
/// The graph is fully connected, so no adjacency is stored.
struct HypervariateGraph {
    RealVector node_features; // (N*T)
    Index n_vars = 0;
    Index n_steps = 0;

    Index node_count() const { return n_vars * n_steps; }
};

/// n-invariant Fourier graph operator and its bias, both complex.
struct FgoLayer {
    ComplexMatrix weight; // (d, d)
    ComplexVector bias;   // (d)

    friend bool operator==(const FgoLayer& a, const FgoLayer& b);
};

/// K diffusion steps. `step_block[k]` selects the parameter block used at
/// step k+1, so several steps may alias one block (weight tying).
struct FgoStack {
    std::vector<FgoLayer> blocks;
    std::vector<std::size_t> step_block;
    bool residual = true;  // include the k = 0 term F(X)
    bool summation = true; // sum all orders; otherwise keep only order K

    static FgoStack independent(std::vector<FgoLayer> layers);

    Index steps() const { return static_cast<Index>(step_block.size()); }
    const FgoLayer& step(Index k) const { return blocks.at(step_block.at(static_cast<std::size_t>(k))); }

    friend bool operator==(const FgoStack& a, const FgoStack& b);
};

struct FfnHead {
    std::optional<RealMatrix> time_reduce; // (T, l); absent when l == T
    RealMatrix w1;                         // (l*d, ffn1)
    RealVector b1;
    RealMatrix w2; // (ffn1, ffn2)
    RealVector b2;
    RealMatrix w3; // (ffn2, tau)
    RealVector b3;
    double leaky_slope = 0.01;

    friend bool operator==(const FfnHead& a, const FfnHead& b);
};

struct FourierGnnModel {
    ModelConfig config;
    RealVector embedding; // E_phi, (d); fixed to [1] when the embedding is ablated
    FgoStack fgo;
    FfnHead head;

    friend bool operator==(const FourierGnnModel& a, const FourierGnnModel& b);
};

/// Random initialization: FGO real/imag parts U(-1/sqrt(d), 1/sqrt(d)),
/// embedding and FFN weights U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero.
FourierGnnModel init_model(const ModelConfig& config, std::uint64_t seed);

/// Correctly shaped model with every parameter zero.
FourierGnnModel zero_model(const ModelConfig& config);

HypervariateGraph build_hypervariate(const MtsWindow& window);

RealNodeFeatures embed_nodes(const HypervariateGraph& graph, const RealVector& embedding);

/// Sum of FGO orders in Fourier space. With `recursive == false`:
///   P_0 = F(x), P_k = P_{k-1} S_k, out = P_0 + sum_k act(P_k + b_k).
/// With `recursive == true`:
///   H_0 = F(x), H_k = act(H_{k-1} S_k + b_k), out = sum_k H_k.
/// `stack.residual` and `stack.summation` drop terms as their names say.
Spectrum fgo_forward(const RealNodeFeatures& x, const FgoStack& stack, const Activation& act,
                     bool recursive, const NodeAxis& axis = {});

Spectrum fgo_forward(const RealNodeFeatures& x, const std::vector<FgoLayer>& layers,
                     const Activation& act, bool recursive, const NodeAxis& axis = {});

/// Reshape (N*T, d) -> (N, T, d), reduce time to l, flatten to (N, l*d),
/// then three dense layers with LeakyReLU between them.
RealMatrix ffn_project(const RealNodeFeatures& y, const FfnHead& head, Index n_vars);

/// Intermediates of one forward pass, kept for reverse mode.
struct ForwardTrace {
    RealVector nodes;                 // (n) hypervariate node values
    RealNodeFeatures embedded;        // (n, d)
    Spectrum spectrum;                // F(embedded)
    std::vector<Spectrum> chain_in;   // per step: the matrix multiplied by S_k
    std::vector<Spectrum> pre_act;    // per step: chain_in * S_k + b_k
    std::vector<Spectrum> post_act;   // per step: act(pre_act)
    Spectrum fourier_out;
    RealNodeFeatures representation;  // real part of IDFT(fourier_out)
    RealMatrix reduced;               // (N, l*d)
    RealMatrix pre1, act1, pre2, act2;
    RealMatrix prediction;            // (N, tau)
};

RealMatrix model_forward(const FourierGnnModel& model, const MtsWindow& window,
                         ImagPolicy policy = ImagPolicy::Discard);

/// Same as `model_forward` but records every intermediate.
ForwardTrace model_forward_traced(const FourierGnnModel& model, const MtsWindow& window,
                                  ImagPolicy policy = ImagPolicy::Discard);

/// The time-domain node representation IDFT(FourierGNN(X)), shape (N*T, d).
RealNodeFeatures node_representation(const FourierGnnModel& model, const MtsWindow& window);

inline constexpr Index kDefaultAdjacencyNodeCap = 4096;

/// A = y y^T normalized by its largest entry.
RealMatrix export_adjacency(const RealNodeFeatures& y, Index max_nodes = kDefaultAdjacencyNodeCap);

/// Averages each (T x T) block of an (N*T)^2 adjacency, giving (N, N).
RealMatrix marginalize_time_adjacency(const RealMatrix& a, Index n_vars, Index n_steps);

/// Throws ShapeError unless the window matches the model's N, T and tau.
void check_window(const ModelConfig& config, const MtsWindow& window);

/// Mutable view of one trainable real tensor. Complex tensors appear as two
/// views (".re" and ".im") striding over the interleaved storage.
struct ParamView {
    std::string name;
    std::vector<Index> shape;
    double* data = nullptr;
    Index size = 0;
    Index stride = 1;

    double& operator[](Index i) const { return data[i * stride]; }
};

/// Trainable tensors in a fixed order. Tied FGO blocks appear once.
std::vector<ParamView> parameter_views(FourierGnnModel& model);

std::size_t parameter_count(const FourierGnnModel& model);

/// Closed-form count from the configuration alone.
std::size_t parameter_count(const ModelConfig& config);

} // namespace fgnn
