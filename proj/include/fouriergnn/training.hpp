#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "fouriergnn/model.hpp"

namespace fgnn {

/// Gradients stored in a buffer shaped exactly like the model, so
/// `views()` lines up one-to-one with `parameter_views(model)`. Complex
/// tensors hold dL/dRe + i dL/dIm, which the views expose as ".re"/".im".
struct GradientSet {
    FourierGnnModel tensors;

    static GradientSet zeros_like(const FourierGnnModel& model);
    std::vector<ParamView> views() { return parameter_views(tensors); }
};

/// Running mean of squared gradients, one entry per real parameter.
struct RmspropState {
    FourierGnnModel mean_square;

    static RmspropState zeros_like(const FourierGnnModel& model);
};

struct TrainConfig {
    double learning_rate = 1e-5;
    Index epochs = 100;
    Index batch_size = 32;
    double rmsprop_decay = 0.9;
    double rmsprop_eps = 1e-8;
    std::uint64_t seed = 0;
    Ablation ablation = Ablation::Full;
    Index patience = 0; // stop after this many epochs without a new best validation MSE; 0 disables

    void validate() const;
};

double mse_loss(const RealMatrix& pred, const RealMatrix& target);

struct LossAndGradients {
    double loss = 0.0;
    GradientSet grads;
};

/// Mean per-window MSE over the batch and its exact gradient w.r.t. every
/// trainable parameter.
LossAndGradients backward(const FourierGnnModel& model, std::span<const MtsWindow> batch);
LossAndGradients backward(const FourierGnnModel& model, std::span<const MtsWindow* const> batch);

/// Mean per-window MSE without gradients.
double dataset_mse(const FourierGnnModel& model, std::span<const MtsWindow> windows);

/// One RMSProp update of a single scalar parameter.
inline void rmsprop_update(double& param, double grad, double& mean_square, double lr, double decay,
                           double eps) {
    mean_square = decay * mean_square + (1.0 - decay) * grad * grad;
    const double denom = std::sqrt(mean_square) + eps;
    if (denom > 0.0) param -= lr * grad / denom;
}

void rmsprop_step(FourierGnnModel& model, GradientSet& grads, RmspropState& state, double lr,
                  double decay, double eps);

struct EpochRecord {
    Index epoch = 0;
    double train_mse = 0.0;
    double val_mse = 0.0;
};

struct FitResult {
    FourierGnnModel final_model;
    FourierGnnModel best_model; // lowest validation MSE, possibly the initial model
    std::vector<EpochRecord> trace;
    double initial_train_mse = 0.0;
    double initial_val_mse = 0.0;
    Index best_epoch = 0;
    double best_val_mse = 0.0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Trains with shuffled mini-batches and RMSProp. Deterministic for a given
/// seed. Throws NumericError if the loss stops being finite.
FitResult fit(FourierGnnModel model, std::span<const MtsWindow> train, std::span<const MtsWindow> val,
              const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Derives an ablated model from a Full one. NoEmbedding changes every
/// shape downstream of the embedding and is therefore re-initialized from
/// `seed`; the other variants keep the existing parameters.
FourierGnnModel make_ablation_variant(const FourierGnnModel& model, Ablation kind, std::uint64_t seed);

void write_trace_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& trace);

struct GradientCheckEntry {
    std::string tensor;
    Index index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    double rel_error = 0.0;
};

struct GradientCheckReport {
    std::vector<GradientCheckEntry> entries;
    Index skipped_kinks = 0; // coordinates redrawn because +-h crossed an activation kink
    double max_rel_error = 0.0;
    std::vector<std::string> tensors_checked;
};

/// Central finite differences on `per_tensor` random coordinates of every
/// trainable tensor (all coordinates when the tensor is smaller).
/// rel_error = |analytic - numeric| / max(|analytic|, |numeric|, abs_floor).
GradientCheckReport check_gradients(const FourierGnnModel& model, std::span<const MtsWindow> batch,
                                    Index per_tensor, double step, std::uint64_t seed,
                                    double abs_floor = 1e-6);

} // namespace fgnn
