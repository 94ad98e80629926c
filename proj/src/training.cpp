#include "fouriergnn/training.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <string>

#include "fouriergnn/error.hpp"

namespace fgnn {
namespace {

template <class Model>
Model zeros_shaped(const Model& model) {
    Model out = model;
    for (auto& v : parameter_views(out)) {
        for (Index i = 0; i < v.size; ++i) v[i] = 0.0;
    }
    return out;
}

// Accumulates one window's gradient into `g`. `scale` is dL/dpred per unit
// residual, i.e. 2 / (N * tau * batch).
void accumulate_window(const FourierGnnModel& model, const ForwardTrace& tr, const RealMatrix& target,
                       double scale, FourierGnnModel& g) {
    const ModelConfig& cfg = model.config;
    const FfnHead& head = model.head;
    FfnHead& gh = g.head;

    const RealMatrix g_pred = scale * (tr.prediction - target);
    gh.w3 += tr.act2.transpose() * g_pred;
    gh.b3 += g_pred.colwise().sum().transpose();
    const RealMatrix g_pre2 = leaky_relu_real_backward(tr.pre2, g_pred * head.w3.transpose(), head.leaky_slope);
    gh.w2 += tr.act1.transpose() * g_pre2;
    gh.b2 += g_pre2.colwise().sum().transpose();
    const RealMatrix g_pre1 = leaky_relu_real_backward(tr.pre1, g_pre2 * head.w2.transpose(), head.leaky_slope);
    gh.w1 += tr.reduced.transpose() * g_pre1;
    gh.b1 += g_pre1.colwise().sum().transpose();
    const RealMatrix g_reduced = g_pre1 * head.w1.transpose();

    // Undo the (N, l*d) flattening and the time reduction.
    const Index t = cfg.n_steps;
    const Index d = tr.representation.cols();
    const Index l = g_reduced.cols() / d;
    RealNodeFeatures g_repr(tr.representation.rows(), d);
    for (Index v = 0; v < cfg.n_vars; ++v) {
        const Eigen::Map<const RealMatrix> g_block(g_reduced.row(v).data(), l, d);
        if (head.time_reduce) {
            *gh.time_reduce += tr.representation.middleRows(v * t, t) * g_block.transpose();
            g_repr.middleRows(v * t, t) = *head.time_reduce * g_block;
        } else {
            g_repr.middleRows(v * t, t) = g_block;
        }
    }

    // representation = Re(F^-1 out)  =>  g_out = F(g_repr) / n.
    const NodeAxis axis = cfg.node_axis();
    Spectrum g_out = dft_nodes(g_repr, axis);
    g_out /= static_cast<double>(g_repr.rows());

    const FgoStack& stack = model.fgo;
    const Index k_total = stack.steps();
    const bool keep_all = stack.summation;
    Spectrum carry = Spectrum::Zero(g_out.rows(), g_out.cols());
    for (Index k = k_total - 1; k >= 0; --k) {
        const auto ku = static_cast<std::size_t>(k);
        const FgoLayer& layer = stack.step(k);
        FgoLayer& g_layer = g.fgo.blocks[stack.step_block[ku]];
        const bool direct = keep_all || k == k_total - 1;

        Spectrum g_pre;
        Spectrum g_product;
        if (cfg.recursive_activation) {
            // post_k = act(chain_in_k S_k + b_k), chain_in_{k+1} = post_k
            Spectrum g_post = carry;
            if (direct) g_post += g_out;
            g_pre = activation_backward(tr.pre_act[ku], g_post, cfg.activation);
            g_product = g_pre;
        } else {
            // product_k = chain_in_k S_k feeds both the activation and chain_in_{k+1}
            g_pre = direct ? activation_backward(tr.pre_act[ku], g_out, cfg.activation)
                           : Spectrum::Zero(g_out.rows(), g_out.cols());
            g_product = g_pre + carry;
        }
        g_layer.weight += tr.chain_in[ku].adjoint() * g_product;
        g_layer.bias += g_pre.colwise().sum().transpose();
        carry = g_product * layer.weight.adjoint();
    }
    Spectrum g_spectrum = carry;
    if (stack.residual && stack.summation) g_spectrum += g_out;

    // spectrum = F(embedded) with real input  =>  g_embedded = Re(F^H g_spectrum).
    const RealNodeFeatures g_embedded = dft_nodes_adjoint(g_spectrum, axis).real();
    if (cfg.trainable_embedding()) g.embedding += g_embedded.transpose() * tr.nodes;
}

void collect_pattern(const ForwardTrace& tr, const Activation& act, std::vector<bool>& out) {
    out.clear();
    if (act.kind != Activation::Kind::Identity) {
        for (const auto& pre : tr.pre_act) {
            for (Index i = 0; i < pre.size(); ++i) {
                out.push_back(pre.data()[i].real() > 0.0);
                out.push_back(pre.data()[i].imag() > 0.0);
            }
        }
    }
    for (const RealMatrix* m : {&tr.pre1, &tr.pre2}) {
        for (Index i = 0; i < m->size(); ++i) out.push_back(m->data()[i] > 0.0);
    }
}

double batch_loss(const FourierGnnModel& model, std::span<const MtsWindow> batch,
                  std::vector<std::vector<bool>>* patterns) {
    double total = 0.0;
    if (patterns != nullptr) patterns->resize(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const ForwardTrace tr = model_forward_traced(model, batch[i]);
        total += mse_loss(tr.prediction, batch[i].target);
        if (patterns != nullptr) collect_pattern(tr, model.config.activation, (*patterns)[i]);
    }
    return total / static_cast<double>(batch.size());
}

} // namespace

GradientSet GradientSet::zeros_like(const FourierGnnModel& model) { return {zeros_shaped(model)}; }

RmspropState RmspropState::zeros_like(const FourierGnnModel& model) { return {zeros_shaped(model)}; }

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw ConfigError("training.learning_rate", "must be a finite value >= 0");
    }
    if (epochs < 0) throw ConfigError("training.epochs", "must be >= 0");
    if (batch_size < 1) throw ConfigError("training.batch_size", "must be >= 1");
    if (!(rmsprop_decay > 0.0 && rmsprop_decay < 1.0)) throw ConfigError("training.rmsprop_decay", "must lie in (0, 1)");
    if (!(rmsprop_eps >= 0.0)) throw ConfigError("training.rmsprop_eps", "must be >= 0");
    if (patience < 0) throw ConfigError("training.patience", "must be >= 0");
}

double mse_loss(const RealMatrix& pred, const RealMatrix& target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
        throw ShapeError("mse_loss: prediction and target shapes differ");
    }
    if (pred.size() == 0) throw ShapeError("mse_loss: empty arrays");
    return (pred - target).squaredNorm() / static_cast<double>(pred.size());
}

LossAndGradients backward(const FourierGnnModel& model, std::span<const MtsWindow* const> batch) {
    if (batch.empty()) throw DataError("backward: empty batch");
    LossAndGradients out{0.0, GradientSet::zeros_like(model)};
    const double count = static_cast<double>(batch.size());
    const double scale =
        2.0 / (static_cast<double>(model.config.n_vars * model.config.horizon) * count);
    for (const MtsWindow* w : batch) {
        const ForwardTrace tr = model_forward_traced(model, *w);
        out.loss += mse_loss(tr.prediction, w->target) / count;
        accumulate_window(model, tr, w->target, scale, out.grads.tensors);
    }
    if (!std::isfinite(out.loss)) throw NumericError("non-finite loss");
    for (const auto& v : out.grads.views()) {
        for (Index i = 0; i < v.size; ++i) {
            if (!std::isfinite(v[i])) throw NumericError("non-finite gradient in " + v.name);
        }
    }
    return out;
}

LossAndGradients backward(const FourierGnnModel& model, std::span<const MtsWindow> batch) {
    std::vector<const MtsWindow*> ptrs;
    ptrs.reserve(batch.size());
    for (const auto& w : batch) ptrs.push_back(&w);
    return backward(model, std::span<const MtsWindow* const>(ptrs));
}

double dataset_mse(const FourierGnnModel& model, std::span<const MtsWindow> windows) {
    if (windows.empty()) throw DataError("dataset_mse: no windows");
    return batch_loss(model, windows, nullptr);
}

void rmsprop_step(FourierGnnModel& model, GradientSet& grads, RmspropState& state, double lr,
                  double decay, double eps) {
    auto params = parameter_views(model);
    auto gs = grads.views();
    auto ss = parameter_views(state.mean_square);
    if (params.size() != gs.size() || params.size() != ss.size()) {
        throw ShapeError("rmsprop_step: parameter, gradient and state layouts differ");
    }
    for (std::size_t t = 0; t < params.size(); ++t) {
        if (params[t].size != gs[t].size || params[t].size != ss[t].size) {
            throw ShapeError("rmsprop_step: size mismatch in " + params[t].name);
        }
        for (Index i = 0; i < params[t].size; ++i) {
            rmsprop_update(params[t][i], gs[t][i], ss[t][i], lr, decay, eps);
        }
    }
}

FitResult fit(FourierGnnModel model, std::span<const MtsWindow> train, std::span<const MtsWindow> val,
              const TrainConfig& config, const EpochCallback& on_epoch) {
    config.validate();
    if (train.empty()) throw DataError("fit: training split has no windows");
    if (val.empty()) throw DataError("fit: validation split has no windows");
    if (config.ablation != model.config.ablation) {
        model = make_ablation_variant(model, config.ablation, config.seed);
    }

    FitResult result;
    result.initial_train_mse = dataset_mse(model, train);
    result.initial_val_mse = dataset_mse(model, val);
    result.best_val_mse = result.initial_val_mse;
    result.best_model = model;

    std::mt19937_64 rng(config.seed);
    RmspropState state = RmspropState::zeros_like(model);
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<const MtsWindow*> batch;
    Index stale = 0;

    for (Index epoch = 1; epoch <= config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double weighted = 0.0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            batch.clear();
            for (std::size_t i = start; i < stop; ++i) batch.push_back(&train[order[i]]);
            LossAndGradients lg;
            try {
                lg = backward(model, std::span<const MtsWindow* const>(batch));
            } catch (const NumericError& e) {
                throw NumericError("training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
            }
            weighted += lg.loss * static_cast<double>(batch.size());
            rmsprop_step(model, lg.grads, state, config.learning_rate, config.rmsprop_decay, config.rmsprop_eps);
        }

        EpochRecord rec{epoch, weighted / static_cast<double>(order.size()), dataset_mse(model, val)};
        if (!std::isfinite(rec.val_mse)) {
            throw NumericError("training diverged at epoch " + std::to_string(epoch) + ": validation MSE is not finite");
        }
        result.trace.push_back(rec);
        if (on_epoch) on_epoch(rec);
        if (rec.val_mse < result.best_val_mse) {
            result.best_val_mse = rec.val_mse;
            result.best_epoch = epoch;
            result.best_model = model;
            stale = 0;
        } else if (config.patience > 0 && ++stale >= config.patience) {
            break;
        }
    }
    result.final_model = std::move(model);
    return result;
}

FourierGnnModel make_ablation_variant(const FourierGnnModel& model, Ablation kind, std::uint64_t seed) {
    if (kind == Ablation::Full) return model;
    if (model.config.ablation != Ablation::Full) {
        throw ConfigError("training.ablation", "variants can only be derived from the full model");
    }
    ModelConfig cfg = model.config;
    cfg.ablation = kind;
    if (kind == Ablation::NoEmbedding) {
        cfg.embed_dim = 1;
        return init_model(cfg, seed);
    }
    FourierGnnModel out = model;
    out.config = cfg;
    switch (kind) {
    case Ablation::NoDynamicFgo:
        out.fgo.blocks = {model.fgo.step(0)};
        out.fgo.step_block.assign(out.fgo.step_block.size(), 0);
        break;
    case Ablation::NoResidual:
        out.fgo.residual = false;
        break;
    case Ablation::NoSummation:
        out.fgo.summation = false;
        break;
    default:
        break;
    }
    return out;
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& trace) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out.precision(17);
    out << "epoch,train_mse,val_mse\n";
    for (const auto& r : trace) out << r.epoch << ',' << r.train_mse << ',' << r.val_mse << '\n';
}

GradientCheckReport check_gradients(const FourierGnnModel& model, std::span<const MtsWindow> batch,
                                    Index per_tensor, double step, std::uint64_t seed, double abs_floor) {
    GradientCheckReport report;
    LossAndGradients lg = backward(model, batch);
    auto grad_views = lg.grads.views();

    FourierGnnModel probe = model;
    auto views = parameter_views(probe);
    std::vector<std::vector<bool>> base_pattern;
    batch_loss(probe, batch, &base_pattern);
    std::vector<std::vector<bool>> plus_pattern;
    std::vector<std::vector<bool>> minus_pattern;

    std::mt19937_64 rng(seed);
    for (std::size_t t = 0; t < views.size(); ++t) {
        const ParamView& v = views[t];
        report.tensors_checked.push_back(v.name);
        std::vector<Index> coords(static_cast<std::size_t>(v.size));
        std::iota(coords.begin(), coords.end(), Index{0});
        std::shuffle(coords.begin(), coords.end(), rng);

        Index done = 0;
        for (Index idx : coords) {
            if (done >= per_tensor) break;
            const double saved = v[idx];
            v[idx] = saved + step;
            const double up = batch_loss(probe, batch, &plus_pattern);
            v[idx] = saved - step;
            const double down = batch_loss(probe, batch, &minus_pattern);
            v[idx] = saved;
            if (plus_pattern != base_pattern || minus_pattern != base_pattern) {
                ++report.skipped_kinks;
                continue;
            }
            GradientCheckEntry e{v.name, idx, grad_views[t][idx], (up - down) / (2.0 * step), 0.0};
            const double denom = std::max({std::abs(e.analytic), std::abs(e.numeric), abs_floor});
            e.rel_error = std::abs(e.analytic - e.numeric) / denom;
            report.max_rel_error = std::max(report.max_rel_error, e.rel_error);
            report.entries.push_back(std::move(e));
            ++done;
        }
    }
    return report;
}

} // namespace fgnn
