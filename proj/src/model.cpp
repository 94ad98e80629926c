#include "fouriergnn/model.hpp"

#include <array>
#include <cmath>
#include <random>
#include <string>

#include "fouriergnn/error.hpp"

namespace fgnn {
namespace {

template <class A, class B>
bool same(const A& a, const B& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

std::string dims(Index r, Index c) { return "(" + std::to_string(r) + ", " + std::to_string(c) + ")"; }

void expect_shape(const RealMatrix& m, Index rows, Index cols, const char* name) {
    if (m.rows() != rows || m.cols() != cols) {
        throw ShapeError(std::string(name) + " has shape " + dims(m.rows(), m.cols()) +
                         ", expected " + dims(rows, cols));
    }
}

void expect_size(const RealVector& v, Index size, const char* name) {
    if (v.size() != size) {
        throw ShapeError(std::string(name) + " has length " + std::to_string(v.size()) +
                         ", expected " + std::to_string(size));
    }
}

class Uniform {
public:
    explicit Uniform(std::uint64_t seed) : engine_(seed) {}

    void fill(RealMatrix& m, double bound) {
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (Index i = 0; i < m.size(); ++i) m.data()[i] = dist(engine_);
    }
    void fill(RealVector& v, double bound) {
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (Index i = 0; i < v.size(); ++i) v[i] = dist(engine_);
    }
    void fill(ComplexMatrix& m, double bound) {
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (Index i = 0; i < m.size(); ++i) {
            const double re = dist(engine_);
            const double im = dist(engine_);
            m.data()[i] = Complex(re, im);
        }
    }

private:
    std::mt19937_64 engine_;
};

void apply_ablation_layout(FourierGnnModel& model) {
    const auto k = static_cast<std::size_t>(model.config.layers);
    model.fgo.step_block.assign(k, 0);
    if (model.config.ablation != Ablation::NoDynamicFgo) {
        for (std::size_t i = 0; i < k; ++i) model.fgo.step_block[i] = i;
    }
    model.fgo.residual = model.config.ablation != Ablation::NoResidual;
    model.fgo.summation = model.config.ablation != Ablation::NoSummation;
}

Spectrum fgo_impl(Spectrum p0, const FgoStack& stack, const Activation& act, bool recursive,
                  ForwardTrace* trace) {
    const Index k_total = stack.steps();
    if (k_total < 1) throw ShapeError("FGO stack needs at least one diffusion step");
    const Index d = p0.cols();

    Spectrum out = (stack.residual && stack.summation) ? p0 : Spectrum::Zero(p0.rows(), d);
    Spectrum chain = std::move(p0);
    for (Index k = 0; k < k_total; ++k) {
        const FgoLayer& layer = stack.step(k);
        if (layer.weight.rows() != d || layer.weight.cols() != d || layer.bias.size() != d) {
            throw ShapeError("FGO layer " + std::to_string(k + 1) + " does not match feature dimension " +
                             std::to_string(d));
        }
        Spectrum product = chain * layer.weight;
        Spectrum pre = product;
        pre.rowwise() += layer.bias.transpose();
        Spectrum post = apply_activation(pre, act);
        if (stack.summation || k == k_total - 1) out += post;
        if (trace != nullptr) {
            trace->chain_in.push_back(std::move(chain));
            trace->pre_act.push_back(std::move(pre));
            trace->post_act.push_back(post);
        }
        chain = recursive ? std::move(post) : std::move(product);
    }
    return out;
}

RealMatrix reduce_time(const RealNodeFeatures& y, const FfnHead& head, Index n_vars) {
    if (n_vars < 1 || y.rows() % n_vars != 0) {
        throw ShapeError("node count " + std::to_string(y.rows()) + " is not a multiple of N = " +
                         std::to_string(n_vars));
    }
    const Index t = y.rows() / n_vars;
    const Index d = y.cols();
    Index l = t;
    if (head.time_reduce) {
        if (head.time_reduce->rows() != t) {
            throw ShapeError("time_reduce has " + std::to_string(head.time_reduce->rows()) +
                             " rows, expected T = " + std::to_string(t));
        }
        l = head.time_reduce->cols();
    }
    RealMatrix out(n_vars, l * d);
    for (Index v = 0; v < n_vars; ++v) {
        RealMatrix block = head.time_reduce
                               ? RealMatrix(head.time_reduce->transpose() * y.middleRows(v * t, t))
                               : RealMatrix(y.middleRows(v * t, t));
        out.row(v) = Eigen::Map<const Eigen::RowVectorXd>(block.data(), l * d);
    }
    return out;
}

void dense_forward(const FfnHead& head, ForwardTrace& tr) {
    expect_shape(head.w1, tr.reduced.cols(), head.w1.cols(), "head.w1");
    expect_size(head.b1, head.w1.cols(), "head.b1");
    expect_shape(head.w2, head.w1.cols(), head.w2.cols(), "head.w2");
    expect_size(head.b2, head.w2.cols(), "head.b2");
    expect_shape(head.w3, head.w2.cols(), head.w3.cols(), "head.w3");
    expect_size(head.b3, head.w3.cols(), "head.b3");

    tr.pre1 = tr.reduced * head.w1;
    tr.pre1.rowwise() += head.b1.transpose();
    tr.act1 = leaky_relu_real(tr.pre1, head.leaky_slope);
    tr.pre2 = tr.act1 * head.w2;
    tr.pre2.rowwise() += head.b2.transpose();
    tr.act2 = leaky_relu_real(tr.pre2, head.leaky_slope);
    tr.prediction = tr.act2 * head.w3;
    tr.prediction.rowwise() += head.b3.transpose();
}

} // namespace

std::string_view to_string(Ablation kind) {
    switch (kind) {
    case Ablation::Full: return "full";
    case Ablation::NoEmbedding: return "no_embedding";
    case Ablation::NoDynamicFgo: return "no_dynamic_fgo";
    case Ablation::NoResidual: return "no_residual";
    case Ablation::NoSummation: return "no_summation";
    }
    return "full";
}

Ablation ablation_from_string(std::string_view name) {
    for (auto kind : {Ablation::Full, Ablation::NoEmbedding, Ablation::NoDynamicFgo,
                      Ablation::NoResidual, Ablation::NoSummation}) {
        if (to_string(kind) == name) return kind;
    }
    throw ConfigError("", "unknown ablation '" + std::string(name) + "'");
}

std::string_view to_string(DftMode mode) {
    return mode == DftMode::Flat1d ? "flat_1d" : "planar_2d";
}

DftMode dft_mode_from_string(std::string_view name) {
    if (name == "flat_1d") return DftMode::Flat1d;
    if (name == "planar_2d") return DftMode::Planar2d;
    throw ConfigError("", "unknown dft_mode '" + std::string(name) + "'");
}

NodeAxis ModelConfig::node_axis() const {
    return dft_mode == DftMode::Planar2d ? NodeAxis::planar(n_vars, n_steps) : NodeAxis::flat();
}

void ModelConfig::validate() const {
    auto positive = [](Index v, const char* key) {
        if (v < 1) throw ConfigError(std::string("model.") + key, "must be >= 1, got " + std::to_string(v));
    };
    positive(n_vars, "n_vars");
    positive(n_steps, "T");
    positive(horizon, "tau");
    positive(embed_dim, "d");
    positive(layers, "K");
    positive(reduced_steps, "l");
    positive(ffn1, "d_ffn1");
    positive(ffn2, "d_ffn2");
    if (reduced_steps > n_steps) throw ConfigError("model.l", "must not exceed T");
    if (!(leaky_slope > 0.0 && leaky_slope < 1.0)) throw ConfigError("model.leaky_slope", "must lie in (0, 1)");
    if (activation.kind == Activation::Kind::LeakyRelu && !(activation.slope > 0.0 && activation.slope < 1.0)) {
        throw ConfigError("model.activation", "LeakyRelu slope must lie in (0, 1)");
    }
    if (ablation == Ablation::NoEmbedding && embed_dim != 1) {
        throw ConfigError("model.d", "the no_embedding variant requires d = 1");
    }
}

bool operator==(const FgoLayer& a, const FgoLayer& b) {
    return same(a.weight, b.weight) && same(a.bias, b.bias);
}

bool operator==(const FgoStack& a, const FgoStack& b) {
    return a.blocks == b.blocks && a.step_block == b.step_block && a.residual == b.residual &&
           a.summation == b.summation;
}

bool operator==(const FfnHead& a, const FfnHead& b) {
    if (a.time_reduce.has_value() != b.time_reduce.has_value()) return false;
    if (a.time_reduce && !same(*a.time_reduce, *b.time_reduce)) return false;
    return same(a.w1, b.w1) && same(a.b1, b.b1) && same(a.w2, b.w2) && same(a.b2, b.b2) &&
           same(a.w3, b.w3) && same(a.b3, b.b3) && a.leaky_slope == b.leaky_slope;
}

bool operator==(const FourierGnnModel& a, const FourierGnnModel& b) {
    return a.config == b.config && same(a.embedding, b.embedding) && a.fgo == b.fgo && a.head == b.head;
}

FgoStack FgoStack::independent(std::vector<FgoLayer> layers) {
    FgoStack stack;
    stack.step_block.resize(layers.size());
    for (std::size_t i = 0; i < layers.size(); ++i) stack.step_block[i] = i;
    stack.blocks = std::move(layers);
    return stack;
}

FourierGnnModel zero_model(const ModelConfig& config) {
    config.validate();
    const Index d = config.embed_dim;
    FourierGnnModel model;
    model.config = config;
    model.embedding = config.trainable_embedding() ? RealVector::Zero(d) : RealVector::Ones(1);

    const Index blocks = config.ablation == Ablation::NoDynamicFgo ? 1 : config.layers;
    model.fgo.blocks.assign(static_cast<std::size_t>(blocks),
                            FgoLayer{ComplexMatrix::Zero(d, d), ComplexVector::Zero(d)});
    apply_ablation_layout(model);

    FfnHead& h = model.head;
    if (config.has_time_reduce()) h.time_reduce = RealMatrix::Zero(config.n_steps, config.reduced_steps);
    h.w1 = RealMatrix::Zero(config.reduced_steps * d, config.ffn1);
    h.b1 = RealVector::Zero(config.ffn1);
    h.w2 = RealMatrix::Zero(config.ffn1, config.ffn2);
    h.b2 = RealVector::Zero(config.ffn2);
    h.w3 = RealMatrix::Zero(config.ffn2, config.horizon);
    h.b3 = RealVector::Zero(config.horizon);
    h.leaky_slope = config.leaky_slope;
    return model;
}

FourierGnnModel init_model(const ModelConfig& config, std::uint64_t seed) {
    FourierGnnModel model = zero_model(config);
    Uniform rng(seed);
    const auto bound = [](Index fan_in) { return 1.0 / std::sqrt(static_cast<double>(fan_in)); };

    if (config.trainable_embedding()) rng.fill(model.embedding, 1.0);
    for (auto& block : model.fgo.blocks) rng.fill(block.weight, bound(config.embed_dim));
    FfnHead& h = model.head;
    if (h.time_reduce) rng.fill(*h.time_reduce, bound(config.n_steps));
    rng.fill(h.w1, bound(h.w1.rows()));
    rng.fill(h.w2, bound(h.w2.rows()));
    rng.fill(h.w3, bound(h.w3.rows()));
    return model;
}

HypervariateGraph build_hypervariate(const MtsWindow& window) {
    const Index n = window.input.rows();
    const Index t = window.input.cols();
    if (n < 1 || t < 1) throw ShapeError("window input must be at least 1x1");
    require_finite(window.input, "window input");
    HypervariateGraph graph;
    graph.n_vars = n;
    graph.n_steps = t;
    // Row-major storage already is the variable * T + step layout.
    graph.node_features = Eigen::Map<const RealVector>(window.input.data(), n * t);
    return graph;
}

RealNodeFeatures embed_nodes(const HypervariateGraph& graph, const RealVector& embedding) {
    if (embedding.size() < 1) throw ShapeError("embedding dimension must be >= 1");
    return graph.node_features * embedding.transpose();
}

Spectrum fgo_forward(const RealNodeFeatures& x, const FgoStack& stack, const Activation& act,
                     bool recursive, const NodeAxis& axis) {
    return fgo_impl(dft_nodes(x, axis), stack, act, recursive, nullptr);
}

Spectrum fgo_forward(const RealNodeFeatures& x, const std::vector<FgoLayer>& layers,
                     const Activation& act, bool recursive, const NodeAxis& axis) {
    return fgo_forward(x, FgoStack::independent(layers), act, recursive, axis);
}

RealMatrix ffn_project(const RealNodeFeatures& y, const FfnHead& head, Index n_vars) {
    ForwardTrace tr;
    tr.reduced = reduce_time(y, head, n_vars);
    dense_forward(head, tr);
    return std::move(tr.prediction);
}

void check_window(const ModelConfig& config, const MtsWindow& window) {
    expect_shape(window.input, config.n_vars, config.n_steps, "window input");
    if (window.target.size() != 0) expect_shape(window.target, config.n_vars, config.horizon, "window target");
}

ForwardTrace model_forward_traced(const FourierGnnModel& model, const MtsWindow& window,
                                  ImagPolicy policy) {
    const ModelConfig& cfg = model.config;
    check_window(cfg, window);
    const NodeAxis axis = cfg.node_axis();

    ForwardTrace tr;
    const HypervariateGraph graph = build_hypervariate(window);
    tr.nodes = graph.node_features;
    tr.embedded = embed_nodes(graph, model.embedding);
    tr.spectrum = dft_nodes(tr.embedded, axis);
    tr.fourier_out = fgo_impl(tr.spectrum, model.fgo, cfg.activation, cfg.recursive_activation, &tr);
    require_finite(tr.fourier_out, "FGO output");
    tr.representation = to_real(idft_nodes(tr.fourier_out, axis), policy);
    tr.reduced = reduce_time(tr.representation, model.head, cfg.n_vars);
    dense_forward(model.head, tr);
    require_finite(tr.prediction, "forecast");
    return tr;
}

RealMatrix model_forward(const FourierGnnModel& model, const MtsWindow& window, ImagPolicy policy) {
    return std::move(model_forward_traced(model, window, policy).prediction);
}

RealNodeFeatures node_representation(const FourierGnnModel& model, const MtsWindow& window) {
    check_window(model.config, window);
    const NodeAxis axis = model.config.node_axis();
    const RealNodeFeatures x = embed_nodes(build_hypervariate(window), model.embedding);
    const Spectrum out = fgo_forward(x, model.fgo, model.config.activation,
                                     model.config.recursive_activation, axis);
    return to_real(idft_nodes(out, axis));
}

RealMatrix export_adjacency(const RealNodeFeatures& y, Index max_nodes) {
    if (y.rows() > max_nodes) {
        throw ShapeError("adjacency export refused: " + std::to_string(y.rows()) +
                         " nodes exceeds the cap of " + std::to_string(max_nodes));
    }
    require_finite(y, "node representation");
    RealMatrix a = y * y.transpose();
    const double peak = a.size() > 0 ? a.maxCoeff() : 0.0;
    if (!(peak > 0.0)) throw NumericError("degenerate node representation: max(A) is not positive");
    a /= peak;
    return a;
}

RealMatrix marginalize_time_adjacency(const RealMatrix& a, Index n_vars, Index n_steps) {
    const Index n = n_vars * n_steps;
    if (n_vars < 1 || n_steps < 1) throw ShapeError("N and T must be >= 1");
    expect_shape(a, n, n, "adjacency");
    RealMatrix out(n_vars, n_vars);
    for (Index u = 0; u < n_vars; ++u) {
        for (Index v = 0; v < n_vars; ++v) out(u, v) = a.block(u * n_steps, v * n_steps, n_steps, n_steps).mean();
    }
    return out;
}

std::vector<ParamView> parameter_views(FourierGnnModel& model) {
    std::vector<ParamView> views;
    auto real = [&](std::string name, std::vector<Index> shape, double* data, Index size) {
        views.push_back({std::move(name), std::move(shape), data, size, 1});
    };
    auto cplx = [&](const std::string& name, std::vector<Index> shape, Complex* data, Index size) {
        auto* raw = reinterpret_cast<double*>(data);
        views.push_back({name + ".re", shape, raw, size, 2});
        views.push_back({name + ".im", shape, raw + 1, size, 2});
    };

    const Index d = model.config.embed_dim;
    if (model.config.trainable_embedding()) real("embedding", {d}, model.embedding.data(), d);
    for (std::size_t b = 0; b < model.fgo.blocks.size(); ++b) {
        auto& block = model.fgo.blocks[b];
        const std::string prefix = "fgo." + std::to_string(b);
        cplx(prefix + ".weight", {d, d}, block.weight.data(), block.weight.size());
        cplx(prefix + ".bias", {d}, block.bias.data(), block.bias.size());
    }
    FfnHead& h = model.head;
    if (h.time_reduce) {
        real("head.time_reduce", {h.time_reduce->rows(), h.time_reduce->cols()}, h.time_reduce->data(),
             h.time_reduce->size());
    }
    real("head.w1", {h.w1.rows(), h.w1.cols()}, h.w1.data(), h.w1.size());
    real("head.b1", {h.b1.size()}, h.b1.data(), h.b1.size());
    real("head.w2", {h.w2.rows(), h.w2.cols()}, h.w2.data(), h.w2.size());
    real("head.b2", {h.b2.size()}, h.b2.data(), h.b2.size());
    real("head.w3", {h.w3.rows(), h.w3.cols()}, h.w3.data(), h.w3.size());
    real("head.b3", {h.b3.size()}, h.b3.data(), h.b3.size());
    return views;
}

std::size_t parameter_count(const FourierGnnModel& model) {
    auto copy = model;
    std::size_t total = 0;
    for (const auto& v : parameter_views(copy)) total += static_cast<std::size_t>(v.size);
    return total;
}

std::size_t parameter_count(const ModelConfig& c) {
    c.validate();
    const auto d = static_cast<std::size_t>(c.embed_dim);
    const std::size_t blocks = c.ablation == Ablation::NoDynamicFgo ? 1 : static_cast<std::size_t>(c.layers);
    const auto t = static_cast<std::size_t>(c.n_steps);
    const auto l = static_cast<std::size_t>(c.reduced_steps);
    const auto f1 = static_cast<std::size_t>(c.ffn1);
    const auto f2 = static_cast<std::size_t>(c.ffn2);
    const auto tau = static_cast<std::size_t>(c.horizon);
    std::size_t total = c.trainable_embedding() ? d : 0;
    total += blocks * (2 * d * d + 2 * d);
    if (c.has_time_reduce()) total += t * l;
    total += l * d * f1 + f1 + f1 * f2 + f2 + f2 * tau + tau;
    return total;
}

} // namespace fgnn
