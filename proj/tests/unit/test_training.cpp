#include <doctest.h>

#include "fouriergnn/data.hpp"
#include "fouriergnn/error.hpp"
#include "fouriergnn/training.hpp"
#include "helpers.hpp"

using namespace fgnn;
using testing::max_abs;

namespace {

ModelConfig tiny(Index d = 3, Index k = 2) {
    ModelConfig c;
    c.n_vars = 3;
    c.n_steps = 4;
    c.horizon = 2;
    c.embed_dim = d;
    c.layers = k;
    c.reduced_steps = 3;
    c.ffn1 = 5;
    c.ffn2 = 4;
    return c;
}

std::vector<MtsWindow> random_batch(const ModelConfig& c, Index count, std::uint64_t seed) {
    std::vector<MtsWindow> out;
    for (Index i = 0; i < count; ++i) {
        const auto s = seed + 2 * static_cast<std::uint64_t>(i);
        out.push_back({testing::random_real(c.n_vars, c.n_steps, s), testing::random_real(c.n_vars, c.horizon, s + 1),
                       i});
    }
    return out;
}

// FGO biases start at zero; nonzero ones exercise more of the backward pass.
FourierGnnModel perturbed(const ModelConfig& c, std::uint64_t seed) {
    FourierGnnModel m = init_model(c, seed);
    for (std::size_t b = 0; b < m.fgo.blocks.size(); ++b) {
        m.fgo.blocks[b].bias = 0.3 * testing::random_complex(c.embed_dim, 1, seed + 100 + b).col(0);
    }
    m.head.b1 = 0.1 * testing::random_real(c.ffn1, 1, seed + 200).col(0);
    m.head.b2 = 0.1 * testing::random_real(c.ffn2, 1, seed + 201).col(0);
    return m;
}

void check_fd(const FourierGnnModel& m, const std::vector<MtsWindow>& batch) {
    const GradientCheckReport r = check_gradients(m, batch, 50, 1e-5, 17);
    CAPTURE(r.max_rel_error);
    CHECK(r.max_rel_error < 1e-4);
    auto views = parameter_views(const_cast<FourierGnnModel&>(m));
    CHECK(r.tensors_checked.size() == views.size());
}

} // namespace

TEST_CASE("mse loss") {
    RealMatrix p(1, 2), t(1, 2);
    p << 1, 2;
    t << 1, 4;
    CHECK(mse_loss(p, p) == 0.0);
    CHECK(mse_loss(p, t) == 2.0);
    const RealMatrix a = testing::random_real(3, 4, 1), b = testing::random_real(3, 4, 2);
    double acc = 0.0;
    for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j < 4; ++j) acc += (a(i, j) - b(i, j)) * (a(i, j) - b(i, j));
    CHECK(mse_loss(a, b) == doctest::Approx(acc / 12).epsilon(1e-15));
    CHECK_THROWS_AS(mse_loss(a, RealMatrix::Zero(2, 2)), ShapeError);
}

TEST_CASE("output bias gradient vanishes at an exact fit") {
    const ModelConfig c = tiny();
    const FourierGnnModel m = perturbed(c, 1);
    auto batch = random_batch(c, 3, 5);
    for (auto& w : batch) w.target = model_forward(m, w);
    const LossAndGradients lg = backward(m, std::span<const MtsWindow>(batch));
    CHECK(lg.loss == 0.0);
    CHECK(max_abs(RealMatrix(lg.grads.tensors.head.b3)) == 0.0);
}

TEST_CASE("final layer gradient matches its closed form") {
    const ModelConfig c = tiny();
    const FourierGnnModel m = perturbed(c, 2);
    const auto batch = random_batch(c, 4, 9);
    const LossAndGradients lg = backward(m, std::span<const MtsWindow>(batch));
    RealMatrix expected = RealMatrix::Zero(c.ffn2, c.horizon);
    for (const auto& w : batch) {
        const ForwardTrace tr = model_forward_traced(m, w);
        expected += 2.0 / static_cast<double>(c.n_vars * c.horizon) * tr.act2.transpose() * (tr.prediction - w.target);
    }
    expected /= static_cast<double>(batch.size());
    CHECK(max_abs(lg.grads.tensors.head.w3 - expected) < 1e-13);
}

TEST_CASE("finite differences: full model and variants") {
    const ModelConfig c = tiny();
    const auto batch = random_batch(c, 3, 21);
    SUBCASE("full") { check_fd(perturbed(c, 3), batch); }
    SUBCASE("no time reduction") {
        ModelConfig c2 = c;
        c2.reduced_steps = c2.n_steps;
        check_fd(perturbed(c2, 4), batch);
    }
    SUBCASE("recursive") {
        ModelConfig c2 = c;
        c2.recursive_activation = true;
        check_fd(perturbed(c2, 5), batch);
    }
    SUBCASE("planar dft") {
        ModelConfig c2 = c;
        c2.dft_mode = DftMode::Planar2d;
        check_fd(perturbed(c2, 6), batch);
    }
    SUBCASE("leaky complex activation, K=3") {
        ModelConfig c2 = tiny(4, 3);
        c2.activation = Activation::leaky_relu(0.2);
        check_fd(perturbed(c2, 7), batch);
    }
    for (Ablation a : {Ablation::NoEmbedding, Ablation::NoDynamicFgo, Ablation::NoResidual, Ablation::NoSummation}) {
        SUBCASE(std::string(to_string(a)).c_str()) {
            const FourierGnnModel v = make_ablation_variant(perturbed(c, 8), a, 8);
            FourierGnnModel vp = v;
            for (auto& b : vp.fgo.blocks) b.bias = 0.3 * testing::random_complex(b.bias.size(), 1, 77).col(0);
            check_fd(vp, batch);
        }
    }
}

TEST_CASE("rmsprop scalar recurrence") {
    double p = 1.0, s = 0.0;
    rmsprop_update(p, 1.0, s, 0.1, 0.9, 0.0);
    CHECK(s == doctest::Approx(0.1));
    CHECK(p == doctest::Approx(1.0 - 0.1 / std::sqrt(0.1)));
    CHECK(p == doctest::Approx(0.68377).epsilon(1e-5));

    p = 2.0;
    s = 0.5;
    rmsprop_update(p, 0.0, s, 0.1, 0.9, 1e-8);
    CHECK(p == 2.0);
    CHECK(s == doctest::Approx(0.45));

    // Constant gradient: state -> g^2, step -> lr.
    double q = 0.0, st = 0.0, step = 0.0, ref_state = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double before = q;
        rmsprop_update(q, 3.0, st, 0.01, 0.9, 1e-8);
        ref_state = 0.9 * ref_state + 0.1 * 9.0;
        step = before - q;
    }
    CHECK(st == doctest::Approx(ref_state));
    CHECK(step == doctest::Approx(0.01).epsilon(1e-6));
}

TEST_CASE("rmsprop step over the whole model") {
    const ModelConfig c = tiny();
    FourierGnnModel m = perturbed(c, 9);
    const FourierGnnModel before = m;
    GradientSet g = GradientSet::zeros_like(m);
    RmspropState st = RmspropState::zeros_like(m);
    rmsprop_step(m, g, st, 0.1, 0.9, 1e-8);
    CHECK(m == before);

    const auto batch = random_batch(c, 2, 3);
    LossAndGradients lg = backward(m, std::span<const MtsWindow>(batch));
    rmsprop_step(m, lg.grads, st, 1e-3, 0.9, 1e-8);
    auto pv = parameter_views(m);
    auto bv = parameter_views(const_cast<FourierGnnModel&>(before));
    auto gv = lg.grads.views();
    for (std::size_t t = 0; t < pv.size(); ++t) {
        for (Index i = 0; i < std::min<Index>(pv[t].size, 5); ++i) {
            double p = bv[t][i], s = 0.0;
            rmsprop_update(p, gv[t][i], s, 1e-3, 0.9, 1e-8);
            CHECK(pv[t][i] == p);
        }
    }
}

TEST_CASE("ablation variants") {
    const ModelConfig c = tiny();
    const FourierGnnModel full = perturbed(c, 10);
    CHECK(make_ablation_variant(full, Ablation::Full, 1) == full);

    const RealMatrix x = testing::random_real(12, 3, 4);
    FourierGnnModel lin = full;
    for (auto& b : lin.fgo.blocks) b.bias.setZero();
    const FourierGnnModel nores = make_ablation_variant(lin, Ablation::NoResidual, 1);
    const Spectrum diff = fgo_forward(x, lin.fgo, Activation::identity(), false) -
                          fgo_forward(x, nores.fgo, Activation::identity(), false);
    CHECK(max_abs(diff - dft_nodes(x)) < 1e-12);

    const FourierGnnModel nosum = make_ablation_variant(lin, Ablation::NoSummation, 1);
    const Spectrum last = fgo_forward(x, nosum.fgo, Activation::identity(), false);
    Spectrum chain = dft_nodes(x);
    for (Index k = 0; k < c.layers; ++k) chain = chain * lin.fgo.step(k).weight;
    CHECK(max_abs(last - chain) < 1e-12);

    FourierGnnModel shared = make_ablation_variant(full, Ablation::NoDynamicFgo, 1);
    REQUIRE(shared.fgo.blocks.size() == 1);
    for (Index k = 0; k < c.layers; ++k) CHECK(&shared.fgo.step(k) == &shared.fgo.blocks[0]);
    const auto batch = random_batch(c, 2, 11);
    RmspropState st = RmspropState::zeros_like(shared);
    LossAndGradients lg = backward(shared, std::span<const MtsWindow>(batch));
    rmsprop_step(shared, lg.grads, st, 1e-2, 0.9, 1e-8);
    CHECK(shared.fgo.step(0) == shared.fgo.step(1));
    CHECK_FALSE(shared.fgo.blocks[0] == full.fgo.blocks[0]);

    const FourierGnnModel noemb = make_ablation_variant(full, Ablation::NoEmbedding, 1);
    CHECK(noemb.config.embed_dim == 1);
    CHECK(model_forward(noemb, batch[0]).rows() == c.n_vars);
}

namespace {

std::vector<MtsWindow> sinusoid_windows(Index length, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.n_vars = 3;
    spec.length = length;
    spec.seed = seed;
    SeriesTable t = make_coupled_sinusoids(spec);
    t = minmax_apply(t, minmax_fit(t));
    return sliding_windows(t, 4, 2, 3);
}

} // namespace

TEST_CASE("fit") {
    const ModelConfig c = tiny(4, 2);
    const auto windows = sinusoid_windows(200, 3);
    const std::span<const MtsWindow> train(windows.data(), 40);
    const std::span<const MtsWindow> val(windows.data() + 40, windows.size() - 40);
    const FourierGnnModel init = init_model(c, 1);

    TrainConfig tc;
    tc.epochs = 3;
    tc.batch_size = 8;
    tc.learning_rate = 0.0;
    FitResult frozen = fit(init, train, val, tc);
    CHECK(frozen.final_model == init);
    CHECK(frozen.trace.size() == 3);

    tc.learning_rate = 1e-3;
    tc.epochs = 15;
    const FitResult a = fit(init, train, val, tc);
    const FitResult b = fit(init, train, val, tc);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        CHECK(a.trace[i].train_mse == b.trace[i].train_mse);
        CHECK(a.trace[i].val_mse == b.trace[i].val_mse);
    }
    CHECK(a.trace.back().train_mse < a.initial_train_mse);
    CHECK(a.best_val_mse <= a.initial_val_mse);
    CHECK(dataset_mse(a.best_model, val) == doctest::Approx(a.best_val_mse));

    tc.patience = 1;
    tc.epochs = 200;
    tc.learning_rate = 0.5; // wild steps so validation stops improving quickly
    const FitResult early = fit(init, train, val, tc);
    CHECK(early.trace.size() < 200);
}

TEST_CASE("train config validation") {
    TrainConfig tc;
    tc.batch_size = 0;
    CHECK_THROWS_AS(tc.validate(), ConfigError);
    tc = {};
    tc.rmsprop_decay = 1.0;
    CHECK_THROWS_AS(tc.validate(), ConfigError);
    tc = {};
    tc.learning_rate = -1.0;
    CHECK_THROWS_AS(tc.validate(), ConfigError);
}
