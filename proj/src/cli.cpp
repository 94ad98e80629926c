#include "fouriergnn/cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "fouriergnn/checkpoint.hpp"
#include "fouriergnn/error.hpp"
#include "fouriergnn/evaluation.hpp"
#include "fouriergnn/oracle.hpp"
#include "fouriergnn/training.hpp"

namespace fgnn {
namespace fs = std::filesystem;

SeriesTable load_dataset(const DatasetSection& ds) {
    if (ds.synthetic) return make_coupled_sinusoids(*ds.synthetic);
    if (!ds.path.empty()) return load_series(ds.path, ds.csv);
    if (!ds.manifest.empty()) {
        const auto manifest = load_manifest(ds.manifest);
        const ManifestEntry& entry = find_dataset(manifest, ds.name);
        CsvOptions csv = entry.csv;
        csv.transpose = csv.transpose || ds.csv.transpose;
        SeriesTable table = load_series(entry.path, csv);
        if (entry.n_vars > 0 && table.width() != entry.n_vars) {
            throw DataError(entry.path.string() + ": manifest says " + std::to_string(entry.n_vars) +
                            " variables, file has " + std::to_string(table.width()));
        }
        return table;
    }
    throw ConfigError("dataset", "set dataset.path, dataset.manifest or dataset.synthetic");
}

PreparedData prepare_data(const SeriesTable& table, const DatasetSection& ds, Index lookback, Index horizon,
                          const MinMaxStats* stats) {
    const SplitTables parts = split_chrono(table, ds.split, lookback + horizon);
    PreparedData out;
    out.n_vars = table.width();
    out.stats = stats != nullptr ? *stats : minmax_fit(parts.train);
    auto windows = [&](const SeriesTable& t, double ratio) {
        if (ratio <= 0.0) return std::vector<MtsWindow>{};
        return sliding_windows(minmax_apply(t, out.stats), lookback, horizon, ds.stride);
    };
    out.train = windows(parts.train, ds.split.train);
    out.val = windows(parts.val, ds.split.val);
    out.test = windows(parts.test, ds.split.test);
    return out;
}

void OutputLayout::create() const {
    for (const auto& dir : {checkpoints(), traces(), reports(), adjacency()}) fs::create_directories(dir);
}

namespace {

struct Options {
    fs::path config_path;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output;
    bool denormalize = false;
    bool transpose = false;
    fs::path checkpoint;
    fs::path window;
    fs::path out;
};

class VerificationFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

RunConfig resolve(const Options& o) {
    std::vector<Override> overrides;
    for (const auto& s : o.sets) overrides.push_back(parse_override(s));
    if (o.seed) overrides.push_back({"training.seed", std::to_string(*o.seed)});
    if (o.output) overrides.push_back({"output.directory", nlohmann::json(*o.output).dump()});
    if (o.denormalize) overrides.push_back({"evaluation.denormalize", "true"});
    if (o.transpose) overrides.push_back({"dataset.transpose", "true"});
    if (o.config_path.empty()) return parse_config_json(nlohmann::json::object(), overrides);
    return parse_config(o.config_path, overrides);
}

fs::path checkpoint_path(const RunConfig& cfg, const Options& o) {
    if (!o.checkpoint.empty()) return o.checkpoint;
    return OutputLayout{cfg.output.directory}.checkpoints() / (cfg.output.checkpoint_name + ".fgnn");
}

void print_metrics(std::ostream& out, const std::string& label, const MetricReport& m) {
    out << std::left << std::setw(16) << label << std::right << std::fixed << std::setprecision(6)
        << " MAE " << m.mae << "  RMSE " << m.rmse << "  MAPE " << std::setprecision(3) << m.mape_percent << "%\n";
    out.unsetf(std::ios::floatfield);
}

// Model config completed with the variable count from the data.
ModelConfig model_for(const RunConfig& cfg, Index n_vars) {
    ModelConfig m = cfg.model;
    m.n_vars = n_vars;
    m.validate();
    return m;
}

void require_windows(const PreparedData& data) {
    if (data.train.empty()) throw DataError("training split yields no windows");
    if (data.test.empty()) throw DataError("test split yields no windows");
}

int cmd_train(const RunConfig& cfg, std::ostream& out) {
    const OutputLayout layout{cfg.output.directory};
    layout.create();
    const PreparedData data = prepare_data(load_dataset(cfg.dataset), cfg.dataset, cfg.model.n_steps,
                                           cfg.model.horizon);
    require_windows(data);
    const FourierGnnModel init = init_model(model_for(cfg, data.n_vars), cfg.training.seed);
    out << "windows: train " << data.train.size() << ", val " << data.val.size() << ", test " << data.test.size()
        << "; parameters " << parameter_count(init) << "\n";

    const auto& val = data.val.empty() ? data.train : data.val;
    const FitResult fit_result = fit(init, data.train, val, cfg.training, [&](const EpochRecord& r) {
        out << "epoch " << r.epoch << " train_mse " << r.train_mse << " val_mse " << r.val_mse << "\n";
    });
    out << "best epoch " << fit_result.best_epoch << " (val_mse " << fit_result.best_val_mse << ")\n";

    const fs::path ckpt = layout.checkpoints() / (cfg.output.checkpoint_name + ".fgnn");
    save_checkpoint(ckpt, fit_result.best_model, &data.stats);
    write_trace_csv(layout.traces() / (cfg.output.checkpoint_name + "_trace.csv"), fit_result.trace);

    const bool denorm = cfg.evaluation.denormalize;
    const MetricReport model_m = evaluate_split(fit_result.best_model, data.test, data.stats, denorm);
    const MetricReport base_m = evaluate_repeat_last(data.test, data.stats, denorm);
    print_metrics(out, "fouriergnn", model_m);
    print_metrics(out, "repeat_last", base_m);
    write_metrics_csv(layout.reports() / (cfg.output.checkpoint_name + "_test_metrics.csv"),
                      {{"fouriergnn", model_m}, {"repeat_last", base_m}});
    out << "checkpoint " << ckpt.string() << "\n";
    return kExitOk;
}

int cmd_evaluate(const RunConfig& cfg, const Options& o, std::ostream& out) {
    const OutputLayout layout{cfg.output.directory};
    layout.create();
    const Checkpoint ckpt = load_checkpoint(checkpoint_path(cfg, o));
    const ModelConfig& m = ckpt.model.config;
    const SeriesTable table = load_dataset(cfg.dataset);
    if (table.width() != m.n_vars) {
        throw ShapeError("dataset has " + std::to_string(table.width()) + " variables, checkpoint expects " +
                         std::to_string(m.n_vars));
    }
    const PreparedData data = prepare_data(table, cfg.dataset, m.n_steps, m.horizon,
                                           ckpt.stats ? &*ckpt.stats : nullptr);
    if (data.test.empty()) throw DataError("test split yields no windows");
    const bool denorm = cfg.evaluation.denormalize;
    const MetricReport model_m = evaluate_split(ckpt.model, data.test, data.stats, denorm);
    const MetricReport base_m = evaluate_repeat_last(data.test, data.stats, denorm);
    print_metrics(out, "fouriergnn", model_m);
    print_metrics(out, "repeat_last", base_m);
    for (std::size_t h = 0; h < model_m.per_horizon.size(); ++h) {
        out << "  step " << h + 1 << " MAE " << model_m.per_horizon[h].mae << " RMSE " << model_m.per_horizon[h].rmse
            << "\n";
    }
    write_metrics_csv(layout.reports() / "evaluate_metrics.csv", {{"fouriergnn", model_m}, {"repeat_last", base_m}});
    return kExitOk;
}

int cmd_predict(const RunConfig& cfg, const Options& o, std::ostream& out) {
    if (o.window.empty()) throw ConfigError("--window", "predict needs a window CSV");
    const Checkpoint ckpt = load_checkpoint(checkpoint_path(cfg, o));
    const ModelConfig& m = ckpt.model.config;
    const SeriesTable raw = load_series(o.window, cfg.dataset.csv);
    if (raw.width() != m.n_vars) {
        throw ShapeError("window has " + std::to_string(raw.width()) + " variables, checkpoint expects " +
                         std::to_string(m.n_vars));
    }
    if (raw.length() < m.n_steps) {
        throw ShapeError("window has " + std::to_string(raw.length()) + " rows, need at least T = " +
                         std::to_string(m.n_steps));
    }
    MtsWindow w;
    w.input = raw.values.bottomRows(m.n_steps).transpose();
    w.target = RealMatrix::Zero(m.n_vars, m.horizon);
    if (ckpt.stats) w.input = minmax_apply_rows(w.input, *ckpt.stats);
    RealMatrix forecast = model_forward(ckpt.model, w);
    if (ckpt.stats) forecast = minmax_invert_rows(forecast, *ckpt.stats);

    fs::path dest = o.out;
    if (dest.empty()) {
        const OutputLayout layout{cfg.output.directory};
        layout.create();
        dest = layout.reports() / "forecast.csv";
    }
    std::vector<std::string> header;
    for (Index h = 1; h <= m.horizon; ++h) header.push_back("t+" + std::to_string(h));
    write_csv(dest, forecast, header);
    out << "forecast (" << forecast.rows() << " x " << forecast.cols() << ") written to " << dest.string() << "\n";
    return kExitOk;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
    const OutputLayout layout{cfg.output.directory};
    layout.create();
    std::ofstream csv(layout.reports() / "verify.csv");
    csv << "check,n,d,K,seed,max_abs_error,pass\n";
    Index failures = 0, rows = 0;
    auto record = [&](const char* check, const oracle::Report& r) {
        ++rows;
        if (!r.pass) ++failures;
        out << std::left << std::setw(12) << check << std::right << " n=" << std::setw(3) << r.n
            << " d=" << std::setw(2) << r.d << " K=" << r.k << " seed=" << std::setw(3) << r.seed
            << " err=" << std::scientific << std::setprecision(2) << r.max_abs_error << std::defaultfloat << "  "
            << (r.pass ? "PASS" : "FAIL") << "\n";
        csv << check << ',' << r.n << ',' << r.d << ',' << r.k << ',' << r.seed << ',' << std::setprecision(17)
            << r.max_abs_error << ',' << (r.pass ? 1 : 0) << '\n';
    };
    const auto start = std::chrono::steady_clock::now();
    for (Index n : cfg.verify.n_values) {
        for (Index d : cfg.verify.d_values) {
            for (Index k = 0; k <= cfg.verify.k_max; ++k) {
                for (Index s = 0; s < cfg.verify.seeds; ++s) {
                    const auto seed = static_cast<std::uint64_t>(s);
                    record("multi_order", oracle::verify_multi_order_equivalence(n, d, k, seed));
                    if (k >= 1) record("n_invariant", oracle::verify_n_invariant(n, d, k, seed));
                }
            }
        }
    }
    for (Index p = 0; p < cfg.verify.convolution_pairs; ++p) {
        const Index n = 1 + p % oracle::kDefaultNodeCap;
        record("convolution", oracle::verify_convolution_theorem(n, static_cast<std::uint64_t>(p)));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out << rows - failures << "/" << rows << " checks passed in " << std::fixed << std::setprecision(2) << secs
        << " s\n" << std::defaultfloat;
    if (failures > 0) throw VerificationFailed(std::to_string(failures) + " verification checks failed");
    return kExitOk;
}

int cmd_bench(const RunConfig& cfg, std::ostream& out) {
    const OutputLayout layout{cfg.output.directory};
    layout.create();
    const BenchReport r = bench_scaling(cfg.bench.d, cfg.bench.k, cfg.bench.spectral_sizes, cfg.bench.dense_sizes,
                                        cfg.bench.repeats, cfg.training.seed);
    auto table = [&](const char* name, const std::vector<BenchPoint>& pts, double slope) {
        out << name << " (d=" << r.d << ", K=" << r.k << ")\n";
        for (const auto& p : pts) {
            out << "  n=" << std::setw(5) << p.n << "  " << std::scientific << std::setprecision(3) << p.mean_seconds
                << " s +- " << p.std_seconds << " (min " << p.min_seconds << ")" << std::defaultfloat << "\n";
        }
        out << "  log-log slope " << std::fixed << std::setprecision(3) << slope << std::defaultfloat << "\n";
    };
    table("spectral", r.spectral, r.spectral_slope);
    table("dense", r.dense, r.dense_slope);
    write_bench_csv(layout.reports() / "bench.csv", r);
    return kExitOk;
}

int cmd_ablate(const RunConfig& cfg, std::ostream& out) {
    const OutputLayout layout{cfg.output.directory};
    layout.create();
    const PreparedData data = prepare_data(load_dataset(cfg.dataset), cfg.dataset, cfg.model.n_steps,
                                           cfg.model.horizon);
    require_windows(data);
    const auto& val = data.val.empty() ? data.train : data.val;
    const FourierGnnModel init = init_model(model_for(cfg, data.n_vars), cfg.training.seed);

    std::vector<std::pair<std::string, MetricReport>> rows;
    for (Ablation kind : {Ablation::Full, Ablation::NoEmbedding, Ablation::NoDynamicFgo, Ablation::NoResidual,
                          Ablation::NoSummation}) {
        TrainConfig tc = cfg.training;
        tc.ablation = kind;
        const std::string name(to_string(kind));
        out << "training " << name << "\n";
        const FitResult r = fit(init, data.train, val, tc);
        out << "  best epoch " << r.best_epoch << " val_mse " << r.best_val_mse << "\n";
        const MetricReport m = evaluate_split(r.best_model, data.test, data.stats, cfg.evaluation.denormalize);
        print_metrics(out, name, m);
        rows.emplace_back(name, m);
        write_trace_csv(layout.traces() / ("ablation_" + name + "_trace.csv"), r.trace);
        save_checkpoint(layout.checkpoints() / ("ablation_" + name + ".fgnn"), r.best_model, &data.stats);
    }
    write_metrics_csv(layout.reports() / "ablation.csv", rows);
    return kExitOk;
}

int cmd_export(const RunConfig& cfg, const Options& o, std::ostream& out) {
    const OutputLayout layout{cfg.output.directory};
    layout.create();
    const Checkpoint ckpt = load_checkpoint(checkpoint_path(cfg, o));
    const ModelConfig& m = ckpt.model.config;
    const SeriesTable table = load_dataset(cfg.dataset);
    const PreparedData data = prepare_data(table, cfg.dataset, m.n_steps, m.horizon,
                                           ckpt.stats ? &*ckpt.stats : nullptr);
    const auto idx = static_cast<std::size_t>(cfg.export_.window_index);
    if (idx >= data.test.size()) {
        throw ConfigError("export.window_index", "test split has only " + std::to_string(data.test.size()) +
                                                     " windows");
    }
    const RealNodeFeatures y = node_representation(ckpt.model, data.test[idx]);
    const RealMatrix adj = export_adjacency(y, cfg.export_.max_nodes);
    const RealMatrix vars = marginalize_time_adjacency(adj, m.n_vars, m.n_steps);
    const std::string stem = "window_" + std::to_string(idx);
    write_csv(layout.adjacency() / (stem + "_nodes.csv"), adj);
    write_csv(layout.adjacency() / (stem + "_variables.csv"), vars);
    out << "adjacency " << adj.rows() << " x " << adj.cols() << " and variable marginal " << vars.rows() << " x "
        << vars.cols() << " written to " << layout.adjacency().string() << "\n";
    return kExitOk;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"FourierGNN multivariate forecaster", "fouriergnn"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
        sub->add_option("--set", o.sets, "override a config key, e.g. --set model.K=2")->take_all();
        sub->add_option("--seed", o.seed, "training.seed: initialization and shuffling seed");
        sub->add_option("--output", o.output, "output.directory: root for checkpoints/ traces/ reports/ adjacency/");
        sub->add_flag("--denormalize", o.denormalize, "evaluation.denormalize: report metrics in data units");
        sub->add_flag("--transpose", o.transpose, "dataset.transpose: CSV rows are variables");
    };
    auto with_checkpoint = [&](CLI::App* sub) {
        sub->add_option("--checkpoint", o.checkpoint, "checkpoint file (default <output>/checkpoints/<name>.fgnn)");
    };

    auto* train = app.add_subcommand("train", "train on the configured dataset and save the best checkpoint");
    auto* evaluate = app.add_subcommand("evaluate", "test-split metrics of a checkpoint");
    auto* predict = app.add_subcommand("predict", "forecast tau steps after a window CSV");
    auto* verify = app.add_subcommand("verify", "spectral/time-domain equivalence checks");
    auto* bench = app.add_subcommand("bench", "spectral vs dense scaling benchmark");
    auto* ablate = app.add_subcommand("ablate", "train the full model and its four ablations");
    auto* exporter = app.add_subcommand("export-adjacency", "adjacency from learned node representations");
    for (auto* sub : {train, evaluate, predict, verify, bench, ablate, exporter}) common(sub);
    for (auto* sub : {evaluate, predict, exporter}) with_checkpoint(sub);
    predict->add_option("--window", o.window, "CSV with at least T rows in dataset layout")->required();
    predict->add_option("--out", o.out, "forecast CSV path (default <output>/reports/forecast.csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    CLI::App* sub = app.get_subcommands().front();
    try {
        const RunConfig cfg = resolve(o);
        err << "resolved configuration:\n" << to_json(cfg).dump(2) << "\n";
        const std::string name = sub->get_name();
        if (name == "train") return cmd_train(cfg, out);
        if (name == "evaluate") return cmd_evaluate(cfg, o, out);
        if (name == "predict") return cmd_predict(cfg, o, out);
        if (name == "verify") return cmd_verify(cfg, out);
        if (name == "bench") return cmd_bench(cfg, out);
        if (name == "ablate") return cmd_ablate(cfg, out);
        return cmd_export(cfg, o, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const VerificationFailed& e) {
        err << "verification failed: " << e.what() << "\n";
        return kExitVerifyFailed;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

} // namespace fgnn
