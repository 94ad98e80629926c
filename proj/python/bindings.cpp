#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <iostream>

#include "fouriergnn/checkpoint.hpp"
#include "fouriergnn/cli.hpp"
#include "fouriergnn/data.hpp"
#include "fouriergnn/error.hpp"
#include "fouriergnn/evaluation.hpp"
#include "fouriergnn/oracle.hpp"
#include "fouriergnn/training.hpp"

namespace py = pybind11;
using namespace fgnn;

namespace {

using WindowPair = std::pair<RealMatrix, RealMatrix>;

std::vector<MtsWindow> to_windows(const std::vector<WindowPair>& pairs) {
    std::vector<MtsWindow> out;
    out.reserve(pairs.size());
    Index i = 0;
    for (const auto& [input, target] : pairs) out.push_back({input, target, i++});
    return out;
}

NodeAxis axis_for(const std::string& mode, Index n_vars, Index n_steps) {
    return dft_mode_from_string(mode) == DftMode::Planar2d ? NodeAxis::planar(n_vars, n_steps) : NodeAxis::flat();
}

py::dict report_dict(const oracle::Report& r) {
    py::dict d;
    d["n"] = r.n;
    d["d"] = r.d;
    d["K"] = r.k;
    d["seed"] = r.seed;
    d["max_abs_error"] = r.max_abs_error;
    d["pass"] = r.pass;
    return d;
}

py::dict metrics_dict(const MetricReport& m) {
    py::dict d;
    d["mae"] = m.mae;
    d["rmse"] = m.rmse;
    d["mape_percent"] = m.mape_percent;
    d["n_terms"] = m.n_terms;
    d["n_masked_mape_terms"] = m.n_masked_mape_terms;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "FourierGNN forecaster core";

    static py::exception<Error> base(m, "FgnnError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
    py::register_exception<DataError>(m, "DataError", base.ptr());
    py::register_exception<NumericError>(m, "NumericError", base.ptr());

    m.def(
        "dft",
        [](const ComplexMatrix& x, const std::string& mode, Index n_vars, Index n_steps) {
            return dft_nodes(x, axis_for(mode, n_vars, n_steps));
        },
        py::arg("x"), py::arg("mode") = "flat_1d", py::arg("n_vars") = 0, py::arg("n_steps") = 0,
        "Unnormalized DFT along axis 0 of an (n, d) array.");
    m.def(
        "idft",
        [](const ComplexMatrix& x, const std::string& mode, Index n_vars, Index n_steps) {
            return idft_nodes(x, axis_for(mode, n_vars, n_steps));
        },
        py::arg("x"), py::arg("mode") = "flat_1d", py::arg("n_vars") = 0, py::arg("n_steps") = 0,
        "Inverse DFT along axis 0, scaled by 1/n.");

    py::class_<ModelConfig>(m, "ModelConfig")
        .def(py::init<>())
        .def_readwrite("n_vars", &ModelConfig::n_vars)
        .def_readwrite("T", &ModelConfig::n_steps)
        .def_readwrite("tau", &ModelConfig::horizon)
        .def_readwrite("d", &ModelConfig::embed_dim)
        .def_readwrite("K", &ModelConfig::layers)
        .def_readwrite("l", &ModelConfig::reduced_steps)
        .def_readwrite("d_ffn1", &ModelConfig::ffn1)
        .def_readwrite("d_ffn2", &ModelConfig::ffn2)
        .def_readwrite("recursive_activation", &ModelConfig::recursive_activation)
        .def_readwrite("leaky_slope", &ModelConfig::leaky_slope)
        .def_property(
            "dft_mode", [](const ModelConfig& c) { return std::string(to_string(c.dft_mode)); },
            [](ModelConfig& c, const std::string& s) { c.dft_mode = dft_mode_from_string(s); })
        .def_property(
            "ablation", [](const ModelConfig& c) { return std::string(to_string(c.ablation)); },
            [](ModelConfig& c, const std::string& s) { c.ablation = ablation_from_string(s); })
        .def("validate", &ModelConfig::validate)
        .def("parameter_count", [](const ModelConfig& c) { return parameter_count(c); })
        .def("to_json", [](const ModelConfig& c) { return model_config_to_json(c).dump(); })
        .def("__repr__", [](const ModelConfig& c) { return "ModelConfig(" + model_config_to_json(c).dump() + ")"; });

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("rmsprop_decay", &TrainConfig::rmsprop_decay)
        .def_readwrite("rmsprop_eps", &TrainConfig::rmsprop_eps)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("patience", &TrainConfig::patience)
        .def_property(
            "ablation", [](const TrainConfig& c) { return std::string(to_string(c.ablation)); },
            [](TrainConfig& c, const std::string& s) { c.ablation = ablation_from_string(s); });

    py::class_<FourierGnnModel>(m, "Model")
        .def(py::init([](const ModelConfig& c, std::uint64_t seed) { return init_model(c, seed); }), py::arg("config"),
             py::arg("seed") = 0)
        .def_property_readonly("config", [](const FourierGnnModel& mod) { return mod.config; })
        .def_property_readonly("parameter_count", [](const FourierGnnModel& mod) { return parameter_count(mod); })
        .def(
            "forward",
            [](const FourierGnnModel& mod, const RealMatrix& input) {
                return model_forward(mod, {input, RealMatrix(), 0});
            },
            py::arg("input"), "Forecast (N, tau) from an (N, T) window.")
        .def(
            "node_representation",
            [](const FourierGnnModel& mod, const RealMatrix& input) {
                return node_representation(mod, {input, RealMatrix(), 0});
            },
            py::arg("input"))
        .def(
            "adjacency",
            [](const FourierGnnModel& mod, const RealMatrix& input, Index max_nodes) {
                return export_adjacency(node_representation(mod, {input, RealMatrix(), 0}), max_nodes);
            },
            py::arg("input"), py::arg("max_nodes") = kDefaultAdjacencyNodeCap)
        .def("ablate", [](const FourierGnnModel& mod, const std::string& kind,
                          std::uint64_t seed) { return make_ablation_variant(mod, ablation_from_string(kind), seed); },
             py::arg("kind"), py::arg("seed") = 0)
        .def(
            "parameters",
            [](FourierGnnModel& mod) {
                py::dict d;
                for (const auto& v : parameter_views(mod)) {
                    std::vector<double> flat(static_cast<std::size_t>(v.size));
                    for (Index i = 0; i < v.size; ++i) flat[static_cast<std::size_t>(i)] = v[i];
                    d[py::str(v.name)] = flat;
                }
                return d;
            },
            "Copies of every trainable tensor, flattened, keyed by name.")
        .def("save", [](const FourierGnnModel& mod, const std::filesystem::path& p) { save_checkpoint(p, mod); })
        .def_static("load", [](const std::filesystem::path& p) { return load_checkpoint(p).model; })
        .def("__eq__", [](const FourierGnnModel& a, const FourierGnnModel& b) { return a == b; });

    py::class_<FitResult>(m, "FitResult")
        .def_readonly("best_model", &FitResult::best_model)
        .def_readonly("final_model", &FitResult::final_model)
        .def_readonly("best_epoch", &FitResult::best_epoch)
        .def_readonly("best_val_mse", &FitResult::best_val_mse)
        .def_readonly("initial_train_mse", &FitResult::initial_train_mse)
        .def_readonly("initial_val_mse", &FitResult::initial_val_mse)
        .def_property_readonly("trace", [](const FitResult& r) {
            py::list out;
            for (const auto& e : r.trace) out.append(py::make_tuple(e.epoch, e.train_mse, e.val_mse));
            return out;
        });

    m.def(
        "fit",
        [](const FourierGnnModel& model, const std::vector<WindowPair>& train, const std::vector<WindowPair>& val,
           const TrainConfig& cfg) {
            const auto tw = to_windows(train);
            const auto vw = to_windows(val);
            py::gil_scoped_release release;
            return fit(model, tw, vw, cfg);
        },
        py::arg("model"), py::arg("train"), py::arg("val"), py::arg("config"),
        "Train on lists of (input (N,T), target (N,tau)) pairs.");
    m.def(
        "mse",
        [](const FourierGnnModel& model, const std::vector<WindowPair>& windows) {
            return dataset_mse(model, to_windows(windows));
        },
        py::arg("model"), py::arg("windows"));

    m.def(
        "sliding_windows",
        [](const RealMatrix& values, Index t, Index tau, Index stride) {
            SeriesTable table;
            table.values = values;
            std::vector<WindowPair> out;
            for (auto& w : sliding_windows(table, t, tau, stride)) out.emplace_back(std::move(w.input), std::move(w.target));
            return out;
        },
        py::arg("values"), py::arg("T"), py::arg("tau"), py::arg("stride") = 1,
        "Windows over an (L, N) array as (input (N,T), target (N,tau)) pairs.");
    m.def(
        "synthetic",
        [](Index n_vars, Index length, double noise, double coupling, std::uint64_t seed) {
            return make_coupled_sinusoids({n_vars, length, noise, coupling, seed}).values;
        },
        py::arg("n_vars") = 8, py::arg("length") = 2000, py::arg("noise") = 0.1, py::arg("coupling") = 0.3,
        py::arg("seed") = 7, "Coupled noisy sinusoids, shape (length, n_vars).");
    m.def(
        "load_csv",
        [](const std::filesystem::path& p, bool transpose, bool timestamp_column) {
            CsvOptions o;
            o.transpose = transpose;
            o.timestamp_column = timestamp_column;
            return load_series(p, o).values;
        },
        py::arg("path"), py::arg("transpose") = false, py::arg("timestamp_column") = false);

    m.def(
        "metrics", [](const RealMatrix& pred, const RealMatrix& truth) { return metrics_dict(compute_metrics(pred, truth)); },
        py::arg("pred"), py::arg("truth"));

    m.def(
        "verify_multi_order_equivalence",
        [](Index n, Index d, Index k, std::uint64_t seed) {
            return report_dict(oracle::verify_multi_order_equivalence(n, d, k, seed));
        },
        py::arg("n"), py::arg("d"), py::arg("K"), py::arg("seed") = 0);
    m.def(
        "verify_convolution_theorem",
        [](Index n, std::uint64_t seed) { return report_dict(oracle::verify_convolution_theorem(n, seed)); },
        py::arg("n"), py::arg("seed") = 0);

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::vector<const char*> argv{"fouriergnn"};
            for (const auto& a : args) argv.push_back(a.c_str());
            return run_cli(static_cast<int>(argv.size()), argv.data(), std::cout, std::cerr);
        },
        py::arg("args"), "Runs the command-line front end; returns its exit code.");
}
