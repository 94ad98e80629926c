#pragma once

// Run configuration: one JSON file with dataset / model / training / output
// sections. Command-line flags are overrides of these keys.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fouriergnn/data.hpp"
#include "fouriergnn/model.hpp"
#include "fouriergnn/training.hpp"

namespace fgnn {

struct DatasetSection {
    std::filesystem::path path;
    std::filesystem::path manifest;
    std::string name; // entry in `manifest`
    std::optional<SyntheticSpec> synthetic;
    CsvOptions csv;
    SplitSpec split;
    Index stride = 1;

    bool has_source() const { return !path.empty() || !manifest.empty() || synthetic.has_value(); }
};

struct OutputSection {
    std::filesystem::path directory = "fgnn-out";
    std::string checkpoint_name = "model";
};

struct EvaluationSection {
    bool denormalize = false;
};

struct VerifySection {
    std::vector<Index> n_values{4, 8, 16};
    std::vector<Index> d_values{1, 2, 4};
    Index k_max = 3;
    Index seeds = 10;
    Index convolution_pairs = 100;
};

struct BenchSection {
    Index d = 32;
    Index k = 3;
    std::vector<Index> spectral_sizes{512, 1024, 2048, 4096, 8192};
    std::vector<Index> dense_sizes{256, 512, 1024, 2048};
    Index repeats = 3;
};

struct ExportSection {
    Index window_index = 0;
    Index max_nodes = kDefaultAdjacencyNodeCap;
};

struct RunConfig {
    std::string preset;
    DatasetSection dataset;
    ModelConfig model; // n_vars is filled in from the data
    bool l_explicit = false;
    TrainConfig training;
    OutputSection output;
    EvaluationSection evaluation;
    VerifySection verify;
    BenchSection bench;
    ExportSection export_;
};

struct Preset {
    std::string name;
    Index embed_dim;
    Index batch_size;
    std::optional<Index> reduced_steps; // nullopt: no time reduction
    Index ffn1;
    Index ffn2;
    SplitSpec split;
};

/// Per-dataset hyperparameters (embedding size, batch size, FFN widths).
const std::vector<Preset>& presets();
const Preset& find_preset(const std::string& name);

/// "section.key=value"; value is parsed as JSON when possible, else as a string.
struct Override {
    std::string key;
    std::string value;
};

Override parse_override(const std::string& text);

/// Defaults: T = 12, tau = 12, K = 3, learning rate 1e-5. Unknown keys,
/// wrong types and invariant violations raise ConfigError with the key path.
RunConfig parse_config_json(nlohmann::json doc, const std::vector<Override>& overrides = {});
RunConfig parse_config(const std::filesystem::path& path, const std::vector<Override>& overrides = {});

/// Resolved configuration, including defaults, as JSON.
nlohmann::json to_json(const RunConfig& config);

} // namespace fgnn
