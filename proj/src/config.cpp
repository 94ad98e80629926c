#include "fouriergnn/config.hpp"

#include <fstream>
#include <set>

#include "fouriergnn/checkpoint.hpp"
#include "fouriergnn/error.hpp"
#include "fouriergnn/oracle.hpp"

namespace fgnn {
namespace {

using nlohmann::json;

// Reads keys from one JSON object and rejects whatever is left over.
class Section {
public:
    Section(const json& doc, std::string path) : path_(std::move(path)) {
        if (doc.is_null()) return;
        if (!doc.is_object()) throw ConfigError(path_, "must be an object");
        doc_ = &doc;
    }

    bool has(const char* key) const { return doc_ != nullptr && doc_->contains(key); }

    const json& raw(const char* key) {
        seen_.insert(key);
        return doc_->at(key);
    }

    template <class T>
    void get(const char* key, T& out) {
        if (!has(key)) return;
        try {
            out = raw(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(full(key), "has the wrong type: " + doc_->at(key).dump());
        }
    }

    Section child(const char* key) {
        static const json null_doc;
        if (!has(key)) return Section(null_doc, full(key));
        return Section(raw(key), full(key));
    }

    std::string full(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        if (doc_ == nullptr) return;
        for (const auto& [key, value] : doc_->items()) {
            if (!seen_.contains(key)) throw ConfigError(full(key.c_str()), "unknown key");
        }
    }

private:
    const json* doc_ = nullptr;
    std::string path_;
    std::set<std::string> seen_;
};

void set_path(json& doc, const std::string& dotted, json value) {
    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = dotted.find('.', start);
        const std::string part = dotted.substr(start, dot == std::string::npos ? dot : dot - start);
        if (part.empty()) throw ConfigError(dotted, "malformed override key");
        if (dot == std::string::npos) {
            (*node)[part] = std::move(value);
            return;
        }
        if (!node->contains(part)) (*node)[part] = json::object();
        node = &(*node)[part];
        if (!node->is_object()) throw ConfigError(dotted, "override walks into a non-object");
        start = dot + 1;
    }
}

void require_positive(Index v, const std::string& key) {
    if (v < 1) throw ConfigError(key, "must be >= 1, got " + std::to_string(v));
}

SplitSpec parse_split(Section& s, const char* key, SplitSpec fallback) {
    if (!s.has(key)) return fallback;
    const json& j = s.raw(key);
    try {
        SplitSpec out;
        if (j.is_array() && j.size() == 3) {
            out = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
        } else if (j.is_object()) {
            Section sub(j, s.full(key));
            sub.get("train", out.train);
            sub.get("val", out.val);
            sub.get("test", out.test);
            sub.finish();
        } else {
            throw ConfigError(s.full(key), "expected [train, val, test]");
        }
        out.validate();
        return out;
    } catch (const json::exception&) {
        throw ConfigError(s.full(key), "expected three numbers");
    }
}

} // namespace

const std::vector<Preset>& presets() {
    static const std::vector<Preset> table = {
        {"covid19", 256, 4, 8, 256, 512, {0.6, 0.2, 0.2}},
        {"solar", 128, 2, 6, 64, 256, {}},
        {"wiki", 128, 2, 2, 64, 256, {}},
        {"traffic", 128, 2, 2, 64, 256, {}},
        {"ecg", 128, 32, std::nullopt, 64, 256, {}},
        {"electricity", 128, 32, 4, 64, 256, {}},
        {"metr-la", 128, 32, 4, 64, 256, {}},
    };
    return table;
}

const Preset& find_preset(const std::string& name) {
    for (const auto& p : presets()) {
        if (p.name == name) return p;
    }
    throw ConfigError("preset", "unknown preset '" + name + "'");
}

Override parse_override(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(text, "override must look like section.key=value");
    return {text.substr(0, eq), text.substr(eq + 1)};
}

RunConfig parse_config_json(json doc, const std::vector<Override>& overrides) {
    if (doc.is_null()) doc = json::object();
    if (!doc.is_object()) throw ConfigError("", "configuration must be a JSON object");
    for (const auto& o : overrides) {
        json value = json::parse(o.value, nullptr, false);
        if (value.is_discarded()) value = o.value;
        set_path(doc, o.key, std::move(value));
    }

    RunConfig cfg;
    Section root(doc, "");
    root.get("preset", cfg.preset);
    std::optional<Index> reduced;
    if (!cfg.preset.empty()) {
        const Preset& p = find_preset(cfg.preset);
        cfg.model.embed_dim = p.embed_dim;
        cfg.training.batch_size = p.batch_size;
        reduced = p.reduced_steps;
        cfg.model.ffn1 = p.ffn1;
        cfg.model.ffn2 = p.ffn2;
        cfg.dataset.split = p.split;
    }

    {
        Section s = root.child("dataset");
        std::string path, manifest;
        s.get("path", path);
        s.get("manifest", manifest);
        cfg.dataset.path = path;
        cfg.dataset.manifest = manifest;
        s.get("name", cfg.dataset.name);
        s.get("transpose", cfg.dataset.csv.transpose);
        s.get("timestamp_column", cfg.dataset.csv.timestamp_column);
        cfg.dataset.split = parse_split(s, "split", cfg.dataset.split);
        s.get("stride", cfg.dataset.stride);
        require_positive(cfg.dataset.stride, "dataset.stride");
        if (s.has("synthetic")) {
            Section syn = s.child("synthetic");
            SyntheticSpec spec;
            syn.get("n_vars", spec.n_vars);
            syn.get("length", spec.length);
            syn.get("noise", spec.noise);
            syn.get("coupling", spec.coupling);
            syn.get("seed", spec.seed);
            syn.finish();
            require_positive(spec.n_vars, "dataset.synthetic.n_vars");
            require_positive(spec.length, "dataset.synthetic.length");
            if (!(spec.noise >= 0.0)) throw ConfigError("dataset.synthetic.noise", "must be >= 0");
            cfg.dataset.synthetic = spec;
        }
        if (!cfg.dataset.manifest.empty() && cfg.dataset.name.empty()) {
            throw ConfigError("dataset.name", "required when dataset.manifest is set");
        }
        s.finish();
    }
    {
        Section s = root.child("model");
        ModelConfig& m = cfg.model;
        s.get("T", m.n_steps);
        s.get("tau", m.horizon);
        s.get("d", m.embed_dim);
        s.get("K", m.layers);
        if (s.has("l")) {
            const json& l = s.raw("l");
            if (l.is_null() || (l.is_string() && l.get<std::string>() == "*")) {
                reduced.reset();
            } else if (l.is_number_integer()) {
                reduced = l.get<Index>();
            } else {
                throw ConfigError("model.l", "expected an integer, null or \"*\"");
            }
            cfg.l_explicit = true;
        }
        s.get("d_ffn1", m.ffn1);
        s.get("d_ffn2", m.ffn2);
        std::string mode = std::string(to_string(m.dft_mode));
        s.get("dft_mode", mode);
        try {
            m.dft_mode = dft_mode_from_string(mode);
        } catch (const ConfigError& e) {
            throw ConfigError("model.dft_mode", e.what());
        }
        s.get("recursive_activation", m.recursive_activation);
        std::string act = "split_relu";
        double act_slope = 0.01;
        s.get("activation", act);
        s.get("activation_slope", act_slope);
        if (act == "identity") {
            m.activation = Activation::identity();
        } else if (act == "split_relu") {
            m.activation = Activation::split_relu();
        } else if (act == "leaky_relu") {
            if (!(act_slope > 0.0 && act_slope < 1.0)) throw ConfigError("model.activation_slope", "must lie in (0, 1)");
            m.activation = Activation::leaky_relu(act_slope);
        } else {
            throw ConfigError("model.activation", "unknown activation '" + act + "'");
        }
        s.get("leaky_slope", m.leaky_slope);
        s.finish();
        m.reduced_steps = reduced.value_or(m.n_steps);
        m.validate();
    }
    {
        Section s = root.child("training");
        TrainConfig& t = cfg.training;
        s.get("learning_rate", t.learning_rate);
        s.get("epochs", t.epochs);
        s.get("batch_size", t.batch_size);
        s.get("rmsprop_decay", t.rmsprop_decay);
        s.get("rmsprop_eps", t.rmsprop_eps);
        s.get("seed", t.seed);
        s.get("patience", t.patience);
        std::string ablation = "full";
        s.get("ablation", ablation);
        try {
            t.ablation = ablation_from_string(ablation);
        } catch (const ConfigError& e) {
            throw ConfigError("training.ablation", e.what());
        }
        s.finish();
        t.validate();
        cfg.model.ablation = Ablation::Full; // variants are derived from a full model by fit()
    }
    {
        Section s = root.child("output");
        std::string dir = cfg.output.directory.string();
        s.get("directory", dir);
        cfg.output.directory = dir;
        s.get("checkpoint_name", cfg.output.checkpoint_name);
        if (cfg.output.checkpoint_name.empty()) throw ConfigError("output.checkpoint_name", "must not be empty");
        s.finish();
    }
    {
        Section s = root.child("evaluation");
        s.get("denormalize", cfg.evaluation.denormalize);
        s.finish();
    }
    {
        Section s = root.child("verify");
        VerifySection& v = cfg.verify;
        s.get("n_values", v.n_values);
        s.get("d_values", v.d_values);
        s.get("k_max", v.k_max);
        s.get("seeds", v.seeds);
        s.get("convolution_pairs", v.convolution_pairs);
        s.finish();
        for (Index n : v.n_values) {
            if (n < 1 || n > oracle::kDefaultNodeCap) throw ConfigError("verify.n_values", "entries must lie in [1, 64]");
        }
        for (Index d : v.d_values) {
            if (d < 1 || d > 8) throw ConfigError("verify.d_values", "entries must lie in [1, 8]");
        }
        if (v.k_max < 0 || v.k_max > 4) throw ConfigError("verify.k_max", "must lie in [0, 4]");
        require_positive(v.seeds, "verify.seeds");
        if (v.convolution_pairs < 0) throw ConfigError("verify.convolution_pairs", "must be >= 0");
    }
    {
        Section s = root.child("bench");
        BenchSection& b = cfg.bench;
        s.get("d", b.d);
        s.get("K", b.k);
        s.get("spectral_sizes", b.spectral_sizes);
        s.get("dense_sizes", b.dense_sizes);
        s.get("repeats", b.repeats);
        s.finish();
        require_positive(b.d, "bench.d");
        require_positive(b.k, "bench.K");
        if (b.repeats < 3) throw ConfigError("bench.repeats", "must be >= 3");
        for (auto* sizes : {&b.spectral_sizes, &b.dense_sizes}) {
            for (std::size_t i = 0; i < sizes->size(); ++i) {
                if ((*sizes)[i] < 1 || (i > 0 && (*sizes)[i] <= (*sizes)[i - 1])) {
                    throw ConfigError(sizes == &b.dense_sizes ? "bench.dense_sizes" : "bench.spectral_sizes",
                                      "sizes must be positive and strictly increasing");
                }
            }
        }
    }
    {
        Section s = root.child("export");
        s.get("window_index", cfg.export_.window_index);
        s.get("max_nodes", cfg.export_.max_nodes);
        s.finish();
        if (cfg.export_.window_index < 0) throw ConfigError("export.window_index", "must be >= 0");
        require_positive(cfg.export_.max_nodes, "export.max_nodes");
    }
    root.finish();
    return cfg;
}

RunConfig parse_config(const std::filesystem::path& path, const std::vector<Override>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file " + path.string());
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw ConfigError("", path.string() + " is not valid JSON");
    if (doc.is_object() && doc.contains("dataset") && doc["dataset"].is_object()) {
        for (const char* key : {"path", "manifest"}) {
            auto& ds = doc["dataset"];
            if (ds.contains(key) && ds[key].is_string()) {
                std::filesystem::path p = ds[key].get<std::string>();
                if (!p.empty() && p.is_relative()) ds[key] = (path.parent_path() / p).lexically_normal().string();
            }
        }
    }
    return parse_config_json(std::move(doc), overrides);
}

json to_json(const RunConfig& c) {
    json model = model_config_to_json(c.model);
    model.erase("n_vars");
    model.erase("ablation");
    json dataset = {{"path", c.dataset.path.string()},
                    {"manifest", c.dataset.manifest.string()},
                    {"name", c.dataset.name},
                    {"transpose", c.dataset.csv.transpose},
                    {"timestamp_column", c.dataset.csv.timestamp_column},
                    {"split", {c.dataset.split.train, c.dataset.split.val, c.dataset.split.test}},
                    {"stride", c.dataset.stride}};
    if (c.dataset.synthetic) {
        const auto& s = *c.dataset.synthetic;
        dataset["synthetic"] = {{"n_vars", s.n_vars}, {"length", s.length}, {"noise", s.noise},
                                {"coupling", s.coupling}, {"seed", s.seed}};
    }
    return {{"preset", c.preset},
            {"dataset", dataset},
            {"model", model},
            {"training",
             {{"learning_rate", c.training.learning_rate},
              {"epochs", c.training.epochs},
              {"batch_size", c.training.batch_size},
              {"rmsprop_decay", c.training.rmsprop_decay},
              {"rmsprop_eps", c.training.rmsprop_eps},
              {"seed", c.training.seed},
              {"patience", c.training.patience},
              {"ablation", std::string(to_string(c.training.ablation))}}},
            {"output", {{"directory", c.output.directory.string()}, {"checkpoint_name", c.output.checkpoint_name}}},
            {"evaluation", {{"denormalize", c.evaluation.denormalize}}},
            {"verify",
             {{"n_values", c.verify.n_values},
              {"d_values", c.verify.d_values},
              {"k_max", c.verify.k_max},
              {"seeds", c.verify.seeds},
              {"convolution_pairs", c.verify.convolution_pairs}}},
            {"bench",
             {{"d", c.bench.d},
              {"K", c.bench.k},
              {"spectral_sizes", c.bench.spectral_sizes},
              {"dense_sizes", c.bench.dense_sizes},
              {"repeats", c.bench.repeats}}},
            {"export", {{"window_index", c.export_.window_index}, {"max_nodes", c.export_.max_nodes}}}};
}

} // namespace fgnn
