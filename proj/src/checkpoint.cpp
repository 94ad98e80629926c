#include "fouriergnn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "fouriergnn/error.hpp"

namespace fgnn {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

std::string activation_name(const Activation& a) {
    switch (a.kind) {
    case Activation::Kind::Identity: return "identity";
    case Activation::Kind::SplitRelu: return "split_relu";
    case Activation::Kind::LeakyRelu: return "leaky_relu";
    }
    return "split_relu";
}

template <class T>
void write_raw(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_raw(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw DataError("truncated checkpoint");
    return v;
}

struct StoredTensor {
    std::vector<Index> shape;
    std::vector<double> values;
};

} // namespace

nlohmann::json model_config_to_json(const ModelConfig& c) {
    return {{"n_vars", c.n_vars},
            {"T", c.n_steps},
            {"tau", c.horizon},
            {"d", c.embed_dim},
            {"K", c.layers},
            {"l", c.reduced_steps},
            {"d_ffn1", c.ffn1},
            {"d_ffn2", c.ffn2},
            {"dft_mode", std::string(to_string(c.dft_mode))},
            {"recursive_activation", c.recursive_activation},
            {"activation", activation_name(c.activation)},
            {"activation_slope", c.activation.slope},
            {"leaky_slope", c.leaky_slope},
            {"ablation", std::string(to_string(c.ablation))}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.n_vars = j.at("n_vars").get<Index>();
    c.n_steps = j.at("T").get<Index>();
    c.horizon = j.at("tau").get<Index>();
    c.embed_dim = j.at("d").get<Index>();
    c.layers = j.at("K").get<Index>();
    c.reduced_steps = j.at("l").get<Index>();
    c.ffn1 = j.at("d_ffn1").get<Index>();
    c.ffn2 = j.at("d_ffn2").get<Index>();
    c.dft_mode = dft_mode_from_string(j.at("dft_mode").get<std::string>());
    c.recursive_activation = j.at("recursive_activation").get<bool>();
    const auto act = j.at("activation").get<std::string>();
    if (act == "identity") {
        c.activation = Activation::identity();
    } else if (act == "split_relu") {
        c.activation = Activation::split_relu();
    } else if (act == "leaky_relu") {
        c.activation = Activation::leaky_relu(j.at("activation_slope").get<double>());
    } else {
        throw ConfigError("model.activation", "unknown activation '" + act + "'");
    }
    c.leaky_slope = j.at("leaky_slope").get<double>();
    c.ablation = ablation_from_string(j.at("ablation").get<std::string>());
    c.validate();
    return c;
}

void save_checkpoint(const std::filesystem::path& path, const FourierGnnModel& model, const MinMaxStats* stats) {
    FourierGnnModel copy = model;
    auto views = parameter_views(copy);
    std::optional<MinMaxStats> norm;
    if (stats != nullptr) {
        auto& s = norm.emplace(*stats);
        views.push_back({"norm.min", {s.min.size()}, s.min.data(), s.min.size(), 1});
        views.push_back({"norm.max", {s.max.size()}, s.max.data(), s.max.size(), 1});
    }

    nlohmann::json header;
    header["config"] = model_config_to_json(model.config);
    header["step_block"] = model.fgo.step_block;
    header["residual"] = model.fgo.residual;
    header["summation"] = model.fgo.summation;
    header["tensors"] = nlohmann::json::array();
    Index offset = 0;
    for (const auto& v : views) {
        header["tensors"].push_back({{"name", v.name}, {"shape", v.shape}, {"offset", offset}});
        offset += v.size;
    }
    const std::string text = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write checkpoint " + path.string());
    out.write(kCheckpointMagic, 8);
    write_raw(out, kCheckpointVersion);
    write_raw(out, static_cast<std::uint64_t>(text.size()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& v : views) {
        for (Index i = 0; i < v.size; ++i) write_raw(out, v[i]);
    }
    if (!out) throw Error("failed while writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint " + path.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kCheckpointMagic, 8) != 0) throw DataError(path.string() + " is not a checkpoint");
    const auto version = read_raw<std::uint32_t>(in);
    if (version != kCheckpointVersion) throw DataError("unsupported checkpoint version " + std::to_string(version));
    const auto header_len = read_raw<std::uint64_t>(in);
    std::string text(header_len, '\0');
    in.read(text.data(), static_cast<std::streamsize>(header_len));
    if (!in) throw DataError("truncated checkpoint header");

    nlohmann::json header;
    std::map<std::string, StoredTensor> tensors;
    try {
        header = nlohmann::json::parse(text);
        Index total = 0;
        std::vector<std::pair<std::string, StoredTensor>> order;
        for (const auto& t : header.at("tensors")) {
            StoredTensor st{t.at("shape").get<std::vector<Index>>(), {}};
            Index size = 1;
            for (Index s : st.shape) size *= s;
            if (t.at("offset").get<Index>() != total) throw DataError("checkpoint tensor offsets are not contiguous");
            st.values.resize(static_cast<std::size_t>(size));
            total += size;
            order.emplace_back(t.at("name").get<std::string>(), std::move(st));
        }
        for (auto& [name, st] : order) {
            for (double& v : st.values) v = read_raw<double>(in);
            tensors.emplace(name, std::move(st));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed checkpoint header: " + std::string(e.what()));
    }

    Checkpoint ck;
    ck.model = zero_model(model_config_from_json(header.at("config")));
    if (header.at("step_block").get<std::vector<std::size_t>>() != ck.model.fgo.step_block ||
        header.at("residual").get<bool>() != ck.model.fgo.residual ||
        header.at("summation").get<bool>() != ck.model.fgo.summation) {
        throw DataError("checkpoint FGO layout disagrees with its ablation setting");
    }
    for (auto& v : parameter_views(ck.model)) {
        auto it = tensors.find(v.name);
        if (it == tensors.end()) throw DataError("checkpoint is missing tensor " + v.name);
        if (it->second.shape != v.shape) throw DataError("checkpoint tensor " + v.name + " has the wrong shape");
        for (Index i = 0; i < v.size; ++i) v[i] = it->second.values[static_cast<std::size_t>(i)];
        tensors.erase(it);
    }
    auto min_it = tensors.find("norm.min");
    auto max_it = tensors.find("norm.max");
    if (min_it != tensors.end() && max_it != tensors.end()) {
        const auto& mn = min_it->second.values;
        const auto& mx = max_it->second.values;
        ck.stats = MinMaxStats{Eigen::Map<const RealVector>(mn.data(), static_cast<Index>(mn.size())),
                               Eigen::Map<const RealVector>(mx.data(), static_cast<Index>(mx.size()))};
        tensors.erase("norm.min");
        tensors.erase("norm.max");
    }
    if (!tensors.empty()) throw DataError("checkpoint has unexpected tensor " + tensors.begin()->first);
    return ck;
}

} // namespace fgnn
