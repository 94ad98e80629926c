#include <doctest.h>

#include <fstream>

#include "fouriergnn/config.hpp"
#include "fouriergnn/error.hpp"
#include "helpers.hpp"

using namespace fgnn;
using nlohmann::json;

namespace {

std::string key_of(const json& doc, const std::vector<Override>& ov = {}) {
    try {
        parse_config_json(doc, ov);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "<none>";
}

} // namespace

TEST_CASE("defaults") {
    const RunConfig c = parse_config_json(json{{"model", json::object()}});
    CHECK(c.model.n_steps == 12);
    CHECK(c.model.horizon == 12);
    CHECK(c.model.layers == 3);
    CHECK(c.model.reduced_steps == 12);
    CHECK(c.training.learning_rate == 1e-5);
    const json echoed = to_json(c);
    CHECK(echoed["model"]["T"] == 12);
    CHECK(echoed["model"]["tau"] == 12);
    CHECK(echoed["model"]["K"] == 3);
}

TEST_CASE("errors carry the key path") {
    CHECK(key_of(json{{"model", {{"d_ffn1", -1}}}}) == "model.d_ffn1");
    CHECK(key_of(json{{"model", {{"d", "wide"}}}}) == "model.d");
    CHECK(key_of(json{{"model", {{"colour", 1}}}}) == "model.colour");
    CHECK(key_of(json{{"mystery", 1}}) == "mystery");
    CHECK(key_of(json{{"training", {{"learning_rate", -1.0}}}}) == "training.learning_rate");
    CHECK(key_of(json{{"dataset", {{"split", {0.5, 0.5, 0.5}}}}}) == "dataset.split");
    CHECK(key_of(json{{"dataset", {{"synthetic", {{"n_vars", 0}}}}}}) == "dataset.synthetic.n_vars");
    CHECK(key_of(json{{"model", {{"l", 20}}}}) == "model.l");
    CHECK(key_of(json{{"preset", "nope"}}) == "preset");
    CHECK(key_of(json{{"bench", {{"repeats", 2}}}}) == "bench.repeats");
    CHECK(key_of(json{{"training", {{"ablation", "half"}}}}) == "training.ablation");
}

TEST_CASE("presets") {
    const RunConfig c = parse_config_json(json{{"preset", "covid19"}});
    CHECK(c.model.embed_dim == 256);
    CHECK(c.training.batch_size == 4);
    CHECK(c.model.reduced_steps == 8);
    CHECK(c.model.ffn1 == 256);
    CHECK(c.model.ffn2 == 512);
    CHECK(c.dataset.split.train == 0.6);

    const RunConfig e = parse_config_json(json{{"preset", "ecg"}});
    CHECK(e.model.reduced_steps == e.model.n_steps);

    const RunConfig o = parse_config_json(json{{"preset", "covid19"}, {"model", {{"d", 64}}}});
    CHECK(o.model.embed_dim == 64);
    CHECK(o.model.ffn1 == 256);
}

TEST_CASE("overrides") {
    const RunConfig c = parse_config_json(json::object(), {parse_override("model.K=2"),
                                                           parse_override("output.directory=runs/a"),
                                                           parse_override("dataset.synthetic.length=500")});
    CHECK(c.model.layers == 2);
    CHECK(c.output.directory == "runs/a");
    REQUIRE(c.dataset.synthetic.has_value());
    CHECK(c.dataset.synthetic->length == 500);
    CHECK_THROWS_AS(parse_override("novalue"), ConfigError);
    CHECK(key_of(json::object(), {parse_override("model.K=-3")}) == "model.K");
}

TEST_CASE("config file with relative dataset path") {
    const auto dir = testing::scratch_dir("config_file");
    std::ofstream(dir / "run.json") << R"({"dataset": {"path": "data/x.csv"}, "model": {"T": 6, "tau": 3}})";
    const RunConfig c = parse_config(dir / "run.json");
    CHECK(c.dataset.path == (dir / "data/x.csv").lexically_normal());
    CHECK(c.model.reduced_steps == 6);

    std::ofstream(dir / "broken.json") << "{ not json";
    CHECK_THROWS_AS(parse_config(dir / "broken.json"), ConfigError);
    CHECK_THROWS_AS(parse_config(dir / "absent.json"), ConfigError);
}

TEST_CASE("resolved config parses back to itself") {
    const RunConfig c = parse_config_json(json{{"preset", "solar"}, {"training", {{"seed", 9}}}});
    const json echoed = to_json(c);
    const RunConfig again = parse_config_json(echoed);
    CHECK(to_json(again) == echoed);
}
