#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "ctxkit/io.hpp"
#include "test_util.hpp"

using namespace ctxkit;

TEST_CASE("the shipped CHSH fixture loads and validates") {
    Behavior b = io::load_behavior(testutil::fixture("chsh_classical.json"));
    CHECK(validate_behavior(b).ok());
    CHECK(b.scenario.contexts.size() == 4);
    CHECK(b.tables.size() == 4);
}

TEST_CASE("save then load round-trips a random behavior exactly") {
    testutil::Rng rng(201);
    Behavior b = testutil::random_vertex_mixture(testutil::chsh_scenario(), rng);
    // perturb off the dyadic grid so formatting is actually exercised
    auto& w = b.tables["0,0"].weights;
    double eps = 1.0 / 3.0 * 1e-9;
    w[0] += eps;
    w[1] -= eps;
    std::string path = "/tmp/ctxkit_roundtrip.json";
    io::save_behavior(b, path);
    Behavior again = io::load_behavior(path);
    std::remove(path.c_str());
    REQUIRE(again.scenario.observables.size() == b.scenario.observables.size());
    for (const auto& c : b.scenario.contexts) {
        REQUIRE(again.tables.count(c.id) == 1);
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(again.tables[c.id].weights[i] == b.tables[c.id].weights[i]);
    }
}

TEST_CASE("negative weights are schema violations naming the field") {
    io::json j = io::behavior_to_json(io::load_behavior(testutil::fixture("chsh_classical.json")));
    j["tables"]["0,0"][0] = -0.1;
    CHECK_THROWS_WITH_AS(io::behavior_from_json(j, "f"),
                         doctest::Contains("tables.0,0[0]"), io::ParseError);
}

TEST_CASE("missing fields are reported with their path") {
    io::json j;
    j["observables"] = io::json::array();
    CHECK_THROWS_WITH_AS(io::behavior_from_json(j, "f"), doctest::Contains("contexts"),
                         io::ParseError);
}

TEST_CASE("parse errors carry the file position") {
    std::string path = "/tmp/ctxkit_broken.json";
    {
        std::ofstream out(path);
        out << "{\"observables\": [,]}";
    }
    CHECK_THROWS_AS(io::load_behavior(path), io::ParseError);
    std::remove(path.c_str());
}

TEST_CASE("bipartite fixture loads with the right shape") {
    BipartiteBehavior b = io::load_bipartite(testutil::fixture("bipartite_prbox.json"));
    CHECK(b.n_x == 2);
    CHECK(b.tables.size() == 4);
    CHECK(validate_bipartite(b).ok());
}

TEST_CASE("atlas fixtures load and validate") {
    Atlas flat = io::load_atlas(testutil::fixture("atlas_flat.json"));
    CHECK(validate_atlas(flat).ok());
    CHECK(flat.worlds.size() == 3);
    Atlas nonflat = io::load_atlas(testutil::fixture("atlas_nonflat.json"));
    CHECK(validate_atlas(nonflat).ok());
    // atlas round trip
    io::json j = io::atlas_to_json(flat);
    Atlas again = io::atlas_from_json(j, "roundtrip");
    CHECK(again.worlds.size() == flat.worlds.size());
    CHECK(again.transitions.size() == flat.transitions.size());
}

TEST_CASE("intervention model fixture loads with validated ops") {
    InterventionModel m = io::load_model(testutil::fixture("model_questions45.json"));
    REQUIRE(m.ops.count("A") == 1);
    REQUIRE(m.ops.count("B") == 1);
    validate_model(m);

    io::json j = io::load_json_file(testutil::fixture("model_questions45.json"));
    j["context_prior"] = {{"A", 0.25}, {"B", 0.75}};
    InterventionModel with_prior = io::model_from_json(j, "f");
    validate_model(with_prior);
    with_prior.context_prior["A"] = 0.9;
    CHECK_THROWS_AS(validate_model(with_prior), std::invalid_argument);
    j["dimension"] = 3;
    CHECK_THROWS_AS(io::model_from_json(j, "f"), io::ParseError);
}

TEST_CASE("tradeoff config fixture loads") {
    TradeoffConfig cfg = io::load_tradeoff_config(testutil::fixture("tradeoff_small.json"));
    validate_tradeoff_config(cfg);
    CHECK(cfg.memory_levels.size() == 6);
    CHECK(cfg.trials == 20000);
}

TEST_CASE("atomic save replaces the target in one step") {
    std::string path = "/tmp/ctxkit_atomic.json";
    io::save_text_atomic(path, "{\"a\": 1}\n");
    io::save_text_atomic(path, "{\"a\": 2}\n");
    io::json j = io::load_json_file(path);
    CHECK(j["a"] == 2);
    std::remove(path.c_str());
}
