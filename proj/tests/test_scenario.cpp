#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ctxkit/scenario.hpp"
#include "test_util.hpp"

using namespace ctxkit;

TEST_CASE("validate_scenario flags duplicate observable ids") {
    Scenario s;
    s.observables = {{"X", 2}, {"X", 2}};
    s.contexts = {{"c", {"X"}}};
    ValidationReport r = validate_scenario(s);
    REQUIRE_FALSE(r.ok());
    bool found = false;
    for (const auto& v : r.violations)
        if (v.code == "duplicate-observable" && v.location == "observable:X") found = true;
    CHECK(found);
}

TEST_CASE("validate_scenario accepts the CHSH scenario") {
    CHECK(validate_scenario(testutil::chsh_scenario()).ok());
}

TEST_CASE("validate_scenario flags a dangling observable reference") {
    Scenario s;
    s.observables = {{"X", 2}};
    s.contexts = {{"c", {"X", "Y"}}};
    ValidationReport r = validate_scenario(s);
    REQUIRE_FALSE(r.ok());
    bool found = false;
    for (const auto& v : r.violations)
        if (v.code == "unknown-observable" && v.message.find("'Y'") != std::string::npos)
            found = true;
    CHECK(found);
}

TEST_CASE("validate_scenario flags arity below two and empty contexts") {
    Scenario s;
    s.observables = {{"X", 1}};
    s.contexts = {{"c", {}}};
    ValidationReport r = validate_scenario(s);
    CHECK(r.violations.size() >= 2);
}

namespace {

Behavior two_obs_behavior(const std::vector<double>& table) {
    Behavior b;
    b.scenario.observables = {{"X", 2}, {"Y", 2}};
    b.scenario.contexts = {{"c", {"X", "Y"}}};
    b.tables["c"] = {table};
    return b;
}

}  // namespace

TEST_CASE("marginal of the uniform pair table") {
    Behavior b = two_obs_behavior({0.25, 0.25, 0.25, 0.25});
    Distribution m = marginal(b, "c", {"X"});
    REQUIRE(m.weights.size() == 2);
    CHECK(m.weights[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(m.weights[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("marginal over the full set is the identity") {
    Behavior b = two_obs_behavior({0.4, 0.1, 0.2, 0.3});
    Distribution m = marginal(b, "c", {"X", "Y"});
    CHECK(m.weights == b.tables["c"].weights);
}

TEST_CASE("marginal sums pairs: (0.4,0.1,0.2,0.3) over (X,Y) keep X") {
    Behavior b = two_obs_behavior({0.4, 0.1, 0.2, 0.3});
    Distribution m = marginal(b, "c", {"X"});
    // hand sum: X=0 -> 0.4+0.1, X=1 -> 0.2+0.3
    CHECK(m.weights[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(m.weights[1] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("marginal rejects bad inputs") {
    Behavior b = two_obs_behavior({0.25, 0.25, 0.25, 0.25});
    CHECK_THROWS_AS(marginal(b, "nope", {"X"}), std::invalid_argument);
    CHECK_THROWS_AS(marginal(b, "c", {"Z"}), std::invalid_argument);
    CHECK_THROWS_AS(marginal(b, "c", {}), std::invalid_argument);
}

TEST_CASE("marginal is linear in the table") {
    testutil::Rng rng(7);
    Behavior b1 = two_obs_behavior({0.4, 0.1, 0.2, 0.3});
    Behavior b2 = two_obs_behavior({0.1, 0.3, 0.35, 0.25});
    for (int trial = 0; trial < 50; ++trial) {
        double lambda = rng.uniform();
        Behavior mix = b1;
        for (std::size_t i = 0; i < 4; ++i)
            mix.tables["c"].weights[i] = (1 - lambda) * b1.tables["c"].weights[i] +
                                         lambda * b2.tables["c"].weights[i];
        Distribution m_mix = marginal(mix, "c", {"Y"});
        Distribution m1 = marginal(b1, "c", {"Y"});
        Distribution m2 = marginal(b2, "c", {"Y"});
        for (std::size_t i = 0; i < 2; ++i)
            CHECK(std::abs(m_mix.weights[i] -
                           ((1 - lambda) * m1.weights[i] + lambda * m2.weights[i])) <= 1e-12);
    }
}

TEST_CASE("no-disturbance passes for marginals of one joint") {
    testutil::Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        Behavior b = testutil::random_vertex_mixture(testutil::chsh_scenario(), rng);
        DisturbanceReport r = check_no_disturbance(b);
        CHECK(r.max_residual <= 1e-12);
        CHECK(r.pass);
    }
}

TEST_CASE("no-disturbance reports the constructed 0.2 violation") {
    Behavior b;
    b.scenario.observables = {{"X", 2}, {"Y", 2}, {"Z", 2}};
    b.scenario.contexts = {{"c1", {"X", "Y"}}, {"c2", {"X", "Z"}}};
    // P(X=0) = 0.6 in c1, 0.4 in c2.
    b.tables["c1"] = {{0.3, 0.3, 0.2, 0.2}};
    b.tables["c2"] = {{0.2, 0.2, 0.3, 0.3}};
    DisturbanceReport r = check_no_disturbance(b);
    CHECK_FALSE(r.pass);
    CHECK(r.max_residual == doctest::Approx(0.2).epsilon(1e-12));
    REQUIRE(r.entries.size() == 1);
    CHECK(r.entries[0].observable == "X");
}

TEST_CASE("no-disturbance passes for the PR box") {
    DisturbanceReport r = check_no_disturbance(testutil::prbox_behavior());
    CHECK(r.pass);
    CHECK(r.max_residual <= 1e-12);
}

TEST_CASE("distributions stay normalized through marginalization") {
    testutil::Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        Behavior b = testutil::random_vertex_mixture(testutil::chsh_scenario(), rng);
        for (const auto& c : b.scenario.contexts) {
            for (const auto& oid : c.observables) {
                Distribution m = marginal(b, c.id, {oid});
                CHECK(std::abs(m.sum() - 1.0) <= 1e-9);
            }
        }
    }
}

TEST_CASE("outcome indexing is row-major with the last observable fastest") {
    std::vector<int> arities = {2, 3};
    CHECK(outcome_index(arities, {0, 0}) == 0);
    CHECK(outcome_index(arities, {0, 2}) == 2);
    CHECK(outcome_index(arities, {1, 0}) == 3);
    CHECK(outcome_unindex(arities, 5) == std::vector<int>{1, 2});
}
