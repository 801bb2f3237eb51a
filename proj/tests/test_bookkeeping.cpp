#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ctxkit/bookkeeping.hpp"
#include "ctxkit/embedding.hpp"
#include "test_util.hpp"

using namespace ctxkit;

namespace {

std::vector<double> random_dist(testutil::Rng& rng, std::size_t n) {
    std::vector<double> p(n);
    double s = 0.0;
    for (double& w : p) {
        w = rng.uniform() + 1e-3;
        s += w;
    }
    for (double& w : p) w /= s;
    return p;
}

// The context-dependence fixture: one binary observable asked in two
// contexts with opposite deterministic answers.
Behavior store_the_context_behavior() {
    Behavior b;
    b.scenario.observables = {{"X", 2}};
    b.scenario.contexts = {{"c0", {"X"}}, {"c1", {"X"}}};
    b.tables["c0"] = {{1.0, 0.0}};
    b.tables["c1"] = {{0.0, 1.0}};
    return b;
}

}  // namespace

TEST_CASE("entropy basics") {
    CHECK(entropy({1.0, 0.0, 0.0}) == 0.0);
    CHECK(entropy({0.25, 0.25, 0.25, 0.25}) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(entropy({0.5, 0.25, 0.25}) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK_THROWS_AS(entropy({-0.1, 1.1}), std::invalid_argument);
}

TEST_CASE("mutual information basics") {
    CHECK(mutual_information({{0.25, 0.25}, {0.25, 0.25}}) == 0.0);
    CHECK(mutual_information({{0.5, 0.0}, {0.0, 0.5}}) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("mutual information matches a direct double-sum oracle") {
    testutil::Rng rng(61);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> flat = random_dist(rng, 9);
        std::vector<std::vector<double>> joint(3, std::vector<double>(3));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) joint[i][j] = flat[i * 3 + j];
        double direct = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double px = joint[i][0] + joint[i][1] + joint[i][2];
                double py = joint[0][j] + joint[1][j] + joint[2][j];
                direct += joint[i][j] * std::log2(joint[i][j] / (px * py));
            }
        CHECK(std::abs(mutual_information(joint) - direct) <= 1e-12);
        // symmetry under swap
        std::vector<std::vector<double>> swapped(3, std::vector<double>(3));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) swapped[j][i] = joint[i][j];
        CHECK(std::abs(mutual_information(joint) - mutual_information(swapped)) <= 1e-12);
    }
}

TEST_CASE("conditional mutual information") {
    // O independent of C given each lambda.
    std::vector<std::vector<std::vector<double>>> indep(
        2, std::vector<std::vector<double>>(2, std::vector<double>(2, 0.125)));
    CHECK(conditional_mutual_information(indep) <= 1e-12);

    // lambda constant, C = O binary uniform -> 1 bit.
    std::vector<std::vector<std::vector<double>>> copy(
        2, std::vector<std::vector<double>>(2, std::vector<double>(1, 0.0)));
    copy[0][0][0] = 0.5;
    copy[1][1][0] = 0.5;
    CHECK(conditional_mutual_information(copy) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("conditional mutual information matches a direct-sum oracle") {
    testutil::Rng rng(67);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> flat = random_dist(rng, 8);
        std::vector<std::vector<std::vector<double>>> joint(
            2, std::vector<std::vector<double>>(2, std::vector<double>(2)));
        for (int c = 0; c < 2; ++c)
            for (int o = 0; o < 2; ++o)
                for (int l = 0; l < 2; ++l) joint[c][o][l] = flat[c * 4 + o * 2 + l];
        double direct = 0.0;
        for (int l = 0; l < 2; ++l)
            for (int c = 0; c < 2; ++c)
                for (int o = 0; o < 2; ++o) {
                    double pcol = joint[c][o][l];
                    double pl = 0, pc_l = 0, po_l = 0;
                    for (int cc = 0; cc < 2; ++cc)
                        for (int oo = 0; oo < 2; ++oo) pl += joint[cc][oo][l];
                    for (int oo = 0; oo < 2; ++oo) pc_l += joint[c][oo][l];
                    for (int cc = 0; cc < 2; ++cc) po_l += joint[cc][o][l];
                    direct += pcol * std::log2((pcol * pl) / (pc_l * po_l));
                }
        CHECK(std::abs(conditional_mutual_information(joint) - direct) <= 1e-12);
    }
}

TEST_CASE("simulate_behavior: deterministic single-memory sim is embeddable") {
    Scenario s = testutil::chsh_scenario();
    ClassicalSimulation sim;
    sim.ontic_prior = {1.0};
    sim.n_memory = 1;
    sim.memory_policy = {{4, {1.0}}};
    sim.response.assign(1, {});
    sim.response[0].assign(1, {});
    sim.response[0][0].assign(4, std::vector<double>(4, 0.0));
    for (int ci = 0; ci < 4; ++ci) sim.response[0][0][ci][0] = 1.0;  // always (0,0)
    Behavior b = simulate_behavior(sim, s);
    EmbeddingCertificate cert = check_boolean_embedding(b);
    CHECK(cert.status != EmbeddingCertificate::Status::non_embeddable);
}

TEST_CASE("simulate_behavior: memory carries the context, response copies it") {
    Behavior want = store_the_context_behavior();
    ClassicalSimulation sim;
    sim.ontic_prior = {1.0};
    sim.n_memory = 2;
    sim.memory_policy = {{{1.0, 0.0}, {0.0, 1.0}}};  // m = context id
    sim.response.assign(1, {});
    sim.response[0].assign(2, {});
    sim.response[0][0] = {{1.0, 0.0}, {1.0, 0.0}};  // m=0 -> outcome 0
    sim.response[0][1] = {{0.0, 1.0}, {0.0, 1.0}};  // m=1 -> outcome 1
    Behavior got = simulate_behavior(sim, want.scenario);
    for (const auto& c : want.scenario.contexts)
        for (std::size_t i = 0; i < 2; ++i)
            CHECK(got.tables[c.id].weights[i] ==
                  doctest::Approx(want.tables[c.id].weights[i]).epsilon(1e-12));
}

TEST_CASE("simulate_behavior: random simulations produce normalized tables") {
    testutil::Rng rng(71);
    Scenario s;
    s.observables = {{"X", 2}, {"Y", 2}};
    s.contexts = {{"c0", {"X"}}, {"c1", {"X", "Y"}}};
    for (int trial = 0; trial < 20; ++trial) {
        ClassicalSimulation sim;
        sim.ontic_prior = random_dist(rng, 3);
        sim.n_memory = 2;
        sim.memory_policy.assign(3, {});
        sim.response.assign(3, {});
        for (int l = 0; l < 3; ++l) {
            sim.memory_policy[l] = {random_dist(rng, 2), random_dist(rng, 2)};
            sim.response[l].assign(2, {});
            for (int m = 0; m < 2; ++m)
                sim.response[l][m] = {random_dist(rng, 2), random_dist(rng, 4)};
        }
        Behavior b = simulate_behavior(sim, s);
        for (const auto& c : s.contexts)
            CHECK(std::abs(b.tables[c.id].sum() - 1.0) <= 1e-9);
    }
}

TEST_CASE("min_bookkeeping: embeddable behaviors need no memory") {
    // Strictly interior joint: uniform floor plus two aligned vertices.
    std::vector<double> joint(16, 0.5 / 16.0);
    joint[0] += 0.25;
    joint[15] += 0.25;
    Behavior b = testutil::behavior_from_joint(testutil::chsh_scenario(), joint);
    BookkeepingReport rep = min_bookkeeping(b);
    CHECK(rep.reproduces);
    CHECK(rep.i_m_c == 0.0);
    CHECK(rep.h_m == 0.0);
    CHECK_FALSE(rep.search_exhausted);
    REQUIRE(rep.simulation.has_value());
    // certificates are checked, not trusted
    Behavior again = simulate_behavior(*rep.simulation, b.scenario);
    for (const auto& c : b.scenario.contexts)
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(std::abs(again.tables[c.id].weights[i] - b.tables[c.id].weights[i]) <= 1e-9);
}

TEST_CASE("min_bookkeeping: storing the context costs one bit") {
    BookkeepingReport rep = min_bookkeeping(store_the_context_behavior());
    CHECK(rep.reproduces);
    CHECK(rep.i_m_c == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rep.i_m_c <= rep.h_m + 1e-9);
}

TEST_CASE("min_bookkeeping: PR box under caps") {
    BookkeepingReport rep = min_bookkeeping(testutil::prbox_behavior());
    if (rep.reproduces) {
        CHECK(rep.i_m_c > 0.0);  // non-embeddable: the memory channel must leak context
        REQUIRE(rep.simulation.has_value());
        Behavior again = simulate_behavior(*rep.simulation, testutil::prbox_behavior().scenario);
        Behavior want = testutil::prbox_behavior();
        for (const auto& c : want.scenario.contexts)
            for (std::size_t i = 0; i < 4; ++i)
                CHECK(std::abs(again.tables[c.id].weights[i] -
                               want.tables[c.id].weights[i]) <= 1e-9);
    } else {
        CHECK(rep.search_exhausted);
    }
    CHECK(rep.i_m_c <= rep.h_m + 1e-9);
}

TEST_CASE("min_bookkeeping honors a supplied context prior") {
    Behavior b = store_the_context_behavior();
    std::vector<double> prior = {0.9, 0.1};
    BookkeepingReport rep = min_bookkeeping(b, {}, kDefaultTol, &prior);
    CHECK(rep.reproduces);
    // H(0.9) = I(M;C) when memory mirrors the context
    double h = -(0.9 * std::log2(0.9) + 0.1 * std::log2(0.1));
    CHECK(rep.i_m_c == doctest::Approx(h).epsilon(1e-9));
}
