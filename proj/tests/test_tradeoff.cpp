#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "ctxkit/embedding.hpp"
#include "ctxkit/io.hpp"
#include "ctxkit/projection.hpp"
#include "ctxkit/tradeoff.hpp"
#include "test_util.hpp"

using namespace ctxkit;
using std::numbers::pi;

namespace {

// The shipped question pair: A in the computational basis, B at Bloch angle
// 45 degrees, initial state carrying a relative phase of 1 radian.
TradeoffConfig load_fixture() {
    return io::tradeoff_config_from_json(
        io::load_json_file(testutil::fixture("tradeoff_small.json")), "fixture");
}

// Closed-form model quantities for the fixture, via the projection module.
struct ClosedForm {
    BranchData d;
    double coherent_b = 0.0;
    double interference = 0.0;
};

ClosedForm closed_form(const TradeoffConfig& cfg) {
    ClosedForm out;
    ApplyResult a = apply(cfg.question_a, cfg.initial);
    out.d.p_a = a.outcomes.weights[0];
    out.d.p_not_a = a.outcomes.weights[1];
    out.d.p_b_given_a = apply(cfg.question_b, a.branch_states[0]).outcomes.weights[0];
    out.d.p_b_given_not_a = apply(cfg.question_b, a.branch_states[1]).outcomes.weights[0];
    out.coherent_b = apply(cfg.question_b, cfg.initial).outcomes.weights[0];
    out.interference = out.coherent_b - ltp_predict(out.d);
    return out;
}

}  // namespace

TEST_CASE("identical config and seed give a bit-identical report") {
    TradeoffConfig cfg = load_fixture();
    cfg.trials = 5000;
    cfg.seed = 9;
    TradeoffReport r1 = run_tradeoff(cfg);
    TradeoffReport r2 = run_tradeoff(cfg);
    CHECK(io::tradeoff_to_json(r1).dump() == io::tradeoff_to_json(r2).dump());

    cfg.seed = 10;
    TradeoffReport r3 = run_tradeoff(cfg);
    CHECK(io::tradeoff_to_json(r1).dump() != io::tradeoff_to_json(r3).dump());
}

TEST_CASE("near-perfect memory levels show only sampling noise") {
    TradeoffConfig cfg = load_fixture();
    cfg.memory_levels = {30};
    cfg.trials = 40000;
    cfg.seed = 4;
    TradeoffReport r = run_tradeoff(cfg);
    REQUIRE(r.levels.size() == 1);
    CHECK(r.levels[0].i_abs <= 3.0 / std::sqrt(static_cast<double>(cfg.trials)));
    CHECK(r.levels[0].order_effect_tv <= 3.0 / std::sqrt(static_cast<double>(cfg.trials)));
}

TEST_CASE("memoryless level recovers the model's interference") {
    TradeoffConfig cfg = load_fixture();
    cfg.memory_levels = {0};
    cfg.trials = 100000;
    cfg.seed = 5;
    ClosedForm exact = closed_form(cfg);
    REQUIRE(std::abs(exact.interference) > 0.05);

    TradeoffReport r = run_tradeoff(cfg);
    REQUIRE(r.levels.size() == 1);
    const TradeoffLevel& level = r.levels[0];
    double bound = 3.0 / std::sqrt(static_cast<double>(cfg.trials));
    CHECK(level.fit_ok);
    CHECK(std::abs(level.i_abs - std::abs(exact.interference)) <= bound);

    // Forward route: the fitted phase reproduces the observed total.
    BranchData fitted{level.p_a, level.p_b_given_a, 1.0 - level.p_a, level.p_b_given_not_a};
    double forward = glued_projection(fitted, GluingPhase(level.theta)).probability;
    CHECK(std::abs(forward - level.p_b_first) <= 1e-9);

    // And against the exact model phase.
    PhaseFit exact_fit = extract_phase(exact.coherent_b, exact.d);
    CHECK(std::abs(level.theta - exact_fit.theta.theta) <= 0.1);
}

TEST_CASE("interference and order effects decline with memory") {
    TradeoffConfig cfg = load_fixture();
    cfg.trials = 50000;
    int good_i = 0, good_tv = 0;
    const double bound = 3.0 / std::sqrt(static_cast<double>(cfg.trials));
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        cfg.seed = seed;
        TradeoffReport r = run_tradeoff(cfg);
        int inversions_i = 0, inversions_tv = 0;
        for (std::size_t i = 1; i < r.levels.size(); ++i) {
            if (r.levels[i].i_abs > r.levels[i - 1].i_abs + bound) ++inversions_i;
            if (r.levels[i].order_effect_tv > r.levels[i - 1].order_effect_tv + bound)
                ++inversions_tv;
        }
        if (inversions_i <= 1) ++good_i;
        if (inversions_tv <= 1) ++good_tv;
    }
    CHECK(good_i == 3);
    CHECK(good_tv == 3);
}

TEST_CASE("achieved memory information respects the alphabet bound") {
    TradeoffConfig cfg = load_fixture();
    cfg.trials = 20000;
    cfg.seed = 2;
    TradeoffReport r = run_tradeoff(cfg);
    for (const auto& level : r.levels) {
        double cap = std::log2(std::max(level.memory, 1));
        CHECK(level.i_mc <= cap + 1e-9);
        CHECK(level.i_mc >= 0.0);
    }
    // No memory -> no memory information.
    CHECK(r.levels[0].i_mc == 0.0);
}

TEST_CASE("classical limit generates an order-consistent, embeddable behavior") {
    TradeoffConfig cfg = load_fixture();
    cfg.memory_levels = {60};
    cfg.trials = 50000;
    cfg.seed = 6;
    TradeoffReport r = run_tradeoff(cfg);
    const TradeoffLevel& level = r.levels[0];

    Behavior b;
    b.scenario.observables = {{"A", 2}, {"B", 2}};
    b.scenario.contexts = {{"ab", {"A", "B"}}, {"ba", {"A", "B"}}};
    b.tables["ab"] = {level.joint_ab};
    b.tables["ba"] = {level.joint_ba};
    double tol = 5.0 / std::sqrt(static_cast<double>(cfg.trials));
    EmbeddingCertificate cert = check_boolean_embedding(b, tol);
    CHECK(cert.status != EmbeddingCertificate::Status::non_embeddable);
}

TEST_CASE("quantum regime produces an order-disturbed behavior") {
    TradeoffConfig cfg = load_fixture();
    cfg.memory_levels = {0};
    cfg.trials = 50000;
    cfg.seed = 7;
    TradeoffReport r = run_tradeoff(cfg);
    const TradeoffLevel& level = r.levels[0];
    Behavior b;
    b.scenario.observables = {{"A", 2}, {"B", 2}};
    b.scenario.contexts = {{"ab", {"A", "B"}}, {"ba", {"A", "B"}}};
    b.tables["ab"] = {level.joint_ab};
    b.tables["ba"] = {level.joint_ba};
    double tol = 5.0 / std::sqrt(static_cast<double>(cfg.trials));
    EmbeddingCertificate cert = check_boolean_embedding(b, tol);
    CHECK(cert.status == EmbeddingCertificate::Status::non_embeddable);
}

TEST_CASE("answer noise keeps the report well-formed") {
    TradeoffConfig cfg = load_fixture();
    cfg.memory_levels = {0, 2};
    cfg.trials = 5000;
    cfg.noise = 0.1;
    TradeoffReport r = run_tradeoff(cfg);
    for (const auto& level : r.levels) {
        CHECK(level.i_abs >= 0.0);
        CHECK(level.order_effect_tv >= 0.0);
        CHECK(level.order_effect_tv <= 1.0);
    }
}

TEST_CASE("csv projections") {
    TradeoffReport empty;
    std::ostringstream os;
    write_tradeoff_csv(empty, os);
    CHECK(os.str() == "m,I_abs,theta,order_effect,I_MC\n");

    TradeoffConfig cfg = load_fixture();
    cfg.memory_levels = {1};
    cfg.trials = 1000;
    TradeoffReport r = run_tradeoff(cfg);
    std::ostringstream one;
    write_tradeoff_csv(r, one);
    std::string text = one.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);

    // Round-trip the numbers out of the row.
    std::istringstream in(text);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    std::replace(row.begin(), row.end(), ',', ' ');
    std::istringstream cells(row);
    int m;
    double i_abs, theta, tv, imc;
    cells >> m >> i_abs >> theta >> tv >> imc;
    CHECK(m == 1);
    CHECK(i_abs == r.levels[0].i_abs);
    CHECK(theta == r.levels[0].theta);
    CHECK(tv == r.levels[0].order_effect_tv);
    CHECK(imc == r.levels[0].i_mc);
}

TEST_CASE("config validation") {
    TradeoffConfig cfg = load_fixture();
    cfg.memory_levels = {3, 1};
    CHECK_THROWS_AS(run_tradeoff(cfg), std::invalid_argument);
    cfg = load_fixture();
    cfg.noise = 0.7;
    CHECK_THROWS_AS(run_tradeoff(cfg), std::invalid_argument);
    cfg = load_fixture();
    cfg.trials = 0;
    CHECK_THROWS_AS(run_tradeoff(cfg), std::invalid_argument);
}
