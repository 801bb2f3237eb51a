#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ctxkit/holonomy.hpp"
#include "ctxkit/projection.hpp"
#include "test_util.hpp"

using namespace ctxkit;
using std::numbers::pi;

namespace {

LogicWorld binary_world(const std::string& id) {
    return {id, {"0", "1"}, {{0.5, 0.5}}};
}

TransitionMap link(const std::string& src, const std::string& dst, double ph0, double ph1) {
    TransitionMap t;
    t.source = src;
    t.target = dst;
    t.correspondence = {{"0", "0"}, {"1", "1"}};
    t.phase_offsets = {{"0", ph0}, {"1", ph1}};
    return t;
}

// Worlds on a ring with identity correspondences and given per-hop offsets
// (same offset on both branches).
Atlas ring_atlas(int n, const std::vector<double>& offsets) {
    Atlas a;
    for (int i = 0; i < n; ++i) a.worlds["w" + std::to_string(i)] = binary_world("w" + std::to_string(i));
    for (int i = 0; i < n; ++i) {
        int j = (i + 1) % n;
        a.transitions.push_back(
            link("w" + std::to_string(i), "w" + std::to_string(j), offsets[i], offsets[i]));
    }
    return a;
}

Atlas random_complete_atlas(testutil::Rng& rng, int n_worlds) {
    Atlas a;
    for (int i = 0; i < n_worlds; ++i)
        a.worlds["w" + std::to_string(i)] = binary_world("w" + std::to_string(i));
    for (int i = 0; i < n_worlds; ++i)
        for (int j = 0; j < n_worlds; ++j) {
            if (i == j) continue;
            a.transitions.push_back(link("w" + std::to_string(i), "w" + std::to_string(j),
                                         rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)));
        }
    return a;
}

void gauge_shift(Atlas& a, const std::map<std::string, double>& delta) {
    for (auto& t : a.transitions)
        for (auto& [atom, phase] : t.phase_offsets)
            phase += delta.at(t.source) - delta.at(t.target);
}

}  // namespace

TEST_CASE("atlas validation catches broken maps") {
    Atlas a;
    a.worlds["a"] = binary_world("a");
    TransitionMap bad;
    bad.source = "a";
    bad.target = "missing";
    bad.correspondence = {{"0", "0"}, {"1", "0"}};  // not injective
    a.transitions.push_back(bad);
    ValidationReport r = validate_atlas(a);
    CHECK_FALSE(r.ok());
}

TEST_CASE("identity path composition has zero phases") {
    Atlas a;
    a.worlds["a"] = binary_world("a");
    a.worlds["b"] = binary_world("b");
    a.transitions.push_back(link("a", "b", 0.0, 0.0));
    CompositeMap comp = compose_path(a, {"a", "b"});
    REQUIRE(comp.branches.size() == 2);
    for (const auto& br : comp.branches) CHECK(br.phase == 0.0);
    CHECK(comp.dropped_atoms.empty());
}

TEST_CASE("two hops add offsets per branch") {
    Atlas a;
    for (const char* id : {"a", "b", "c"}) a.worlds[id] = binary_world(id);
    a.transitions.push_back(link("a", "b", 0.25, 0.5));
    a.transitions.push_back(link("b", "c", 0.125, 0.25));
    CompositeMap comp = compose_path(a, {"a", "b", "c"});
    for (const auto& br : comp.branches) {
        if (br.start_atom == "0") CHECK(br.phase == 0.375);  // dyadic offsets: exact
        if (br.start_atom == "1") CHECK(br.phase == 0.75);
    }
}

TEST_CASE("three-hop chain accumulates 0.6") {
    Atlas a = ring_atlas(4, {0.1, 0.2, 0.3, 0.0});
    CompositeMap comp = compose_path(a, {"w0", "w1", "w2", "w3"});
    for (const auto& br : comp.branches)
        CHECK(br.phase == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("path additivity is exact for dyadic offsets") {
    Atlas a = ring_atlas(6, {0.25, 0.5, 0.125, 0.0625, 0.75, 0.0});
    CompositeMap whole = compose_path(a, {"w0", "w1", "w2", "w3", "w4"});
    CompositeMap first = compose_path(a, {"w0", "w1", "w2"});
    CompositeMap second = compose_path(a, {"w2", "w3", "w4"});
    for (std::size_t i = 0; i < whole.branches.size(); ++i)
        CHECK(whole.branches[i].phase ==
              first.branches[i].phase + second.branches[i].phase);
}

TEST_CASE("missing transitions and broken chains are reported") {
    Atlas a;
    a.worlds["a"] = binary_world("a");
    a.worlds["b"] = binary_world("b");
    a.worlds["c"] = binary_world("c");
    TransitionMap partial;
    partial.source = "a";
    partial.target = "b";
    partial.correspondence = {{"0", "1"}};  // atom "1" has no image
    a.transitions.push_back(partial);
    CHECK_THROWS_AS(compose_path(a, {"a", "c"}), std::invalid_argument);
    CompositeMap comp = compose_path(a, {"a", "b"});
    CHECK(comp.branches.size() == 1);
    REQUIRE(comp.dropped_atoms.size() == 1);
    CHECK(comp.dropped_atoms[0] == "1");
}

TEST_CASE("identity atlas loops are flat") {
    Atlas a = ring_atlas(3, {0.0, 0.0, 0.0});
    HolonomyResult h = loop_holonomy(a, {"w0", "w1", "w2", "w0"});
    CHECK(h.flat);
    CHECK(h.max_abs_phase == 0.0);
    for (const auto& [atom, phase] : h.per_branch_phase) CHECK(phase == 0.0);
}

TEST_CASE("two-world loop holonomy is alpha + beta exactly") {
    double alpha = 0.7, beta = 0.9;
    Atlas a;
    a.worlds["a"] = binary_world("a");
    a.worlds["b"] = binary_world("b");
    a.transitions.push_back(link("a", "b", alpha, alpha));
    a.transitions.push_back(link("b", "a", beta, beta));
    HolonomyResult h = loop_holonomy(a, {"a", "b", "a"});
    CHECK_FALSE(h.flat);
    for (const auto& [atom, phase] : h.per_branch_phase)
        CHECK(phase == reduce_phase_signed(alpha + beta));
}

TEST_CASE("square loop of quarter turns lands on pi") {
    Atlas a = ring_atlas(4, {pi / 4, pi / 4, pi / 4, pi / 4});
    HolonomyResult h = loop_holonomy(a, {"w0", "w1", "w2", "w3", "w0"});
    CHECK_FALSE(h.flat);
    for (const auto& [atom, phase] : h.per_branch_phase)
        CHECK(phase == doctest::Approx(pi).epsilon(1e-12));
}

TEST_CASE("non-closing loops are rejected") {
    Atlas a = ring_atlas(3, {0.0, 0.0, 0.0});
    CHECK_THROWS_AS(loop_holonomy(a, {"w0", "w1", "w2"}), std::invalid_argument);
}

TEST_CASE("structurally non-returning branches are reported separately") {
    Atlas a;
    a.worlds["a"] = binary_world("a");
    a.worlds["b"] = binary_world("b");
    TransitionMap swap_ab;
    swap_ab.source = "a";
    swap_ab.target = "b";
    swap_ab.correspondence = {{"0", "1"}, {"1", "0"}};
    TransitionMap id_ba;
    id_ba.source = "b";
    id_ba.target = "a";
    id_ba.correspondence = {{"0", "0"}, {"1", "1"}};
    a.transitions.push_back(swap_ab);
    a.transitions.push_back(id_ba);
    HolonomyResult h = loop_holonomy(a, {"a", "b", "a"});
    CHECK_FALSE(h.flat);
    CHECK(h.per_branch_phase.empty());
    CHECK(h.non_returning.size() == 2);
    CHECK(h.max_abs_phase == 0.0);  // permutation, never folded into the phase
}

TEST_CASE("gluing phase: equal offsets cancel") {
    Atlas a;
    a.worlds["a"] = binary_world("a");
    a.worlds["b"] = binary_world("b");
    a.transitions.push_back(link("a", "b", 0.4, 0.4));
    GluingSpec spec{"0", {"a", "b"}, "1", {"a", "b"}};
    CHECK(gluing_phase(a, spec).theta == 0.0);
}

TEST_CASE("gluing phase: offset difference 1.1 - 0.3") {
    Atlas a;
    a.worlds["a"] = binary_world("a");
    a.worlds["b"] = binary_world("b");
    a.transitions.push_back(link("a", "b", 0.3, 1.1));
    GluingSpec spec{"0", {"a", "b"}, "1", {"a", "b"}};
    CHECK(gluing_phase(a, spec).theta == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("a gluing phase of pi/2 reproduces the classical display") {
    Atlas a;
    a.worlds["a"] = binary_world("a");
    a.worlds["b"] = binary_world("b");
    a.transitions.push_back(link("a", "b", 0.25, 0.25 + pi / 2));
    GluingSpec spec{"0", {"a", "b"}, "1", {"a", "b"}};
    GluingPhase theta = gluing_phase(a, spec);
    BranchData d{0.6, 0.5, 0.4, 0.25};
    CHECK(std::abs(glued_projection(d, theta).probability - ltp_predict(d)) <= 1e-12);
}

TEST_CASE("non-transportable branches are an error") {
    Atlas a;
    a.worlds["a"] = binary_world("a");
    a.worlds["b"] = binary_world("b");
    TransitionMap partial;
    partial.source = "a";
    partial.target = "b";
    partial.correspondence = {{"0", "0"}};
    a.transitions.push_back(partial);
    GluingSpec spec{"0", {"a", "b"}, "1", {"a", "b"}};
    CHECK_THROWS_AS(gluing_phase(a, spec), std::invalid_argument);
}

TEST_CASE("flatness check: identity atlas flat, alpha two-cycle witnessed") {
    Atlas flat;
    flat.worlds["a"] = binary_world("a");
    flat.worlds["b"] = binary_world("b");
    flat.transitions.push_back(link("a", "b", 0.0, 0.0));
    flat.transitions.push_back(link("b", "a", 0.0, 0.0));
    FlatnessReport fr = flatness_check(flat);
    CHECK(fr.flat);
    CHECK(fr.max_abs_phase == 0.0);

    Atlas bent = flat;
    bent.transitions[0].phase_offsets = {{"0", 0.3}, {"1", 0.3}};
    FlatnessReport br = flatness_check(bent);
    CHECK_FALSE(br.flat);
    CHECK(br.max_abs_phase == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(br.witness_loop.size() == 3);  // a -> b -> a
}

TEST_CASE("gauge transformations leave every loop holonomy unchanged") {
    testutil::Rng rng(42);
    for (int trial = 0; trial < 30; ++trial) {
        Atlas a = random_complete_atlas(rng, 4);
        Atlas shifted = a;
        std::map<std::string, double> delta;
        for (const auto& [id, w] : a.worlds) delta[id] = rng.uniform(-2.0, 2.0);
        gauge_shift(shifted, delta);

        FlatnessReport fa = flatness_check(a, 4);
        FlatnessReport fb = flatness_check(shifted, 4);
        CHECK(std::abs(fa.max_abs_phase - fb.max_abs_phase) <= 1e-12);

        HolonomyResult ha = loop_holonomy(a, {"w0", "w1", "w2", "w0"});
        HolonomyResult hb = loop_holonomy(shifted, {"w0", "w1", "w2", "w0"});
        for (const auto& [atom, phase] : ha.per_branch_phase) {
            double diff = reduce_phase_signed(phase - hb.per_branch_phase.at(atom));
            CHECK(std::abs(diff) <= 1e-12);
        }
    }
}

TEST_CASE("a gauge-transformed flat atlas stays flat") {
    testutil::Rng rng(43);
    Atlas a = ring_atlas(4, {0.3, -0.7, 0.5, -0.1});  // sums to 0 around the ring
    REQUIRE(flatness_check(a).flat);
    std::map<std::string, double> delta;
    for (const auto& [id, w] : a.worlds) delta[id] = rng.uniform(-2.0, 2.0);
    gauge_shift(a, delta);
    CHECK(flatness_check(a).flat);
}

TEST_CASE("loop reversal negates branch phases when inverses are declared") {
    Atlas a;
    for (const char* id : {"a", "b", "c"}) a.worlds[id] = binary_world(id);
    a.transitions.push_back(link("a", "b", 0.4, -0.2));
    a.transitions.push_back(link("b", "a", -0.4, 0.2));
    a.transitions.push_back(link("b", "c", 0.9, 0.1));
    a.transitions.push_back(link("c", "b", -0.9, -0.1));
    a.transitions.push_back(link("c", "a", 0.6, 1.2));
    a.transitions.push_back(link("a", "c", -0.6, -1.2));
    HolonomyResult fwd = loop_holonomy(a, {"a", "b", "c", "a"});
    HolonomyResult rev = loop_holonomy(a, {"a", "c", "b", "a"});
    for (const auto& [atom, phase] : fwd.per_branch_phase) {
        double sum = reduce_phase_signed(phase + rev.per_branch_phase.at(atom));
        CHECK(std::abs(sum) <= 1e-12);
    }
}

TEST_CASE("flat atlas: gluing phase is path independent") {
    Atlas a = ring_atlas(4, {0.3, -0.7, 0.5, -0.1});
    // add chords consistent with a gauge potential phi: w0=0, w1=0.3, w2=-0.4, w3=0.1
    a.transitions.push_back(link("w0", "w2", -0.4, -0.4));
    REQUIRE(flatness_check(a).flat);
    GluingSpec direct{"0", {"w0", "w2"}, "1", {"w0", "w2"}};
    GluingSpec around{"0", {"w0", "w1", "w2"}, "1", {"w0", "w1", "w2"}};
    // per-branch transported phases agree between the two routes
    CompositeMap p1 = compose_path(a, {"w0", "w2"});
    CompositeMap p2 = compose_path(a, {"w0", "w1", "w2"});
    for (std::size_t i = 0; i < p1.branches.size(); ++i)
        CHECK(std::abs(reduce_phase_signed(p1.branches[i].phase - p2.branches[i].phase)) <=
              1e-12);
    CHECK(gluing_phase(a, direct).theta == doctest::Approx(gluing_phase(a, around).theta));
}

TEST_CASE("loop enumeration budget is enforced") {
    testutil::Rng rng(77);
    Atlas big = random_complete_atlas(rng, 6);
    CHECK_THROWS_AS(flatness_check(big, 6, kDefaultTol, 10), std::length_error);
}
