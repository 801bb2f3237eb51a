#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ctxkit/scenario.hpp"

namespace ctxkit {

/// Bipartite behavior P(a,b|x,y). Tables are indexed row-major (a, b) with b
/// fastest, keyed by the setting pair.
struct BipartiteBehavior {
    int n_x = 2, n_y = 2;  // settings per party
    int n_a = 2, n_b = 2;  // outcomes per party
    std::map<std::pair<int, int>, Distribution> tables;

    const Distribution& table(int x, int y) const;
};

ValidationReport validate_bipartite(const BipartiteBehavior& b, double tol = kDefaultTol);

struct NoSignallingEntry {
    std::string party;  // "A" or "B"
    int setting = 0;    // x for A, y for B
    int outcome = 0;
    int other_setting_1 = 0;
    int other_setting_2 = 0;
    double residual = 0.0;
};

struct NoSignallingReport {
    double max_residual = 0.0;
    bool pass = false;
    std::vector<NoSignallingEntry> worst;  // the maximizing entries, one per party
};

NoSignallingReport check_no_signalling(const BipartiteBehavior& b, double tol = kDefaultTol);

/// Local hidden-variable model in vertex form: a prior over deterministic
/// response pairs (x -> a, y -> b).
struct LocalModel {
    struct Strategy {
        std::vector<int> a_of_x;
        std::vector<int> b_of_y;
        double weight = 0.0;
    };
    std::vector<Strategy> strategies;

    BipartiteBehavior induced(int n_x, int n_y, int n_a, int n_b) const;
};

/// Bell-type functional over the cells, with the deterministic maximum as
/// the classical bound. For 2x2x2x2 behaviors the functional is reported in
/// correlator form normalized to max|coefficient| = 1, so CHSH-type margins
/// read in the conventional units (classical bound 2).
struct BellWitness {
    std::map<std::pair<int, int>, std::vector<double>> cell_coefficients;
    double value_on_behavior = 0.0;
    double classical_bound = 0.0;  // max over deterministic strategies
    double margin = 0.0;
    // Correlator decomposition (2,2,2,2 only): value = const_term
    //   + sum_x alice_marginal[x] E^A_x + sum_y bob_marginal[y] E^B_y
    //   + sum_xy correlator[x][y] E_xy.
    std::optional<std::vector<std::vector<double>>> correlator;
};

struct LocalDecomposition {
    enum class Status { local, nonlocal, marginal };
    Status status = Status::nonlocal;
    double margin = 0.0;  // signed vertex-hull margin, as in the embedding module
    std::optional<LocalModel> model;
    double model_residual = 0.0;
    std::optional<BellWitness> witness;
};

/// Linear feasibility over the deterministic strategy pairs.
LocalDecomposition local_decomposition(const BipartiteBehavior& b, double tol = kDefaultTol,
                                       std::size_t vertex_cap = 100'000);

/// S = E(0,0) + E(0,1) + E(1,0) - E(1,1) with E = sum (-1)^(a xor b) P.
/// Requires the 2,2,2,2 shape.
double chsh_value(const BipartiteBehavior& b);

/// Encode the bipartite behavior as a scenario with one observable per
/// (party, setting) and one context per setting pair, so the embedding
/// module can decide the same question through its own path.
Behavior to_behavior(const BipartiteBehavior& b);

}  // namespace ctxkit
