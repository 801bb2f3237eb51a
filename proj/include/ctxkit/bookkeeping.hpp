#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "ctxkit/scenario.hpp"

namespace ctxkit {

/// Shannon entropy in bits, 0*log0 := 0.
double entropy(const std::vector<double>& p);

/// Mutual information in bits of a two-variable joint p[x][y],
/// computed as H(X) + H(Y) - H(X,Y) and clipped at zero.
double mutual_information(const std::vector<std::vector<double>>& joint);

/// Conditional mutual information I(C;O|L) in bits of a three-variable
/// joint p[c][o][l]: sum over l of p(l) * I(C;O | L=l).
double conditional_mutual_information(
    const std::vector<std::vector<std::vector<double>>>& joint);

/// Classical simulation of a behavior: ontic state lambda, memory symbol m
/// written by a context-aware policy, and a response producing the context's
/// joint outcome. Components are indexed [lambda], [lambda][context][m] and
/// [lambda][m][context][outcome]; contexts by scenario position.
struct ClassicalSimulation {
    std::vector<double> ontic_prior;
    std::size_t n_memory = 1;
    std::vector<std::vector<std::vector<double>>> memory_policy;
    std::vector<std::vector<std::vector<std::vector<double>>>> response;

    std::size_t n_lambda() const { return ontic_prior.size(); }
};

/// Average the simulation into per-context outcome tables.
Behavior simulate_behavior(const ClassicalSimulation& sim, const Scenario& s);

struct BookkeepingCaps {
    std::size_t max_lambda = 4;
    std::size_t max_memory = 4;
    /// Upper bound on candidate simulations examined before giving up with
    /// an error (the search space grows quickly with behavior support).
    std::size_t budget = 200'000'000;
};

struct BookkeepingReport {
    double h_m = 0.0;
    double i_m_c = 0.0;
    double i_c_o_given_lambda = 0.0;
    bool reproduces = false;
    bool search_exhausted = false;
    double residual = 0.0;  // reproduction error of the reported simulation
    std::optional<ClassicalSimulation> simulation;
    std::size_t candidates_checked = 0;
};

/// Cheapest classical bookkeeping for a behavior under single-state
/// semantics. Embeddable behaviors take the shortcut: the global joint is
/// the ontic prior, memory is trivial and I(M;C) = 0. Otherwise the search
/// enumerates deterministic simulations under the caps: the memory policy
/// may read (lambda, context); the response reads the memory symbol alone
/// and assigns a full outcome per observable (a global assignment), the
/// context only selecting which observables are read out. This keeps the
/// memory channel the only route by which context can reach the readout.
/// The minimum of I(M;C) over reproducing simulations is reported; ties are
/// broken by enumeration order.
BookkeepingReport min_bookkeeping(const Behavior& b, const BookkeepingCaps& caps = {},
                                  double tol = kDefaultTol,
                                  const std::vector<double>* context_prior = nullptr);

}  // namespace ctxkit
