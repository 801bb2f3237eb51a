#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace ctxkit {

inline constexpr double kDefaultTol = 1e-9;

/// One measurable quantity. `arity` is the number of distinct outcomes.
struct Observable {
    std::string id;
    int arity = 2;
};

/// A set of jointly measurable observables, in a declared order.
/// Order matters: outcome tables are indexed row-major over this order,
/// with the outcome index moving fastest on the last observable.
struct Context {
    std::string id;
    std::vector<std::string> observables;
};

struct Scenario {
    std::vector<Observable> observables;
    std::vector<Context> contexts;

    const Observable* find_observable(const std::string& id) const;
    const Context* find_context(const std::string& id) const;
    /// Product of the arities of a context's observables (its table size).
    std::size_t table_size(const Context& c) const;
};

/// Probability weights over the joint outcomes of one context.
struct Distribution {
    std::vector<double> weights;

    double sum() const;
    bool is_valid(double tol = kDefaultTol) const;
};

/// Per-context outcome tables for a scenario.
struct Behavior {
    Scenario scenario;
    std::map<std::string, Distribution> tables;

    const Distribution& table(const std::string& context_id) const;
};

struct Violation {
    std::string code;      // stable machine-readable tag, e.g. "duplicate-observable"
    std::string location;  // which entity violated, e.g. "observable:X"
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

/// Pairwise marginal mismatch for one observable shared by two contexts.
struct DisturbanceEntry {
    std::string observable;
    std::string context_a;
    std::string context_b;
    double residual = 0.0;
};

struct DisturbanceReport {
    std::vector<DisturbanceEntry> entries;
    double max_residual = 0.0;
    bool pass = false;
};

/// Collects every invariant violation instead of failing on the first.
ValidationReport validate_scenario(const Scenario& s);

/// Validates the behavior on top of its scenario (table presence, sizes,
/// non-negativity, normalization).
ValidationReport validate_behavior(const Behavior& b, double tol = kDefaultTol);

/// Index arithmetic for the row-major outcome convention.
std::size_t outcome_index(const std::vector<int>& arities, const std::vector<int>& outcomes);
std::vector<int> outcome_unindex(const std::vector<int>& arities, std::size_t index);
std::vector<int> context_arities(const Scenario& s, const Context& c);

/// Marginal of a context table onto a subset of its observables.
/// `keep` must be a non-empty subset of the context's observables; the
/// result is indexed over the kept observables in their context order.
Distribution marginal(const Behavior& b, const std::string& context_id,
                      const std::vector<std::string>& keep);

/// For every observable shared by two contexts, the max-abs difference
/// between the two induced single-observable marginals.
DisturbanceReport check_no_disturbance(const Behavior& b, double tol = kDefaultTol);

}  // namespace ctxkit
