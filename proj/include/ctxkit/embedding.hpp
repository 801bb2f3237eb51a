#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ctxkit/scenario.hpp"
#include "ctxkit/simplex.hpp"

namespace ctxkit {

/// One outcome per observable, aligned with the scenario's observable order.
struct GlobalAssignment {
    std::vector<int> outcomes;

    std::map<std::string, int> as_map(const Scenario& s) const;
};

inline constexpr std::size_t kDefaultAssignmentCap = std::size_t{1} << 20;

/// All outcome assignments in lexicographic order (first observable most
/// significant). Throws std::length_error past `cap`.
std::vector<GlobalAssignment> enumerate_global_assignments(
    const Scenario& s, std::size_t cap = kDefaultAssignmentCap);

/// Number of global assignments without materializing them.
std::size_t count_global_assignments(const Scenario& s);

/// Linear functional on behavior cells, grouped per context.
struct CellFunctional {
    std::map<std::string, std::vector<double>> coefficients;
    double value_on_behavior = 0.0;
    double deterministic_max = 0.0;
    double margin = 0.0;  // value_on_behavior - deterministic_max
    std::string kind;     // "farkas" or "disturbance"
};

struct EmbeddingCertificate {
    enum class Status { embeddable, non_embeddable, marginal };

    Status status = Status::non_embeddable;
    /// Signed feasibility margin: the largest m such that some global joint
    /// reproducing the behavior has every assignment weight >= m. Negative
    /// outside the classical hull; -inf when the behavior is disturbing or
    /// otherwise outside the linear span of the deterministic behaviors.
    double margin = 0.0;

    /// Present when status is embeddable or marginal: weights over the
    /// assignments from enumerate_global_assignments, plus their worst
    /// reproduction error against the tables.
    std::optional<std::vector<double>> joint;
    double joint_residual = 0.0;

    /// Present when status is non_embeddable or marginal.
    std::optional<CellFunctional> witness;

    /// Set when the behavior failed the no-disturbance gate; the certificate
    /// then short-circuits to non-embeddable with a disturbance witness.
    std::optional<DisturbanceReport> disturbance;
};

/// Decide whether the behavior extends to a single joint distribution over
/// all observables. Runs the no-disturbance gate first; disturbing behaviors
/// short-circuit to non-embeddable (a global joint forces equal shared
/// marginals). Otherwise solves the margin LP over the deterministic
/// assignments enumerated under `cap`.
EmbeddingCertificate check_boolean_embedding(const Behavior& b, double tol = kDefaultTol,
                                             std::size_t cap = kDefaultAssignmentCap);

/// Constraint matrix of the embedding problem: one row per (context, joint
/// outcome) cell in scenario order, one column per global assignment; entry 1
/// iff the assignment restricts to that outcome. Also returns the stacked
/// table vector for a behavior.
lp::Matrix assignment_cell_matrix(const Scenario& s,
                                  const std::vector<GlobalAssignment>& assignments);
std::vector<double> stacked_tables(const Behavior& b);

struct HullMembership {
    bool member = false;
    bool in_span = true;   // false when p is outside the span (margin is then -inf)
    double margin = 0.0;   // exact signed margin, rounded to double
};

/// Exact-rational hull membership oracle. Precomputes, once per scenario,
/// the basic solutions of the dual margin program (the facet functionals of
/// the deterministic hull); each query is then an exact minimum of a few dot
/// products. Desk-scale only: at most 16 assignments and 64 cells.
class HullOracle {
  public:
    explicit HullOracle(const Scenario& s);
    ~HullOracle();
    HullOracle(HullOracle&&) noexcept;
    HullOracle& operator=(HullOracle&&) noexcept;

    HullMembership check(const Behavior& b) const;
    std::size_t facet_count() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// One-shot convenience wrapper around HullOracle.
HullMembership deterministic_hull_membership(const Behavior& b);

/// Exhaustive exact enumeration of the primal basic solutions of the margin
/// program. Independent of both the float LP and the facet oracle; intended
/// for cross-checking them on very small scenarios (at most ~10 assignments).
HullMembership hull_membership_by_basis_enumeration(const Behavior& b);

}  // namespace ctxkit
