#pragma once

#include <complex>
#include <map>
#include <string>
#include <vector>

#include "ctxkit/scenario.hpp"

namespace ctxkit {

enum class StateKind { stochastic, amplitude };

using Cx = std::complex<double>;
using CxMatrix = std::vector<std::vector<Cx>>;
using RealMatrix = std::vector<std::vector<double>>;

/// Shared internal state: a probability vector or a unit amplitude vector.
struct SharedState {
    StateKind kind = StateKind::stochastic;
    std::vector<double> probabilities;
    std::vector<Cx> amplitudes;

    std::size_t dimension() const {
        return kind == StateKind::stochastic ? probabilities.size() : amplitudes.size();
    }
};

void validate_state(const SharedState& x, double tol = kDefaultTol);

/// A context acting as an intervention. Stochastic kind: a column-stochastic
/// map, outcomes are the post-intervention basis states. Amplitude kind: a
/// unitary followed by a projective readout {P_k}; the post-measurement
/// update is projective renormalization.
struct InterventionOp {
    std::string id;
    StateKind kind = StateKind::stochastic;
    RealMatrix stochastic_action;           // action[i][j] = P(new=i | old=j)
    CxMatrix unitary;
    std::vector<CxMatrix> projectors;

    std::size_t dimension() const;
    std::size_t outcome_count() const;
};

void validate_op(const InterventionOp& op, double tol = kDefaultTol);

struct InterventionModel {
    SharedState initial;
    std::map<std::string, InterventionOp> ops;
    /// Optional prior over contexts, carried for single-state I(X;C)
    /// modeling; the sequential machinery itself never consults it.
    std::map<std::string, double> context_prior;

    const InterventionOp& op(const std::string& id) const;
};

/// Model-level invariants: every op shares the initial state's kind and
/// dimension, and the context prior (when present) is a distribution over
/// declared ops.
void validate_model(const InterventionModel& m, double tol = kDefaultTol);

struct ApplyResult {
    Distribution outcomes;
    /// Post-state per outcome branch. Branches with (near) zero probability
    /// are left zero-filled; check the outcome weight before using one.
    std::vector<SharedState> branch_states;
    /// Non-selective evolution: action.x for stochastic, U.x (before the
    /// readout) for amplitude.
    SharedState evolved;
};

ApplyResult apply(const InterventionOp& op, const SharedState& x, double tol = kDefaultTol);

/// Distribution over outcome tuples from branching through the interventions
/// in order, indexed row-major with the last intervention's outcome fastest.
Distribution sequential_stats(const InterventionModel& m, const std::vector<std::string>& order);

/// Max-absolute-entry norm of the commutator of the underlying maps
/// (stochastic matrices or unitaries).
double commutator_norm(const InterventionOp& a, const InterventionOp& b);

/// Total variation distance between the two orders of a pair of
/// interventions, after aligning tuples as (outcome of a, outcome of b).
double order_effect(const InterventionModel& m, const std::string& a, const std::string& b);

/// Both sequential joints of the pair, aligned as (outcome of a, outcome of
/// b), plus the raw and first-answer-conditioned comparisons. Emitted by the
/// CLI report; neither view is privileged.
struct OrderEffectReport {
    std::vector<double> joint_ab;  // row-major (a outcome, b outcome)
    std::vector<double> joint_ba;  // realigned to the same indexing
    double tv_raw = 0.0;
    /// TV between the conditionals given first answer = outcome 0 of the
    /// first question in each order.
    double tv_given_first_yes = 0.0;
    double commutator = 0.0;
};

OrderEffectReport order_effect_report(const InterventionModel& m, const std::string& a,
                                      const std::string& b);

/// Mutual information in bits of a user-supplied (state index, context)
/// joint; single-state semantics requires this to vanish.
double check_single_state(const std::vector<std::vector<double>>& joint_xc);

}  // namespace ctxkit
