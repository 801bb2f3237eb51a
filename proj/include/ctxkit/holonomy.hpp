#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ctxkit/projection.hpp"
#include "ctxkit/scenario.hpp"

namespace ctxkit {

/// Locally Boolean event structure of one context: labelled atoms plus a
/// probability measure over them.
struct LogicWorld {
    std::string context_id;
    std::vector<std::string> atoms;
    Distribution measure;
};

/// Directed transition between two worlds. Matched branches map injectively
/// source atom -> target atom and each carries a phase offset (radians).
struct TransitionMap {
    std::string source;
    std::string target;
    std::map<std::string, std::string> correspondence;
    std::map<std::string, double> phase_offsets;
};

struct Atlas {
    std::map<std::string, LogicWorld> worlds;
    std::vector<TransitionMap> transitions;

    const TransitionMap* find_transition(const std::string& source,
                                         const std::string& target) const;
};

ValidationReport validate_atlas(const Atlas& atlas);

/// Branch of a composed path: where a start atom ends up and the phase it
/// accumulated. Raw phase sums are kept unreduced; reduction conventions are
/// applied at the holonomy/gluing layer.
struct CompositeBranch {
    std::string start_atom;
    std::string end_atom;
    double phase = 0.0;
};

struct CompositeMap {
    std::vector<std::string> path;
    std::vector<CompositeBranch> branches;
    std::vector<std::string> dropped_atoms;  // start atoms whose chain broke
};

/// Compose declared transitions along consecutive pairs of `path`.
/// Throws when a hop has no declared transition. Atoms whose branch chain
/// breaks are listed in dropped_atoms rather than failing the whole path.
CompositeMap compose_path(const Atlas& atlas, const std::vector<std::string>& path);

struct HolonomyResult {
    std::vector<std::string> loop;
    /// Phase per returning branch, reduced to (-pi, pi].
    std::map<std::string, double> per_branch_phase;
    /// Atoms that come back as a different atom; reported separately and
    /// never folded into the phase.
    std::map<std::string, std::string> non_returning;
    std::vector<std::string> dropped_atoms;
    bool flat = false;
    double max_abs_phase = 0.0;
};

/// Phase holonomy around a closed loop (first id must equal last).
HolonomyResult loop_holonomy(const Atlas& atlas, const std::vector<std::string>& loop,
                             double tol = kDefaultTol);

/// Transport two branches to a common target world and take the phase
/// difference Theta = phase(not-A path) - phase(A path), reduced to [0, 2pi).
struct GluingSpec {
    std::string branch_a;                 // start atom in path_a.front()
    std::vector<std::string> path_a;
    std::string branch_not_a;             // start atom in path_not_a.front()
    std::vector<std::string> path_not_a;  // must end in the same world as path_a
};

GluingPhase gluing_phase(const Atlas& atlas, const GluingSpec& spec);

struct FlatnessReport {
    bool flat = false;
    double max_abs_phase = 0.0;
    std::vector<std::string> witness_loop;  // a loop attaining max_abs_phase
    std::size_t loops_checked = 0;
};

/// Enumerate simple loops (no repeated world except the closure) up to
/// max_loop_len and report the largest per-branch holonomy phase found.
/// Throws std::length_error when the enumeration budget is exceeded.
FlatnessReport flatness_check(const Atlas& atlas, int max_loop_len = 6,
                              double tol = kDefaultTol,
                              std::size_t budget = 1'000'000);

}  // namespace ctxkit
