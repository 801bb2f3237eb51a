#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ctxkit/intervention.hpp"

namespace ctxkit {

/// Configuration of the memory/interference simulation. Both questions are
/// amplitude-kind interventions on the shared initial state; outcome 0 of a
/// question is its "yes" branch.
struct TradeoffConfig {
    InterventionOp question_a;
    InterventionOp question_b;
    SharedState initial;
    std::vector<int> memory_levels;  // ascending, each >= 0
    std::size_t trials = 10000;
    std::uint64_t seed = 0;
    double noise = 0.0;  // per-answer probability of a uniform resample
};

void validate_tradeoff_config(const TradeoffConfig& cfg);

struct TradeoffLevel {
    int memory = 0;
    double reliability = 0.0;  // r(m) = 1 - 2^-m
    double i_abs = 0.0;        // |fitted interference| = |P(B first) - LTP|
    double theta = 0.0;        // fitted gluing phase in [0, pi]
    bool fit_ok = false;       // false when the branch weights are degenerate
    bool phase_feasible = false;
    bool smoothed = false;  // Laplace +1 applied to an empty conditional cell
    double order_effect_tv = 0.0;
    double i_mc = 0.0;  // achieved I(memory symbol; context) in bits
    // The fitted frequencies, kept for reproducibility of the fit.
    double p_b_first = 0.0;
    double p_a = 0.0;
    double p_b_given_a = 0.0;
    double p_b_given_not_a = 0.0;
    // Empirical sequential joints, row-major (a outcome, b outcome), the
    // B-first arm realigned to the same indexing.
    std::vector<double> joint_ab;
    std::vector<double> joint_ba;
};

struct TradeoffReport {
    std::uint64_t seed = 0;
    std::size_t trials = 0;
    std::vector<TradeoffLevel> levels;
};

/// Run the two-arm experiment at each memory level. Per trial the agent
/// either works from the reliably recorded (context, first answer) pair —
/// answering from one classical joint, the flat display — or from the
/// coherent state, which carries the phased gluing. Deterministic for a
/// fixed config and seed.
TradeoffReport run_tradeoff(const TradeoffConfig& cfg);

/// One CSV row per memory level: m,I_abs,theta,order_effect,I_MC.
void write_tradeoff_csv(const TradeoffReport& r, std::ostream& os);
void fit_report_to_csv(const TradeoffReport& r, const std::string& path);

}  // namespace ctxkit
