#pragma once

#include <complex>

namespace ctxkit {

/// The four numbers of a two-branch partition: P(A), P(B|A), P(not A), P(B|not A).
struct BranchData {
    double p_a = 0.0;
    double p_b_given_a = 0.0;
    double p_not_a = 0.0;
    double p_b_given_not_a = 0.0;
};

/// A branch contribution in polar form. Magnitude is never negative;
/// the phase is stored reduced to [0, 2pi).
struct RealizationAmplitude {
    double magnitude = 0.0;
    double phase = 0.0;

    RealizationAmplitude() = default;
    RealizationAmplitude(double magnitude_in, double phase_in);
    std::complex<double> value() const;
};

/// Relative phase between the two branch contributions, reduced to [0, 2pi).
struct GluingPhase {
    double theta = 0.0;

    GluingPhase() = default;
    explicit GluingPhase(double theta_in);
};

struct PhaseFit {
    GluingPhase theta;     // in [0, pi]; the sign is not identifiable from one total
    bool feasible = true;  // false when the observed total lies outside the reachable band
    double excess = 0.0;   // how far |cos| exceeded 1 when infeasible
};

struct ProjectionResult {
    double probability = 0.0;
    bool in_range = true;  // false when the total leaves [0,1]; reported, never clamped
};

/// Reduce an angle to [0, 2pi).
double reduce_phase(double radians);
/// Reduce an angle to (-pi, pi].
double reduce_phase_signed(double radians);

void validate_branch_data(const BranchData& d, double tol = 1e-9);

/// Classical total: P(A)P(B|A) + P(notA)P(B|notA).
double ltp_predict(const BranchData& d);

/// Branch weights r_A = sqrt(P(A)P(B|A)), r_notA = sqrt(P(notA)P(B|notA)).
struct RealizationWeights {
    double r_a = 0.0;
    double r_not_a = 0.0;
};
RealizationWeights realization_weights(const BranchData& d);

/// Squared norm of the two glued branch contributions at relative phase theta.
/// Computed literally as |r_A + r_notA e^{i theta}|^2, so the expansion
/// identity against ltp_predict + interference_term is a real numerical check.
ProjectionResult glued_projection(const BranchData& d, const GluingPhase& theta);

/// Cross term 2 r_A r_notA cos(theta).
double interference_term(const BranchData& d, const GluingPhase& theta);

/// Invert the projection for theta given an observed total.
/// Requires both branch weights positive; throws std::domain_error otherwise.
PhaseFit extract_phase(double observed, const BranchData& d, double tol = 1e-9);

/// |total(B) + total(notB) - 1| for a complementary event pair.
/// d_not_b must have the complementary conditionals of d_b.
double binary_consistency(const BranchData& d_b, const BranchData& d_not_b,
                          const GluingPhase& theta_b, const GluingPhase& theta_not_b);

}  // namespace ctxkit
