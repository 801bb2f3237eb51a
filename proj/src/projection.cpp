#include "ctxkit/projection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ctxkit {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double reduce_phase(double radians) {
    double r = std::fmod(radians, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;  // fmod rounding at the seam
    return r;
}

double reduce_phase_signed(double radians) {
    double r = std::fmod(radians, kTwoPi);
    if (r > std::numbers::pi) r -= kTwoPi;
    if (r <= -std::numbers::pi) r += kTwoPi;
    return r;
}

RealizationAmplitude::RealizationAmplitude(double magnitude_in, double phase_in)
    : magnitude(magnitude_in), phase(reduce_phase(phase_in)) {
    if (!(magnitude >= 0.0))
        throw std::invalid_argument("RealizationAmplitude: magnitude must be non-negative");
}

std::complex<double> RealizationAmplitude::value() const {
    return std::polar(magnitude, phase);
}

GluingPhase::GluingPhase(double theta_in) : theta(reduce_phase(theta_in)) {}

void validate_branch_data(const BranchData& d, double tol) {
    auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0 && std::isfinite(x); };
    if (!in_unit(d.p_a) || !in_unit(d.p_b_given_a) || !in_unit(d.p_not_a) ||
        !in_unit(d.p_b_given_not_a))
        throw std::invalid_argument("BranchData: probabilities must lie in [0,1]");
    if (std::abs(d.p_a + d.p_not_a - 1.0) > tol)
        throw std::invalid_argument("BranchData: P(A) + P(notA) = " +
                                    std::to_string(d.p_a + d.p_not_a) + ", expected 1");
}

double ltp_predict(const BranchData& d) {
    validate_branch_data(d);
    return d.p_a * d.p_b_given_a + d.p_not_a * d.p_b_given_not_a;
}

RealizationWeights realization_weights(const BranchData& d) {
    validate_branch_data(d);
    return {std::sqrt(d.p_a * d.p_b_given_a), std::sqrt(d.p_not_a * d.p_b_given_not_a)};
}

ProjectionResult glued_projection(const BranchData& d, const GluingPhase& theta) {
    RealizationWeights r = realization_weights(d);
    std::complex<double> glued =
        RealizationAmplitude(r.r_a, 0.0).value() + RealizationAmplitude(r.r_not_a, theta.theta).value();
    double total = std::norm(glued);
    ProjectionResult out;
    out.probability = total;
    out.in_range = total >= -1e-12 && total <= 1.0 + 1e-12;
    return out;
}

double interference_term(const BranchData& d, const GluingPhase& theta) {
    RealizationWeights r = realization_weights(d);
    if (r.r_a == 0.0 || r.r_not_a == 0.0) return 0.0;
    return 2.0 * r.r_a * r.r_not_a * std::cos(theta.theta);
}

PhaseFit extract_phase(double observed, const BranchData& d, double tol) {
    RealizationWeights r = realization_weights(d);
    double cross = r.r_a * r.r_not_a;
    if (cross == 0.0)
        throw std::domain_error(
            "extract_phase: a branch weight is zero, so the cross term has no support and "
            "no phase can account for a deviation from the classical total");

    double cosine = (observed - ltp_predict(d)) / (2.0 * cross);
    PhaseFit fit;
    if (std::abs(cosine) > 1.0 + tol) {
        fit.feasible = false;
        fit.excess = std::abs(cosine) - 1.0;
        cosine = cosine > 0.0 ? 1.0 : -1.0;
    } else {
        cosine = std::clamp(cosine, -1.0, 1.0);
    }
    fit.theta = GluingPhase(std::acos(cosine));
    return fit;
}

double binary_consistency(const BranchData& d_b, const BranchData& d_not_b,
                          const GluingPhase& theta_b, const GluingPhase& theta_not_b) {
    validate_branch_data(d_b);
    validate_branch_data(d_not_b);
    if (std::abs(d_b.p_a - d_not_b.p_a) > 1e-9 ||
        std::abs((d_b.p_b_given_a + d_not_b.p_b_given_a) - 1.0) > 1e-9 ||
        std::abs((d_b.p_b_given_not_a + d_not_b.p_b_given_not_a) - 1.0) > 1e-9)
        throw std::invalid_argument(
            "binary_consistency: second branch data must carry the complementary conditionals");
    double total_b = glued_projection(d_b, theta_b).probability;
    double total_not_b = glued_projection(d_not_b, theta_not_b).probability;
    return std::abs(total_b + total_not_b - 1.0);
}

}  // namespace ctxkit
