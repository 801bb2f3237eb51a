#pragma once

#include <cstddef>
#include <vector>

namespace ctxkit::lp {

/// Dense matrix in row-major form; rows[i][j] is the coefficient of
/// variable j in constraint i.
using Matrix = std::vector<std::vector<double>>;

struct LpResult {
    bool feasible = false;
    bool bounded = true;
    std::vector<double> x;  // structural variable values at the optimum
    std::vector<double> y;  // row duals at the optimum, or a Farkas vector when infeasible
    double objective = 0.0;
};

/// Solve max c.x subject to A x = b, x >= 0 by a two-phase tableau simplex.
/// When infeasible, `y` satisfies y.A_j >= 0 for every column j and y.b < 0.
LpResult solve_equality_lp(const Matrix& a, const std::vector<double>& b,
                           const std::vector<double>& c, double feas_tol = 1e-9);

/// Result of testing whether p lies in the convex hull of the columns of V.
///
/// The signed margin is the optimum of
///     max m  s.t.  V nu + (V.1) m = p,  nu >= 0,
/// i.e. the largest m such that p = V mu with every weight mu_j >= m.
/// Positive margin means p is in the relative interior of the hull, zero
/// means on the boundary, negative means outside (within the linear span).
struct VertexFeasibility {
    enum class Status { feasible, infeasible, marginal };

    Status status = Status::infeasible;
    bool in_span = true;   // false when p is not even in the linear span of V
    double margin = 0.0;   // the signed margin above; -inf when !in_span

    // Candidate weights over the columns (valid certificate when margin >= 0;
    // best effort, clipped at zero, otherwise). residual is the max-abs
    // reproduction error of these weights.
    std::vector<double> weights;
    double weight_residual = 0.0;

    // Separating functional over the cells: witness.p exceeds the maximum of
    // witness over the columns whenever margin < 0. Always populated from the
    // dual solution; only separating when the margin is negative.
    std::vector<double> witness;
    double witness_value = 0.0;    // witness . p
    double witness_det_max = 0.0;  // max_j witness . V_j
};

/// Decide hull membership of p against the columns of V with the signed
/// margin defined above. `tol` splits the tri-state: margin > tol feasible,
/// margin < -tol infeasible, otherwise marginal.
VertexFeasibility vertex_feasibility(const Matrix& v_columns_by_cell,
                                     const std::vector<double>& p, double tol = 1e-9);

}  // namespace ctxkit::lp
