#include "ctxkit/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ctxkit::lp {

namespace {

constexpr double kPivotEps = 1e-11;
constexpr double kCostEps = 1e-10;

// Full-tableau simplex state. Columns: n structural, m artificial, then RHS.
// The artificial block doubles as B^{-1}, which is how duals are read out.
struct Tableau {
    std::size_t rows = 0;
    std::size_t cols = 0;  // structural + artificial
    std::vector<std::vector<double>> t;
    std::vector<std::size_t> basis;
    std::size_t n_struct = 0;

    double& at(std::size_t i, std::size_t j) { return t[i][j]; }
    double rhs(std::size_t i) const { return t[i][cols]; }

    void pivot(std::size_t prow, std::size_t pcol) {
        double inv = 1.0 / t[prow][pcol];
        for (std::size_t j = 0; j <= cols; ++j) t[prow][j] *= inv;
        t[prow][pcol] = 1.0;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == prow) continue;
            double f = t[i][pcol];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= cols; ++j) t[i][j] -= f * t[prow][j];
            t[i][pcol] = 0.0;
        }
        basis[prow] = pcol;
    }
};

// Reduced cost of column j under costs c (indexed over all tableau columns).
double reduced_cost(const Tableau& tab, const std::vector<double>& cost, std::size_t j) {
    double r = cost[j];
    for (std::size_t i = 0; i < tab.rows; ++i) r -= cost[tab.basis[i]] * tab.t[i][j];
    return r;
}

double objective_value(const Tableau& tab, const std::vector<double>& cost) {
    double z = 0.0;
    for (std::size_t i = 0; i < tab.rows; ++i) z += cost[tab.basis[i]] * tab.rhs(i);
    return z;
}

// Run the simplex to optimality for max cost.x over the current basis.
// `allowed(j)` gates which columns may enter. Returns false on unbounded.
template <typename Allowed>
bool optimize(Tableau& tab, const std::vector<double>& cost, Allowed allowed) {
    const std::size_t max_iter = 200 * (tab.rows + tab.cols) + 2000;
    const std::size_t bland_after = 20 * (tab.rows + tab.cols) + 200;
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        bool bland = iter >= bland_after;
        std::size_t enter = tab.cols;
        double best = kCostEps;
        for (std::size_t j = 0; j < tab.cols; ++j) {
            if (!allowed(j)) continue;
            double r = reduced_cost(tab, cost, j);
            if (r > best) {
                enter = j;
                if (bland) break;  // first improving index
                best = r;
            }
        }
        if (enter == tab.cols) return true;  // optimal

        std::size_t leave = tab.rows;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < tab.rows; ++i) {
            double a = tab.t[i][enter];
            if (a <= kPivotEps) continue;
            double ratio = tab.rhs(i) / a;
            if (ratio < best_ratio - kPivotEps ||
                (ratio < best_ratio + kPivotEps &&
                 (leave == tab.rows || tab.basis[i] < tab.basis[leave]))) {
                best_ratio = ratio;
                leave = i;
            }
        }
        if (leave == tab.rows) return false;  // unbounded
        tab.pivot(leave, enter);
    }
    throw std::runtime_error("simplex: iteration limit reached");
}

}  // namespace

LpResult solve_equality_lp(const Matrix& a, const std::vector<double>& b,
                           const std::vector<double>& c, double feas_tol) {
    const std::size_t m = a.size();
    const std::size_t n = m == 0 ? c.size() : a[0].size();
    if (b.size() != m || c.size() != n)
        throw std::invalid_argument("solve_equality_lp: dimension mismatch");

    Tableau tab;
    tab.rows = m;
    tab.n_struct = n;
    tab.cols = n + m;
    tab.basis.resize(m);
    tab.t.assign(m, std::vector<double>(tab.cols + 1, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
        double sign = b[i] < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < n; ++j) tab.t[i][j] = sign * a[i][j];
        tab.t[i][n + i] = 1.0;
        tab.t[i][tab.cols] = sign * b[i];
        tab.basis[i] = n + i;
    }
    // Row-sign bookkeeping so duals refer to the original orientation.
    std::vector<double> row_sign(m, 1.0);
    for (std::size_t i = 0; i < m; ++i) row_sign[i] = b[i] < 0.0 ? -1.0 : 1.0;

    // Phase 1: max -(sum of artificials).
    std::vector<double> cost1(tab.cols, 0.0);
    for (std::size_t i = 0; i < m; ++i) cost1[n + i] = -1.0;
    if (!optimize(tab, cost1, [](std::size_t) { return true; }))
        throw std::runtime_error("simplex: phase 1 unbounded");

    LpResult out;
    double infeas = -objective_value(tab, cost1);
    if (infeas > feas_tol) {
        out.feasible = false;
        // Farkas vector from the phase-1 duals: y.A_j >= 0 for all j, y.b < 0.
        out.y.assign(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            double r_art = reduced_cost(tab, cost1, n + i);
            out.y[i] = row_sign[i] * (-1.0 - r_art);
        }
        out.objective = 0.0;
        return out;
    }

    // Drive leftover artificials out of the basis where a structural pivot exists.
    for (std::size_t i = 0; i < m; ++i) {
        if (tab.basis[i] < n) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (std::abs(tab.t[i][j]) > 1e-8) {
                tab.pivot(i, j);
                break;
            }
        }
    }

    // Phase 2: artificial columns may not re-enter.
    std::vector<double> cost2(tab.cols, 0.0);
    for (std::size_t j = 0; j < n; ++j) cost2[j] = c[j];
    bool bounded = optimize(tab, cost2, [&](std::size_t j) { return j < n; });

    out.feasible = true;
    out.bounded = bounded;
    out.x.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        if (tab.basis[i] < n) out.x[tab.basis[i]] = tab.rhs(i);
    out.y.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double r_art = reduced_cost(tab, cost2, n + i);
        out.y[i] = row_sign[i] * (-r_art);
    }
    out.objective = objective_value(tab, cost2);
    return out;
}

VertexFeasibility vertex_feasibility(const Matrix& v, const std::vector<double>& p, double tol) {
    const std::size_t cells = v.size();
    if (cells == 0 || cells != p.size())
        throw std::invalid_argument("vertex_feasibility: dimension mismatch");
    const std::size_t n = v[0].size();
    if (n == 0) throw std::invalid_argument("vertex_feasibility: no columns");

    // kappa = V.1 appears as the column of the free margin variable m = m+ - m-.
    std::vector<double> kappa(cells, 0.0);
    for (std::size_t i = 0; i < cells; ++i)
        for (std::size_t j = 0; j < n; ++j) kappa[i] += v[i][j];

    Matrix a(cells, std::vector<double>(n + 2, 0.0));
    for (std::size_t i = 0; i < cells; ++i) {
        for (std::size_t j = 0; j < n; ++j) a[i][j] = v[i][j];
        a[i][n] = kappa[i];
        a[i][n + 1] = -kappa[i];
    }
    std::vector<double> c(n + 2, 0.0);
    c[n] = 1.0;
    c[n + 1] = -1.0;

    LpResult lp = solve_equality_lp(a, p, c, tol);

    VertexFeasibility fb;
    auto fill_witness = [&](const std::vector<double>& y) {
        // The separating direction is -y: (-y).V_j <= 0 while (-y).p = -y.p.
        fb.witness.assign(cells, 0.0);
        for (std::size_t i = 0; i < cells; ++i) fb.witness[i] = -y[i];
        fb.witness_value = 0.0;
        for (std::size_t i = 0; i < cells; ++i) fb.witness_value += fb.witness[i] * p[i];
        fb.witness_det_max = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < cells; ++i) s += fb.witness[i] * v[i][j];
            fb.witness_det_max = std::max(fb.witness_det_max, s);
        }
    };

    if (!lp.feasible) {
        fb.in_span = false;
        fb.status = VertexFeasibility::Status::infeasible;
        fb.margin = -std::numeric_limits<double>::infinity();
        fill_witness(lp.y);
        return fb;
    }
    if (!lp.bounded) throw std::runtime_error("vertex_feasibility: margin LP unbounded");

    fb.in_span = true;
    fb.margin = lp.objective;
    fb.status = fb.margin > tol    ? VertexFeasibility::Status::feasible
                : fb.margin < -tol ? VertexFeasibility::Status::infeasible
                                   : VertexFeasibility::Status::marginal;

    double m_star = lp.objective;
    fb.weights.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) fb.weights[j] = std::max(lp.x[j] + m_star, 0.0);
    fb.weight_residual = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += v[i][j] * fb.weights[j];
        fb.weight_residual = std::max(fb.weight_residual, std::abs(s - p[i]));
    }
    fill_witness(lp.y);
    return fb;
}

}  // namespace ctxkit::lp
