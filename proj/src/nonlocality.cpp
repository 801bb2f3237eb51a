#include "ctxkit/nonlocality.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ctxkit/simplex.hpp"

namespace ctxkit {

const Distribution& BipartiteBehavior::table(int x, int y) const {
    auto it = tables.find({x, y});
    if (it == tables.end())
        throw std::invalid_argument("no table for settings (" + std::to_string(x) + "," +
                                    std::to_string(y) + ")");
    return it->second;
}

ValidationReport validate_bipartite(const BipartiteBehavior& b, double tol) {
    ValidationReport report;
    auto add = [&](std::string code, std::string where, std::string msg) {
        report.violations.push_back({std::move(code), std::move(where), std::move(msg)});
    };
    if (b.n_x < 1 || b.n_y < 1 || b.n_a < 2 || b.n_b < 2)
        add("bad-shape", "behavior", "settings must be >= 1 and outcomes >= 2");
    for (int x = 0; x < b.n_x; ++x)
        for (int y = 0; y < b.n_y; ++y) {
            std::string where =
                "table:" + std::to_string(x) + "," + std::to_string(y);
            auto it = b.tables.find({x, y});
            if (it == b.tables.end()) {
                add("missing-table", where, "no table for this setting pair");
                continue;
            }
            const auto& d = it->second;
            if (d.weights.size() != static_cast<std::size_t>(b.n_a * b.n_b)) {
                add("table-size", where, "table has wrong length");
                continue;
            }
            for (double w : d.weights)
                if (!(w >= 0.0) || !std::isfinite(w))
                    add("negative-weight", where, "weights must be finite and non-negative");
            if (std::abs(d.sum() - 1.0) > tol)
                add("unnormalized", where, "table sums to " + std::to_string(d.sum()));
        }
    return report;
}

NoSignallingReport check_no_signalling(const BipartiteBehavior& b, double tol) {
    NoSignallingReport report;
    auto alice_marginal = [&](int x, int y, int a) {
        double s = 0.0;
        const auto& t = b.table(x, y).weights;
        for (int bb = 0; bb < b.n_b; ++bb) s += t[static_cast<std::size_t>(a * b.n_b + bb)];
        return s;
    };
    auto bob_marginal = [&](int x, int y, int bb) {
        double s = 0.0;
        const auto& t = b.table(x, y).weights;
        for (int a = 0; a < b.n_a; ++a) s += t[static_cast<std::size_t>(a * b.n_b + bb)];
        return s;
    };

    NoSignallingEntry worst_a{}, worst_b{};
    for (int x = 0; x < b.n_x; ++x)
        for (int a = 0; a < b.n_a; ++a)
            for (int y1 = 0; y1 < b.n_y; ++y1)
                for (int y2 = y1 + 1; y2 < b.n_y; ++y2) {
                    double r = std::abs(alice_marginal(x, y1, a) - alice_marginal(x, y2, a));
                    if (r > worst_a.residual) worst_a = {"A", x, a, y1, y2, r};
                }
    for (int y = 0; y < b.n_y; ++y)
        for (int bb = 0; bb < b.n_b; ++bb)
            for (int x1 = 0; x1 < b.n_x; ++x1)
                for (int x2 = x1 + 1; x2 < b.n_x; ++x2) {
                    double r = std::abs(bob_marginal(x1, y, bb) - bob_marginal(x2, y, bb));
                    if (r > worst_b.residual) worst_b = {"B", y, bb, x1, x2, r};
                }
    report.worst = {worst_a, worst_b};
    report.max_residual = std::max(worst_a.residual, worst_b.residual);
    report.pass = report.max_residual <= tol;
    return report;
}

BipartiteBehavior LocalModel::induced(int n_x, int n_y, int n_a, int n_b) const {
    BipartiteBehavior out;
    out.n_x = n_x;
    out.n_y = n_y;
    out.n_a = n_a;
    out.n_b = n_b;
    for (int x = 0; x < n_x; ++x)
        for (int y = 0; y < n_y; ++y) {
            Distribution d;
            d.weights.assign(static_cast<std::size_t>(n_a * n_b), 0.0);
            for (const auto& s : strategies)
                d.weights[static_cast<std::size_t>(s.a_of_x[x] * n_b + s.b_of_y[y])] += s.weight;
            out.tables[{x, y}] = std::move(d);
        }
    return out;
}

namespace {

struct StrategySpace {
    int n_x, n_y, n_a, n_b;
    std::size_t count_a, count_b;  // |A|^|X| and |B|^|Y|

    std::vector<int> a_map(std::size_t idx) const {
        std::vector<int> f(n_x);
        for (int x = n_x - 1; x >= 0; --x) {
            f[x] = static_cast<int>(idx % n_a);
            idx /= n_a;
        }
        return f;
    }
    std::vector<int> b_map(std::size_t idx) const {
        std::vector<int> g(n_y);
        for (int y = n_y - 1; y >= 0; --y) {
            g[y] = static_cast<int>(idx % n_b);
            idx /= n_b;
        }
        return g;
    }
};

std::vector<double> stacked_bipartite(const BipartiteBehavior& b) {
    std::vector<double> p;
    for (int x = 0; x < b.n_x; ++x)
        for (int y = 0; y < b.n_y; ++y) {
            const auto& t = b.table(x, y).weights;
            p.insert(p.end(), t.begin(), t.end());
        }
    return p;
}

// Correlator-form canonicalization for the 2,2,2,2 shape: express the raw
// dual functional as alpha + beta_x E^A_x + gamma_y E^B_y + delta_xy E_xy
// and rescale so max|delta| = 1. Constant terms shift the value and the
// classical bound equally, so the margin is unaffected; dropping them makes
// the reported inequality read in CHSH units.
void canonicalize_2222(BellWitness& w, const BipartiteBehavior& b) {
    std::vector<std::vector<double>> delta(2, std::vector<double>(2, 0.0));
    std::vector<double> beta(2, 0.0), gamma(2, 0.0);
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
            const auto& cells = w.cell_coefficients.at({x, y});
            for (int a = 0; a < 2; ++a)
                for (int bb = 0; bb < 2; ++bb) {
                    double c = cells[static_cast<std::size_t>(a * 2 + bb)];
                    delta[x][y] += 0.25 * ((a ^ bb) ? -c : c);
                    beta[x] += 0.25 * (a ? -c : c);
                    gamma[y] += 0.25 * (bb ? -c : c);
                }
        }
    double scale = 0.0;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) scale = std::max(scale, std::abs(delta[x][y]));
    if (scale <= 0.0) return;  // degenerate functional; leave the raw form

    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
            delta[x][y] /= scale;
            beta[x] /= scale;
            gamma[y] /= scale;
        }
    // Rebuild cell coefficients from the scaled marginal + correlator parts.
    // A party marginal term shows up in both of the other party's tables, so
    // its per-cell share is half its functional coefficient.
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
            auto& cells = w.cell_coefficients[{x, y}];
            for (int a = 0; a < 2; ++a)
                for (int bb = 0; bb < 2; ++bb)
                    cells[static_cast<std::size_t>(a * 2 + bb)] =
                        delta[x][y] * ((a ^ bb) ? -1.0 : 1.0) +
                        0.5 * beta[x] * (a ? -1.0 : 1.0) + 0.5 * gamma[y] * (bb ? -1.0 : 1.0);
        }
    w.correlator = delta;

    // Recompute value and bound in the canonical units.
    w.value_on_behavior = 0.0;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
            const auto& cells = w.cell_coefficients.at({x, y});
            const auto& t = b.table(x, y).weights;
            for (std::size_t i = 0; i < t.size(); ++i)
                w.value_on_behavior += cells[i] * t[i];
        }
    StrategySpace sp{2, 2, 2, 2, 4, 4};
    double best = -1e300;
    for (std::size_t ia = 0; ia < sp.count_a; ++ia)
        for (std::size_t ib = 0; ib < sp.count_b; ++ib) {
            std::vector<int> f = sp.a_map(ia), g = sp.b_map(ib);
            double v = 0.0;
            for (int x = 0; x < 2; ++x)
                for (int y = 0; y < 2; ++y)
                    v += w.cell_coefficients.at({x, y})[static_cast<std::size_t>(f[x] * 2 +
                                                                                 g[y])];
            best = std::max(best, v);
        }
    w.classical_bound = best;
    w.margin = w.value_on_behavior - w.classical_bound;
}

}  // namespace

LocalDecomposition local_decomposition(const BipartiteBehavior& b, double tol,
                                       std::size_t vertex_cap) {
    ValidationReport valid = validate_bipartite(b, std::max(tol, kDefaultTol));
    if (!valid.ok())
        throw std::invalid_argument("local_decomposition: " + valid.violations.front().message);

    StrategySpace sp;
    sp.n_x = b.n_x;
    sp.n_y = b.n_y;
    sp.n_a = b.n_a;
    sp.n_b = b.n_b;
    sp.count_a = 1;
    for (int x = 0; x < b.n_x; ++x) sp.count_a *= static_cast<std::size_t>(b.n_a);
    sp.count_b = 1;
    for (int y = 0; y < b.n_y; ++y) sp.count_b *= static_cast<std::size_t>(b.n_b);
    std::size_t n_vertices = sp.count_a * sp.count_b;
    if (n_vertices > vertex_cap)
        throw std::length_error("local_decomposition: " + std::to_string(n_vertices) +
                                " deterministic strategies exceed the cap");

    const std::size_t cells =
        static_cast<std::size_t>(b.n_x * b.n_y) * static_cast<std::size_t>(b.n_a * b.n_b);
    lp::Matrix v(cells, std::vector<double>(n_vertices, 0.0));
    for (std::size_t ia = 0; ia < sp.count_a; ++ia) {
        std::vector<int> f = sp.a_map(ia);
        for (std::size_t ib = 0; ib < sp.count_b; ++ib) {
            std::vector<int> g = sp.b_map(ib);
            std::size_t col = ia * sp.count_b + ib;
            std::size_t row0 = 0;
            for (int x = 0; x < b.n_x; ++x)
                for (int y = 0; y < b.n_y; ++y) {
                    v[row0 + static_cast<std::size_t>(f[x] * b.n_b + g[y])][col] = 1.0;
                    row0 += static_cast<std::size_t>(b.n_a * b.n_b);
                }
        }
    }
    std::vector<double> p = stacked_bipartite(b);
    lp::VertexFeasibility fb = lp::vertex_feasibility(v, p, tol);

    LocalDecomposition out;
    out.margin = fb.margin;
    switch (fb.status) {
        case lp::VertexFeasibility::Status::feasible:
            out.status = LocalDecomposition::Status::local;
            break;
        case lp::VertexFeasibility::Status::infeasible:
            out.status = LocalDecomposition::Status::nonlocal;
            break;
        case lp::VertexFeasibility::Status::marginal:
            out.status = LocalDecomposition::Status::marginal;
            break;
    }

    if (out.status != LocalDecomposition::Status::nonlocal) {
        LocalModel model;
        for (std::size_t col = 0; col < n_vertices; ++col) {
            if (fb.weights[col] <= 1e-15) continue;
            LocalModel::Strategy s;
            s.a_of_x = sp.a_map(col / sp.count_b);
            s.b_of_y = sp.b_map(col % sp.count_b);
            s.weight = fb.weights[col];
            model.strategies.push_back(std::move(s));
        }
        out.model_residual = fb.weight_residual;
        out.model = std::move(model);
    }
    if (out.status != LocalDecomposition::Status::local) {
        BellWitness w;
        std::size_t row0 = 0;
        for (int x = 0; x < b.n_x; ++x)
            for (int y = 0; y < b.n_y; ++y) {
                std::vector<double> cells_xy(
                    fb.witness.begin() + static_cast<std::ptrdiff_t>(row0),
                    fb.witness.begin() +
                        static_cast<std::ptrdiff_t>(row0 + static_cast<std::size_t>(b.n_a * b.n_b)));
                w.cell_coefficients[{x, y}] = std::move(cells_xy);
                row0 += static_cast<std::size_t>(b.n_a * b.n_b);
            }
        w.value_on_behavior = fb.witness_value;
        w.classical_bound = fb.witness_det_max;
        w.margin = w.value_on_behavior - w.classical_bound;
        if (b.n_x == 2 && b.n_y == 2 && b.n_a == 2 && b.n_b == 2) canonicalize_2222(w, b);
        out.witness = std::move(w);
    }
    return out;
}

double chsh_value(const BipartiteBehavior& b) {
    if (b.n_x != 2 || b.n_y != 2 || b.n_a != 2 || b.n_b != 2)
        throw std::invalid_argument("chsh_value: behavior is not 2,2,2,2");
    auto corr = [&](int x, int y) {
        const auto& t = b.table(x, y).weights;
        double e = 0.0;
        for (int a = 0; a < 2; ++a)
            for (int bb = 0; bb < 2; ++bb)
                e += ((a ^ bb) ? -1.0 : 1.0) * t[static_cast<std::size_t>(a * 2 + bb)];
        return e;
    };
    return corr(0, 0) + corr(0, 1) + corr(1, 0) - corr(1, 1);
}

Behavior to_behavior(const BipartiteBehavior& b) {
    Behavior out;
    for (int x = 0; x < b.n_x; ++x)
        out.scenario.observables.push_back({"A" + std::to_string(x), b.n_a});
    for (int y = 0; y < b.n_y; ++y)
        out.scenario.observables.push_back({"B" + std::to_string(y), b.n_b});
    for (int x = 0; x < b.n_x; ++x)
        for (int y = 0; y < b.n_y; ++y) {
            Context c;
            c.id = std::to_string(x) + "," + std::to_string(y);
            c.observables = {"A" + std::to_string(x), "B" + std::to_string(y)};
            out.scenario.contexts.push_back(c);
            out.tables[c.id] = b.table(x, y);
        }
    return out;
}

}  // namespace ctxkit
