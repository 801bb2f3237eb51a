#include "ctxkit/embedding.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <stdexcept>

namespace ctxkit {

namespace {

using Rat = boost::multiprecision::cpp_rational;
using RatVec = std::vector<Rat>;
using RatMat = std::vector<RatVec>;

std::vector<int> scenario_arities(const Scenario& s) {
    std::vector<int> a;
    a.reserve(s.observables.size());
    for (const auto& o : s.observables) a.push_back(o.arity);
    return a;
}

// Outcome of `assignment` restricted to context c, as a table index.
std::size_t restrict_assignment(const Scenario& s, const Context& c,
                                const GlobalAssignment& g) {
    std::vector<int> arities;
    std::vector<int> outcomes;
    arities.reserve(c.observables.size());
    for (const auto& oid : c.observables) {
        std::size_t pos = 0;
        while (pos < s.observables.size() && s.observables[pos].id != oid) ++pos;
        arities.push_back(s.observables[pos].arity);
        outcomes.push_back(g.outcomes[pos]);
    }
    return outcome_index(arities, outcomes);
}

void require_valid_behavior(const Behavior& b, double tol) {
    ValidationReport r = validate_behavior(b, tol);
    if (!r.ok())
        throw std::invalid_argument("invalid behavior: " + r.violations.front().message);
}

// Reduced row echelon form in place. Returns the pivot column of each
// produced row, in order.
std::vector<std::size_t> rref(RatMat& m) {
    std::vector<std::size_t> pivots;
    if (m.empty()) return pivots;
    const std::size_t rows = m.size(), cols = m[0].size();
    std::size_t row = 0;
    for (std::size_t col = 0; col < cols && row < rows; ++col) {
        std::size_t sel = row;
        while (sel < rows && m[sel][col] == 0) ++sel;
        if (sel == rows) continue;
        std::swap(m[sel], m[row]);
        Rat inv = m[row][col];
        for (std::size_t j = col; j < cols; ++j) m[row][j] /= inv;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == row || m[i][col] == 0) continue;
            Rat f = m[i][col];
            for (std::size_t j = col; j < cols; ++j) m[i][j] -= f * m[row][j];
        }
        pivots.push_back(col);
        ++row;
    }
    m.resize(row);  // drop zero rows
    return pivots;
}

std::size_t rank_of(RatMat m) { return rref(m).size(); }

// Solve the square system a x = rhs exactly. Returns false when singular.
bool solve_square(RatMat a, RatVec rhs, RatVec& x) {
    const std::size_t n = a.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t sel = col;
        while (sel < n && a[sel][col] == 0) ++sel;
        if (sel == n) return false;
        std::swap(a[sel], a[col]);
        std::swap(rhs[sel], rhs[col]);
        Rat inv = a[col][col];
        for (std::size_t j = col; j < n; ++j) a[col][j] /= inv;
        rhs[col] /= inv;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == col || a[i][col] == 0) continue;
            Rat f = a[i][col];
            for (std::size_t j = col; j < n; ++j) a[i][j] -= f * a[col][j];
            rhs[i] -= f * rhs[col];
        }
    }
    x = rhs;
    return true;
}

RatMat exact_cell_matrix(const Scenario& s, const std::vector<GlobalAssignment>& assignments) {
    std::size_t cells = 0;
    for (const auto& c : s.contexts) cells += s.table_size(c);
    RatMat v(cells, RatVec(assignments.size(), Rat(0)));
    std::size_t row0 = 0;
    for (const auto& c : s.contexts) {
        for (std::size_t j = 0; j < assignments.size(); ++j)
            v[row0 + restrict_assignment(s, c, assignments[j])][j] = 1;
        row0 += s.table_size(c);
    }
    return v;
}

RatVec exact_stacked_tables(const Behavior& b) {
    RatVec p;
    for (const auto& c : b.scenario.contexts) {
        const auto& t = b.table(c.id);
        for (double w : t.weights) p.emplace_back(w);  // dyadic doubles convert exactly
    }
    return p;
}

}  // namespace

std::map<std::string, int> GlobalAssignment::as_map(const Scenario& s) const {
    std::map<std::string, int> m;
    for (std::size_t i = 0; i < s.observables.size(); ++i) m[s.observables[i].id] = outcomes[i];
    return m;
}

std::size_t count_global_assignments(const Scenario& s) {
    std::size_t n = 1;
    for (const auto& o : s.observables) {
        if (o.arity <= 0) throw std::invalid_argument("observable arity must be positive");
        if (n > (std::numeric_limits<std::size_t>::max)() / static_cast<std::size_t>(o.arity))
            throw std::length_error("global assignment count overflows");
        n *= static_cast<std::size_t>(o.arity);
    }
    return n;
}

std::vector<GlobalAssignment> enumerate_global_assignments(const Scenario& s, std::size_t cap) {
    std::size_t total = count_global_assignments(s);
    if (total > cap)
        throw std::length_error(
            "global assignment count " + std::to_string(total) + " exceeds cap " +
            std::to_string(cap) +
            "; this enumeration is desk-scale, larger scenarios need a column-generation "
            "feasibility path");
    std::vector<int> arities = scenario_arities(s);
    std::vector<GlobalAssignment> out;
    out.reserve(total);
    for (std::size_t idx = 0; idx < total; ++idx)
        out.push_back({outcome_unindex(arities, idx)});
    return out;
}

lp::Matrix assignment_cell_matrix(const Scenario& s,
                                  const std::vector<GlobalAssignment>& assignments) {
    std::size_t cells = 0;
    for (const auto& c : s.contexts) cells += s.table_size(c);
    lp::Matrix v(cells, std::vector<double>(assignments.size(), 0.0));
    std::size_t row0 = 0;
    for (const auto& c : s.contexts) {
        for (std::size_t j = 0; j < assignments.size(); ++j)
            v[row0 + restrict_assignment(s, c, assignments[j])][j] = 1.0;
        row0 += s.table_size(c);
    }
    return v;
}

std::vector<double> stacked_tables(const Behavior& b) {
    std::vector<double> p;
    for (const auto& c : b.scenario.contexts) {
        const auto& t = b.table(c.id);
        p.insert(p.end(), t.weights.begin(), t.weights.end());
    }
    return p;
}

namespace {

CellFunctional functional_from_cells(const Scenario& s, const std::vector<double>& w,
                                     const std::vector<double>& p, double det_max,
                                     std::string kind) {
    CellFunctional f;
    f.kind = std::move(kind);
    std::size_t row0 = 0;
    for (const auto& c : s.contexts) {
        std::size_t n = s.table_size(c);
        f.coefficients[c.id] = std::vector<double>(w.begin() + row0, w.begin() + row0 + n);
        row0 += n;
    }
    f.value_on_behavior = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) f.value_on_behavior += w[i] * p[i];
    f.deterministic_max = det_max;
    f.margin = f.value_on_behavior - f.deterministic_max;
    return f;
}

// Witness for a disturbing behavior: +1 on the worst shared-marginal cell in
// one context, -1 on it in the other. Every global assignment scores zero.
CellFunctional disturbance_witness(const Behavior& b, const DisturbanceEntry& worst,
                                   const std::vector<double>& p) {
    const Scenario& s = b.scenario;
    std::size_t cells = p.size();
    std::vector<double> w(cells, 0.0);

    Distribution ma = marginal(b, worst.context_a, {worst.observable});
    Distribution mb = marginal(b, worst.context_b, {worst.observable});
    std::size_t k = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < ma.weights.size(); ++i) {
        double d = std::abs(ma.weights[i] - mb.weights[i]);
        if (d > best) {
            best = d;
            k = i;
        }
    }
    double sign = ma.weights[k] >= mb.weights[k] ? 1.0 : -1.0;

    std::size_t row0 = 0;
    for (const auto& c : s.contexts) {
        std::size_t n = s.table_size(c);
        double coef = 0.0;
        if (c.id == worst.context_a) coef = sign;
        if (c.id == worst.context_b) coef = -sign;
        if (coef != 0.0) {
            std::vector<int> arities = context_arities(s, c);
            std::size_t pos = 0;
            while (c.observables[pos] != worst.observable) ++pos;
            for (std::size_t idx = 0; idx < n; ++idx)
                if (outcome_unindex(arities, idx)[pos] == static_cast<int>(k))
                    w[row0 + idx] += coef;
        }
        row0 += n;
    }
    return functional_from_cells(s, w, p, 0.0, "disturbance");
}

}  // namespace

EmbeddingCertificate check_boolean_embedding(const Behavior& b, double tol, std::size_t cap) {
    require_valid_behavior(b, std::max(tol, kDefaultTol));
    EmbeddingCertificate cert;

    DisturbanceReport nd = check_no_disturbance(b, tol);
    std::vector<double> p = stacked_tables(b);
    if (!nd.pass) {
        // A global joint forces equal shared marginals, so a disturbing
        // behavior cannot be embeddable; report the worst mismatch as witness.
        cert.status = EmbeddingCertificate::Status::non_embeddable;
        cert.margin = -std::numeric_limits<double>::infinity();
        cert.disturbance = nd;
        auto worst = *std::max_element(
            nd.entries.begin(), nd.entries.end(),
            [](const auto& a, const auto& c) { return a.residual < c.residual; });
        cert.witness = disturbance_witness(b, worst, p);
        return cert;
    }

    std::vector<GlobalAssignment> assignments = enumerate_global_assignments(b.scenario, cap);
    lp::Matrix v = assignment_cell_matrix(b.scenario, assignments);
    lp::VertexFeasibility fb = lp::vertex_feasibility(v, p, tol);

    cert.margin = fb.margin;
    switch (fb.status) {
        case lp::VertexFeasibility::Status::feasible:
            cert.status = EmbeddingCertificate::Status::embeddable;
            break;
        case lp::VertexFeasibility::Status::infeasible:
            cert.status = EmbeddingCertificate::Status::non_embeddable;
            break;
        case lp::VertexFeasibility::Status::marginal:
            cert.status = EmbeddingCertificate::Status::marginal;
            break;
    }

    bool want_joint = cert.status != EmbeddingCertificate::Status::non_embeddable;
    bool want_witness = cert.status != EmbeddingCertificate::Status::embeddable;
    if (want_joint) {
        cert.joint = fb.weights;
        cert.joint_residual = fb.weight_residual;
    }
    if (want_witness)
        cert.witness = functional_from_cells(b.scenario, fb.witness, p, fb.witness_det_max,
                                             "farkas");
    return cert;
}

// ---------------------------------------------------------------------------
// Exact-rational oracle.
// ---------------------------------------------------------------------------

struct HullOracle::Impl {
    Scenario scenario;
    // Left-null-space basis of the assignment matrix: exact consistency checks.
    RatMat null_basis;
    // Facet functionals of the deterministic hull, normalized so that the
    // margin program's dual reads margin(p) = min_f f.p.
    RatMat facets;
};

HullOracle::HullOracle(const Scenario& s) : impl_(std::make_unique<Impl>()) {
    impl_->scenario = s;
    std::size_t n = count_global_assignments(s);
    if (n > 16) throw std::length_error("HullOracle: more than 16 global assignments");
    std::vector<GlobalAssignment> assignments = enumerate_global_assignments(s, 16);
    RatMat v = exact_cell_matrix(s, assignments);
    const std::size_t cells = v.size();
    if (cells > 64) throw std::length_error("HullOracle: more than 64 behavior cells");

    // Column space basis R of V: nonzero rows of rref(V^T), as cell vectors.
    RatMat vt(n, RatVec(cells));
    for (std::size_t i = 0; i < cells; ++i)
        for (std::size_t j = 0; j < n; ++j) vt[j][i] = v[i][j];
    RatMat vt_r = vt;
    rref(vt_r);
    RatMat r_cols = vt_r;  // r basis vectors of col-span(V), each of length `cells`
    const std::size_t r = r_cols.size();

    // Left null space of V = null space of V^T: for each cell index not a
    // pivot of rref(V^T)... the pivots of rref(V^T) live in cell-index space.
    {
        RatMat vt2 = vt;
        std::vector<std::size_t> piv = rref(vt2);
        std::set<std::size_t> pivset(piv.begin(), piv.end());
        for (std::size_t free_col = 0; free_col < cells; ++free_col) {
            if (pivset.count(free_col)) continue;
            RatVec y(cells, Rat(0));
            y[free_col] = 1;
            for (std::size_t k = 0; k < vt2.size(); ++k) y[piv[k]] = -vt2[k][free_col];
            impl_->null_basis.push_back(std::move(y));
        }
    }

    // kappa = V.1 in R-coordinates, and the inequality rows M_j = R^T V_j.
    RatVec kappa(cells, Rat(0));
    for (std::size_t i = 0; i < cells; ++i)
        for (std::size_t j = 0; j < n; ++j) kappa[i] += v[i][j];
    RatVec q(r, Rat(0));
    for (std::size_t k = 0; k < r; ++k)
        for (std::size_t i = 0; i < cells; ++i) q[k] += r_cols[k][i] * kappa[i];
    RatMat m_rows(n, RatVec(r, Rat(0)));
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < r; ++k)
            for (std::size_t i = 0; i < cells; ++i) m_rows[j][k] += r_cols[k][i] * v[i][j];

    // Enumerate the dual program's basic feasible solutions: every choice of
    // r-1 tight inequalities plus the normalization q.c = 1 that solves
    // uniquely and satisfies all the inequalities is a facet functional.
    std::set<RatVec> seen;
    std::vector<std::size_t> subset;  // tight inequality indices, size r-1
    auto try_subset = [&]() {
        RatMat a;
        a.reserve(r);
        for (std::size_t idx : subset) a.push_back(m_rows[idx]);
        a.push_back(q);
        RatVec rhs(r, Rat(0));
        rhs[r - 1] = 1;
        RatVec c;
        if (!solve_square(std::move(a), std::move(rhs), c)) return;
        for (std::size_t j = 0; j < n; ++j) {
            Rat s(0);
            for (std::size_t k = 0; k < r; ++k) s += m_rows[j][k] * c[k];
            if (s < 0) return;
        }
        if (!seen.insert(c).second) return;
        RatVec f(cells, Rat(0));
        for (std::size_t i = 0; i < cells; ++i)
            for (std::size_t k = 0; k < r; ++k) f[i] += r_cols[k][i] * c[k];
        impl_->facets.push_back(std::move(f));
    };
    std::function<void(std::size_t)> rec = [&](std::size_t start) {
        if (subset.size() == r - 1) {
            try_subset();
            return;
        }
        for (std::size_t j = start; j < n; ++j) {
            if (n - j < (r - 1) - subset.size()) break;
            subset.push_back(j);
            rec(j + 1);
            subset.pop_back();
        }
    };
    rec(0);
    if (impl_->facets.empty())
        throw std::runtime_error("HullOracle: dual program has no basic feasible solution");
}

HullOracle::~HullOracle() = default;
HullOracle::HullOracle(HullOracle&&) noexcept = default;
HullOracle& HullOracle::operator=(HullOracle&&) noexcept = default;

std::size_t HullOracle::facet_count() const { return impl_->facets.size(); }

HullMembership HullOracle::check(const Behavior& b) const {
    RatVec p = exact_stacked_tables(b);
    HullMembership out;
    for (const auto& y : impl_->null_basis) {
        Rat s(0);
        for (std::size_t i = 0; i < p.size(); ++i) s += y[i] * p[i];
        if (s != 0) {
            out.member = false;
            out.in_span = false;
            out.margin = -std::numeric_limits<double>::infinity();
            return out;
        }
    }
    bool first = true;
    Rat best(0);
    for (const auto& f : impl_->facets) {
        Rat s(0);
        for (std::size_t i = 0; i < p.size(); ++i) s += f[i] * p[i];
        if (first || s < best) {
            best = s;
            first = false;
        }
    }
    out.in_span = true;
    out.margin = best.convert_to<double>();
    out.member = best >= 0;
    return out;
}

HullMembership deterministic_hull_membership(const Behavior& b) {
    return HullOracle(b.scenario).check(b);
}

HullMembership hull_membership_by_basis_enumeration(const Behavior& b) {
    const Scenario& s = b.scenario;
    std::size_t n = count_global_assignments(s);
    if (n > 12) throw std::length_error("basis enumeration oracle: too many assignments");
    std::vector<GlobalAssignment> assignments = enumerate_global_assignments(s, 16);
    RatMat v = exact_cell_matrix(s, assignments);
    const std::size_t cells = v.size();
    if (cells > 64) throw std::length_error("basis enumeration oracle: too many cells");
    RatVec p = exact_stacked_tables(b);

    // Columns of the margin program: the n assignment columns plus kappa.
    RatMat cols(n + 1, RatVec(cells, Rat(0)));
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < cells; ++i) cols[j][i] = v[i][j];
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < cells; ++i) cols[n][i] += v[i][j];

    // Consistency and rank.
    RatMat sys(cells, RatVec(n + 1));
    for (std::size_t i = 0; i < cells; ++i)
        for (std::size_t j = 0; j <= n; ++j) sys[i][j] = cols[j][i];
    std::size_t r = rank_of(sys);
    RatMat sys_aug = sys;
    for (std::size_t i = 0; i < cells; ++i) sys_aug[i].push_back(p[i]);
    HullMembership out;
    if (rank_of(sys_aug) != r) {
        out.member = false;
        out.in_span = false;
        out.margin = -std::numeric_limits<double>::infinity();
        return out;
    }

    bool any = false;
    Rat best(0);
    std::vector<std::size_t> subset;
    // Solve the overdetermined system restricted to the chosen columns by
    // elimination; consistent + unique -> one basic solution of the program.
    auto try_basis = [&]() {
        const std::size_t k = subset.size();
        RatMat a(cells, RatVec(k + 1, Rat(0)));
        for (std::size_t i = 0; i < cells; ++i) {
            for (std::size_t jj = 0; jj < k; ++jj) a[i][jj] = cols[subset[jj]][i];
            a[i][k] = p[i];
        }
        std::vector<std::size_t> piv = rref(a);
        if (!piv.empty() && piv.back() == k) return;  // inconsistent
        if (piv.size() != k) return;                  // dependent columns
        RatVec x(k, Rat(0));
        for (std::size_t row = 0; row < piv.size(); ++row) x[piv[row]] = a[row][k];
        Rat m_val(0);
        for (std::size_t jj = 0; jj < k; ++jj) {
            if (subset[jj] == n)
                m_val = x[jj];  // the free margin variable
            else if (x[jj] < 0)
                return;  // nu must stay non-negative
        }
        if (!any || m_val > best) {
            best = m_val;
            any = true;
        }
    };
    std::function<void(std::size_t)> rec = [&](std::size_t start) {
        if (subset.size() == r) {
            try_basis();
            return;
        }
        for (std::size_t j = start; j <= n; ++j) {
            subset.push_back(j);
            rec(j + 1);
            subset.pop_back();
        }
    };
    rec(0);
    if (!any) {
        out.member = false;
        out.in_span = true;
        out.margin = -std::numeric_limits<double>::infinity();
        return out;
    }
    out.in_span = true;
    out.margin = best.convert_to<double>();
    out.member = best >= 0;
    return out;
}

}  // namespace ctxkit
