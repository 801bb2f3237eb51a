#include "ctxkit/intervention.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "ctxkit/bookkeeping.hpp"

namespace ctxkit {

namespace {

std::vector<Cx> matvec(const CxMatrix& m, const std::vector<Cx>& v) {
    std::vector<Cx> out(m.size(), Cx(0));
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) out[i] += m[i][j] * v[j];
    return out;
}

CxMatrix matmul(const CxMatrix& a, const CxMatrix& b) {
    const std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
    CxMatrix out(n, std::vector<Cx>(m, Cx(0)));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < k; ++l) {
            if (a[i][l] == Cx(0)) continue;
            for (std::size_t j = 0; j < m; ++j) out[i][j] += a[i][l] * b[l][j];
        }
    return out;
}

CxMatrix adjoint(const CxMatrix& m) {
    const std::size_t n = m.size(), k = m.empty() ? 0 : m[0].size();
    CxMatrix out(k, std::vector<Cx>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) out[j][i] = std::conj(m[i][j]);
    return out;
}

bool is_square(const CxMatrix& m, std::size_t d) {
    if (m.size() != d) return false;
    for (const auto& row : m)
        if (row.size() != d) return false;
    return true;
}

}  // namespace

void validate_state(const SharedState& x, double tol) {
    if (x.kind == StateKind::stochastic) {
        if (x.probabilities.empty())
            throw std::invalid_argument("state: empty probability vector");
        double s = 0.0;
        for (double p : x.probabilities) {
            if (!(p >= 0.0) || !std::isfinite(p))
                throw std::invalid_argument("state: probabilities must be non-negative");
            s += p;
        }
        if (std::abs(s - 1.0) > tol)
            throw std::invalid_argument("state: probabilities sum to " + std::to_string(s));
    } else {
        if (x.amplitudes.empty()) throw std::invalid_argument("state: empty amplitude vector");
        double n2 = 0.0;
        for (const Cx& a : x.amplitudes) n2 += std::norm(a);
        if (std::abs(n2 - 1.0) > 2 * tol)
            throw std::invalid_argument("state: squared norm is " + std::to_string(n2));
    }
}

std::size_t InterventionOp::dimension() const {
    return kind == StateKind::stochastic ? stochastic_action.size() : unitary.size();
}

std::size_t InterventionOp::outcome_count() const {
    return kind == StateKind::stochastic ? stochastic_action.size() : projectors.size();
}

void validate_op(const InterventionOp& op, double tol) {
    if (op.kind == StateKind::stochastic) {
        const std::size_t d = op.stochastic_action.size();
        if (d == 0) throw std::invalid_argument("op '" + op.id + "': empty action");
        for (const auto& row : op.stochastic_action)
            if (row.size() != d)
                throw std::invalid_argument("op '" + op.id + "': action is not square");
        for (std::size_t j = 0; j < d; ++j) {
            double col = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                double e = op.stochastic_action[i][j];
                if (!(e >= 0.0) || !std::isfinite(e))
                    throw std::invalid_argument("op '" + op.id + "': negative entry");
                col += e;
            }
            if (std::abs(col - 1.0) > tol)
                throw std::invalid_argument("op '" + op.id + "': column " + std::to_string(j) +
                                            " sums to " + std::to_string(col));
        }
        return;
    }

    const std::size_t d = op.unitary.size();
    if (d == 0 || !is_square(op.unitary, d))
        throw std::invalid_argument("op '" + op.id + "': unitary is not square");
    CxMatrix should_be_id = matmul(adjoint(op.unitary), op.unitary);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            Cx want = i == j ? Cx(1) : Cx(0);
            if (std::abs(should_be_id[i][j] - want) > tol)
                throw std::invalid_argument("op '" + op.id + "': unitarity residual too large");
        }
    if (op.projectors.empty())
        throw std::invalid_argument("op '" + op.id + "': no outcome projectors");
    CxMatrix sum(d, std::vector<Cx>(d, Cx(0)));
    for (std::size_t k = 0; k < op.projectors.size(); ++k) {
        const CxMatrix& p = op.projectors[k];
        if (!is_square(p, d))
            throw std::invalid_argument("op '" + op.id + "': projector has wrong shape");
        CxMatrix pp = matmul(p, p);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                if (std::abs(pp[i][j] - p[i][j]) > 10 * tol)
                    throw std::invalid_argument("op '" + op.id + "': projector not idempotent");
                if (std::abs(p[i][j] - std::conj(p[j][i])) > tol)
                    throw std::invalid_argument("op '" + op.id + "': projector not hermitian");
                sum[i][j] += p[i][j];
            }
        for (std::size_t l = k + 1; l < op.projectors.size(); ++l) {
            CxMatrix cross = matmul(p, op.projectors[l]);
            for (const auto& row : cross)
                for (const Cx& e : row)
                    if (std::abs(e) > 10 * tol)
                        throw std::invalid_argument("op '" + op.id +
                                                    "': projectors not orthogonal");
        }
    }
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            Cx want = i == j ? Cx(1) : Cx(0);
            if (std::abs(sum[i][j] - want) > 10 * tol)
                throw std::invalid_argument("op '" + op.id + "': projectors not complete");
        }
}

const InterventionOp& InterventionModel::op(const std::string& id) const {
    auto it = ops.find(id);
    if (it == ops.end()) throw std::invalid_argument("unknown intervention '" + id + "'");
    return it->second;
}

void validate_model(const InterventionModel& m, double tol) {
    validate_state(m.initial, tol);
    for (const auto& [id, op] : m.ops) {
        validate_op(op, tol);
        if (op.kind != m.initial.kind)
            throw std::invalid_argument("op '" + id + "' kind differs from the initial state");
        if (op.dimension() != m.initial.dimension())
            throw std::invalid_argument("op '" + id + "' dimension differs from the state");
    }
    if (!m.context_prior.empty()) {
        double total = 0.0;
        for (const auto& [id, w] : m.context_prior) {
            if (!m.ops.count(id))
                throw std::invalid_argument("context prior names unknown op '" + id + "'");
            if (!(w >= 0.0))
                throw std::invalid_argument("context prior weight for '" + id + "' negative");
            total += w;
        }
        if (std::abs(total - 1.0) > tol)
            throw std::invalid_argument("context prior sums to " + std::to_string(total));
    }
}

ApplyResult apply(const InterventionOp& op, const SharedState& x, double tol) {
    if (op.kind != x.kind)
        throw std::invalid_argument("apply: op and state kinds differ");
    if (op.dimension() != x.dimension())
        throw std::invalid_argument("apply: op and state dimensions differ");

    ApplyResult out;
    const std::size_t d = x.dimension();
    if (op.kind == StateKind::stochastic) {
        std::vector<double> next(d, 0.0);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                next[i] += op.stochastic_action[i][j] * x.probabilities[j];
        out.outcomes.weights = next;
        out.evolved = SharedState{StateKind::stochastic, next, {}};
        out.branch_states.resize(d);
        for (std::size_t o = 0; o < d; ++o) {
            std::vector<double> basis(d, 0.0);
            basis[o] = 1.0;
            out.branch_states[o] = SharedState{StateKind::stochastic, std::move(basis), {}};
        }
        return out;
    }

    std::vector<Cx> evolved = matvec(op.unitary, x.amplitudes);
    out.evolved = SharedState{StateKind::amplitude, {}, evolved};
    const std::size_t n_out = op.projectors.size();
    out.outcomes.weights.assign(n_out, 0.0);
    out.branch_states.assign(n_out, SharedState{StateKind::amplitude, {},
                                                std::vector<Cx>(d, Cx(0))});
    for (std::size_t k = 0; k < n_out; ++k) {
        std::vector<Cx> proj = matvec(op.projectors[k], evolved);
        double q = 0.0;
        for (const Cx& a : proj) q += std::norm(a);
        out.outcomes.weights[k] = q;
        if (q > tol * tol) {
            double inv = 1.0 / std::sqrt(q);
            for (Cx& a : proj) a *= inv;
            out.branch_states[k].amplitudes = std::move(proj);
        }
    }
    return out;
}

Distribution sequential_stats(const InterventionModel& m, const std::vector<std::string>& order) {
    if (order.empty()) throw std::invalid_argument("sequential_stats: empty order");
    validate_state(m.initial);
    std::vector<const InterventionOp*> ops;
    std::size_t total = 1;
    for (const auto& id : order) {
        ops.push_back(&m.op(id));
        total *= ops.back()->outcome_count();
    }

    Distribution joint;
    joint.weights.assign(total, 0.0);
    std::function<void(const SharedState&, std::size_t, std::size_t, double)> rec =
        [&](const SharedState& state, std::size_t depth, std::size_t index, double prob) {
            if (depth == ops.size()) {
                joint.weights[index] += prob;
                return;
            }
            ApplyResult r = apply(*ops[depth], state);
            const std::size_t n_out = r.outcomes.weights.size();
            for (std::size_t o = 0; o < n_out; ++o) {
                double q = r.outcomes.weights[o];
                if (q <= 0.0) continue;
                rec(r.branch_states[o], depth + 1, index * n_out + o, prob * q);
            }
        };
    rec(m.initial, 0, 0, 1.0);
    return joint;
}

double commutator_norm(const InterventionOp& a, const InterventionOp& b) {
    if (a.kind != b.kind || a.dimension() != b.dimension())
        throw std::invalid_argument("commutator_norm: incompatible ops");
    const std::size_t d = a.dimension();
    auto to_cx = [&](const InterventionOp& op) {
        if (op.kind == StateKind::amplitude) return op.unitary;
        CxMatrix m(d, std::vector<Cx>(d));
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) m[i][j] = op.stochastic_action[i][j];
        return m;
    };
    CxMatrix ma = to_cx(a), mb = to_cx(b);
    CxMatrix ab = matmul(ma, mb), ba = matmul(mb, ma);
    double norm = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) norm = std::max(norm, std::abs(ab[i][j] - ba[i][j]));
    return norm;
}

namespace {

// joint_ba arrives indexed (b outcome, a outcome); realign to (a, b).
std::vector<double> realign(const std::vector<double>& ba, std::size_t na, std::size_t nb) {
    std::vector<double> out(na * nb, 0.0);
    for (std::size_t ob = 0; ob < nb; ++ob)
        for (std::size_t oa = 0; oa < na; ++oa) out[oa * nb + ob] = ba[ob * na + oa];
    return out;
}

double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
    return 0.5 * s;
}

}  // namespace

OrderEffectReport order_effect_report(const InterventionModel& m, const std::string& a,
                                      const std::string& b) {
    const InterventionOp& op_a = m.op(a);
    const InterventionOp& op_b = m.op(b);
    const std::size_t na = op_a.outcome_count();
    const std::size_t nb = op_b.outcome_count();

    OrderEffectReport rep;
    rep.joint_ab = sequential_stats(m, {a, b}).weights;
    rep.joint_ba = realign(sequential_stats(m, {b, a}).weights, na, nb);
    rep.tv_raw = tv_distance(rep.joint_ab, rep.joint_ba);
    rep.commutator = commutator_norm(op_a, op_b);

    // Conditioned view: distribution of the second answer given the first
    // question answered with outcome 0, compared across orders.
    auto conditional_second = [](const std::vector<double>& joint_first_major,
                                 std::size_t n_second) {
        std::vector<double> cond(joint_first_major.begin(),
                                 joint_first_major.begin() + n_second);
        double s = std::accumulate(cond.begin(), cond.end(), 0.0);
        if (s > 0.0)
            for (double& w : cond) w /= s;
        return cond;
    };
    std::vector<double> b_given_a0 = conditional_second(rep.joint_ab, nb);
    std::vector<double> joint_ba_native = sequential_stats(m, {b, a}).weights;
    std::vector<double> a_given_b0 = conditional_second(joint_ba_native, na);
    // Compare P(second=0 | first=0) across the two orders when both are binary;
    // otherwise fall back to the TV of the two conditionals padded by index.
    if (na == nb) {
        rep.tv_given_first_yes = tv_distance(b_given_a0, a_given_b0);
    } else {
        rep.tv_given_first_yes = std::abs((b_given_a0.empty() ? 0.0 : b_given_a0[0]) -
                                          (a_given_b0.empty() ? 0.0 : a_given_b0[0]));
    }
    return rep;
}

double order_effect(const InterventionModel& m, const std::string& a, const std::string& b) {
    return order_effect_report(m, a, b).tv_raw;
}

double check_single_state(const std::vector<std::vector<double>>& joint_xc) {
    double total = 0.0;
    for (const auto& row : joint_xc)
        for (double w : row) {
            if (!(w >= 0.0)) throw std::invalid_argument("check_single_state: negative weight");
            total += w;
        }
    if (std::abs(total - 1.0) > kDefaultTol)
        throw std::invalid_argument("check_single_state: joint sums to " + std::to_string(total));
    return mutual_information(joint_xc);
}

}  // namespace ctxkit
