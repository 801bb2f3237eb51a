#include "ctxkit/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace ctxkit {

const Observable* Scenario::find_observable(const std::string& id) const {
    for (const auto& o : observables)
        if (o.id == id) return &o;
    return nullptr;
}

const Context* Scenario::find_context(const std::string& id) const {
    for (const auto& c : contexts)
        if (c.id == id) return &c;
    return nullptr;
}

std::size_t Scenario::table_size(const Context& c) const {
    std::size_t n = 1;
    for (const auto& oid : c.observables) {
        const Observable* o = find_observable(oid);
        if (!o) return 0;
        n *= static_cast<std::size_t>(o->arity);
    }
    return n;
}

double Distribution::sum() const {
    return std::accumulate(weights.begin(), weights.end(), 0.0);
}

bool Distribution::is_valid(double tol) const {
    for (double w : weights)
        if (!(w >= 0.0) || !std::isfinite(w)) return false;
    return std::abs(sum() - 1.0) <= tol;
}

const Distribution& Behavior::table(const std::string& context_id) const {
    auto it = tables.find(context_id);
    if (it == tables.end())
        throw std::invalid_argument("no table for context '" + context_id + "'");
    return it->second;
}

ValidationReport validate_scenario(const Scenario& s) {
    ValidationReport report;
    auto add = [&](std::string code, std::string where, std::string msg) {
        report.violations.push_back({std::move(code), std::move(where), std::move(msg)});
    };

    std::set<std::string> seen;
    for (const auto& o : s.observables) {
        if (!seen.insert(o.id).second)
            add("duplicate-observable", "observable:" + o.id,
                "observable id '" + o.id + "' declared more than once");
        if (o.arity < 2)
            add("bad-arity", "observable:" + o.id,
                "observable '" + o.id + "' has arity " + std::to_string(o.arity) +
                    ", need at least 2");
    }

    if (s.contexts.empty())
        add("no-contexts", "scenario", "scenario declares no contexts");

    std::set<std::string> ctx_seen;
    for (const auto& c : s.contexts) {
        if (!ctx_seen.insert(c.id).second)
            add("duplicate-context", "context:" + c.id,
                "context id '" + c.id + "' declared more than once");
        if (c.observables.empty())
            add("empty-context", "context:" + c.id, "context '" + c.id + "' has no observables");
        std::set<std::string> in_ctx;
        for (const auto& oid : c.observables) {
            if (!in_ctx.insert(oid).second)
                add("repeated-observable", "context:" + c.id,
                    "context '" + c.id + "' lists observable '" + oid + "' twice");
            if (!s.find_observable(oid))
                add("unknown-observable", "context:" + c.id,
                    "context '" + c.id + "' references undeclared observable '" + oid + "'");
        }
    }
    return report;
}

ValidationReport validate_behavior(const Behavior& b, double tol) {
    ValidationReport report = validate_scenario(b.scenario);
    for (const auto& c : b.scenario.contexts) {
        auto it = b.tables.find(c.id);
        if (it == b.tables.end()) {
            report.violations.push_back(
                {"missing-table", "context:" + c.id, "no table for context '" + c.id + "'"});
            continue;
        }
        const auto& d = it->second;
        std::size_t want = b.scenario.table_size(c);
        if (want != 0 && d.weights.size() != want) {
            report.violations.push_back(
                {"table-size", "table:" + c.id,
                 "table for '" + c.id + "' has " + std::to_string(d.weights.size()) +
                     " entries, expected " + std::to_string(want)});
            continue;
        }
        for (std::size_t i = 0; i < d.weights.size(); ++i)
            if (!(d.weights[i] >= 0.0) || !std::isfinite(d.weights[i]))
                report.violations.push_back(
                    {"negative-weight", "table:" + c.id + "[" + std::to_string(i) + "]",
                     "weight must be finite and non-negative"});
        if (std::abs(d.sum() - 1.0) > tol)
            report.violations.push_back({"unnormalized", "table:" + c.id,
                                         "table for '" + c.id + "' sums to " +
                                             std::to_string(d.sum())});
    }
    for (const auto& [cid, d] : b.tables)
        if (!b.scenario.find_context(cid))
            report.violations.push_back({"unknown-context", "table:" + cid,
                                         "table for undeclared context '" + cid + "'"});
    return report;
}

std::size_t outcome_index(const std::vector<int>& arities, const std::vector<int>& outcomes) {
    if (arities.size() != outcomes.size())
        throw std::invalid_argument("outcome_index: arity/outcome length mismatch");
    std::size_t idx = 0;
    for (std::size_t i = 0; i < arities.size(); ++i) {
        if (outcomes[i] < 0 || outcomes[i] >= arities[i])
            throw std::invalid_argument("outcome_index: outcome out of range");
        idx = idx * static_cast<std::size_t>(arities[i]) + static_cast<std::size_t>(outcomes[i]);
    }
    return idx;
}

std::vector<int> outcome_unindex(const std::vector<int>& arities, std::size_t index) {
    std::vector<int> out(arities.size(), 0);
    for (std::size_t i = arities.size(); i-- > 0;) {
        out[i] = static_cast<int>(index % static_cast<std::size_t>(arities[i]));
        index /= static_cast<std::size_t>(arities[i]);
    }
    if (index != 0) throw std::invalid_argument("outcome_unindex: index out of range");
    return out;
}

std::vector<int> context_arities(const Scenario& s, const Context& c) {
    std::vector<int> arities;
    arities.reserve(c.observables.size());
    for (const auto& oid : c.observables) {
        const Observable* o = s.find_observable(oid);
        if (!o) throw std::invalid_argument("context references unknown observable '" + oid + "'");
        arities.push_back(o->arity);
    }
    return arities;
}

Distribution marginal(const Behavior& b, const std::string& context_id,
                      const std::vector<std::string>& keep) {
    const Context* c = b.scenario.find_context(context_id);
    if (!c) throw std::invalid_argument("unknown context '" + context_id + "'");
    if (keep.empty()) throw std::invalid_argument("marginal: keep set is empty");

    std::vector<std::size_t> keep_pos;  // positions within the context, in context order
    for (std::size_t i = 0; i < c->observables.size(); ++i)
        if (std::find(keep.begin(), keep.end(), c->observables[i]) != keep.end())
            keep_pos.push_back(i);
    if (keep_pos.size() != keep.size())
        throw std::invalid_argument("marginal: keep is not a subset of context '" + context_id +
                                    "'");

    const std::vector<int> arities = context_arities(b.scenario, *c);
    std::vector<int> kept_arities;
    for (std::size_t p : keep_pos) kept_arities.push_back(arities[p]);

    const Distribution& full = b.table(context_id);
    std::size_t out_size = 1;
    for (int a : kept_arities) out_size *= static_cast<std::size_t>(a);
    Distribution out;
    out.weights.assign(out_size, 0.0);

    for (std::size_t idx = 0; idx < full.weights.size(); ++idx) {
        std::vector<int> joint = outcome_unindex(arities, idx);
        std::vector<int> kept;
        kept.reserve(keep_pos.size());
        for (std::size_t p : keep_pos) kept.push_back(joint[p]);
        out.weights[outcome_index(kept_arities, kept)] += full.weights[idx];
    }
    return out;
}

DisturbanceReport check_no_disturbance(const Behavior& b, double tol) {
    DisturbanceReport report;
    const auto& ctxs = b.scenario.contexts;
    for (std::size_t i = 0; i < ctxs.size(); ++i) {
        for (std::size_t j = i + 1; j < ctxs.size(); ++j) {
            for (const auto& oid : ctxs[i].observables) {
                const auto& other = ctxs[j].observables;
                if (std::find(other.begin(), other.end(), oid) == other.end()) continue;
                Distribution ma = marginal(b, ctxs[i].id, {oid});
                Distribution mb = marginal(b, ctxs[j].id, {oid});
                double residual = 0.0;
                for (std::size_t k = 0; k < ma.weights.size(); ++k)
                    residual = std::max(residual, std::abs(ma.weights[k] - mb.weights[k]));
                report.entries.push_back({oid, ctxs[i].id, ctxs[j].id, residual});
                report.max_residual = std::max(report.max_residual, residual);
            }
        }
    }
    report.pass = report.max_residual <= tol;
    return report;
}

}  // namespace ctxkit
