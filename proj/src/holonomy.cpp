#include "ctxkit/holonomy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <stdexcept>

namespace ctxkit {

const TransitionMap* Atlas::find_transition(const std::string& source,
                                            const std::string& target) const {
    for (const auto& t : transitions)
        if (t.source == source && t.target == target) return &t;
    return nullptr;
}

ValidationReport validate_atlas(const Atlas& atlas) {
    ValidationReport report;
    auto add = [&](std::string code, std::string where, std::string msg) {
        report.violations.push_back({std::move(code), std::move(where), std::move(msg)});
    };
    for (const auto& [id, world] : atlas.worlds) {
        if (id != world.context_id)
            add("world-key", "world:" + id, "world keyed '" + id + "' carries context_id '" +
                                                world.context_id + "'");
        std::set<std::string> atoms(world.atoms.begin(), world.atoms.end());
        if (atoms.size() != world.atoms.size())
            add("duplicate-atom", "world:" + id, "atoms are not distinct");
        if (world.measure.weights.size() != world.atoms.size())
            add("measure-size", "world:" + id, "measure length does not match atom count");
        else if (!world.measure.is_valid())
            add("measure-invalid", "world:" + id, "measure is not a probability distribution");
    }
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& t : atlas.transitions) {
        std::string where = "transition:" + t.source + "->" + t.target;
        if (!atlas.worlds.count(t.source))
            add("unknown-world", where, "source world '" + t.source + "' not declared");
        if (!atlas.worlds.count(t.target))
            add("unknown-world", where, "target world '" + t.target + "' not declared");
        if (!seen.insert({t.source, t.target}).second)
            add("duplicate-transition", where, "more than one map declared for this ordered pair");
        std::set<std::string> images;
        for (const auto& [from, to] : t.correspondence) {
            if (!images.insert(to).second)
                add("not-injective", where, "two branches map to atom '" + to + "'");
            auto src = atlas.worlds.find(t.source);
            if (src != atlas.worlds.end() &&
                std::find(src->second.atoms.begin(), src->second.atoms.end(), from) ==
                    src->second.atoms.end())
                add("unknown-atom", where, "branch '" + from + "' is not an atom of the source");
            auto dst = atlas.worlds.find(t.target);
            if (dst != atlas.worlds.end() &&
                std::find(dst->second.atoms.begin(), dst->second.atoms.end(), to) ==
                    dst->second.atoms.end())
                add("unknown-atom", where, "image '" + to + "' is not an atom of the target");
        }
        for (const auto& [from, offset] : t.phase_offsets) {
            if (!t.correspondence.count(from))
                add("offset-without-branch", where,
                    "phase offset on '" + from + "' which has no correspondence");
            if (!std::isfinite(offset))
                add("offset-not-finite", where, "phase offset on '" + from + "' is not finite");
        }
    }
    return report;
}

CompositeMap compose_path(const Atlas& atlas, const std::vector<std::string>& path) {
    if (path.size() < 2) throw std::invalid_argument("compose_path: need at least two worlds");
    for (const auto& id : path)
        if (!atlas.worlds.count(id))
            throw std::invalid_argument("compose_path: unknown world '" + id + "'");

    CompositeMap out;
    out.path = path;
    const LogicWorld& start = atlas.worlds.at(path.front());
    struct Walker {
        std::string at;
        double phase;
        bool alive;
    };
    std::vector<Walker> walkers;
    for (const auto& atom : start.atoms) walkers.push_back({atom, 0.0, true});

    for (std::size_t hop = 0; hop + 1 < path.size(); ++hop) {
        const TransitionMap* t = atlas.find_transition(path[hop], path[hop + 1]);
        if (!t)
            throw std::invalid_argument("compose_path: no transition declared for " +
                                        path[hop] + " -> " + path[hop + 1]);
        for (auto& w : walkers) {
            if (!w.alive) continue;
            auto it = t->correspondence.find(w.at);
            if (it == t->correspondence.end()) {
                w.alive = false;
                continue;
            }
            auto off = t->phase_offsets.find(w.at);
            if (off != t->phase_offsets.end()) w.phase += off->second;
            w.at = it->second;
        }
    }
    for (std::size_t i = 0; i < walkers.size(); ++i) {
        if (walkers[i].alive)
            out.branches.push_back({start.atoms[i], walkers[i].at, walkers[i].phase});
        else
            out.dropped_atoms.push_back(start.atoms[i]);
    }
    return out;
}

HolonomyResult loop_holonomy(const Atlas& atlas, const std::vector<std::string>& loop,
                             double tol) {
    if (loop.size() < 2 || loop.front() != loop.back())
        throw std::invalid_argument("loop_holonomy: loop must close (first id = last id)");
    CompositeMap comp = compose_path(atlas, loop);

    HolonomyResult out;
    out.loop = loop;
    out.dropped_atoms = comp.dropped_atoms;
    for (const auto& br : comp.branches) {
        if (br.end_atom == br.start_atom) {
            double phase = reduce_phase_signed(br.phase);
            out.per_branch_phase[br.start_atom] = phase;
            out.max_abs_phase = std::max(out.max_abs_phase, std::abs(phase));
        } else {
            out.non_returning[br.start_atom] = br.end_atom;
        }
    }
    out.flat = out.max_abs_phase <= tol && out.non_returning.empty();
    return out;
}

GluingPhase gluing_phase(const Atlas& atlas, const GluingSpec& spec) {
    if (spec.path_a.empty() || spec.path_not_a.empty())
        throw std::invalid_argument("gluing_phase: empty path");
    if (spec.path_a.back() != spec.path_not_a.back())
        throw std::invalid_argument("gluing_phase: paths must end in a common world");

    auto transport = [&](const std::string& atom, const std::vector<std::string>& path) {
        if (path.size() == 1) return 0.0;  // already at the target, no transport
        CompositeMap comp = compose_path(atlas, path);
        for (const auto& br : comp.branches)
            if (br.start_atom == atom) return br.phase;
        throw std::invalid_argument("gluing_phase: branch '" + atom +
                                    "' is not transportable along the given path");
    };
    double phi_a = transport(spec.branch_a, spec.path_a);
    double phi_not_a = transport(spec.branch_not_a, spec.path_not_a);
    return GluingPhase(phi_not_a - phi_a);
}

FlatnessReport flatness_check(const Atlas& atlas, int max_loop_len, double tol,
                              std::size_t budget) {
    FlatnessReport report;
    report.flat = true;

    std::vector<std::string> ids;
    for (const auto& [id, _] : atlas.worlds) ids.push_back(id);
    std::sort(ids.begin(), ids.end());

    std::size_t steps = 0;
    std::vector<std::string> path;
    std::set<std::string> on_path;

    // DFS over simple cycles: fix the smallest world id as the loop anchor to
    // avoid re-counting rotations.
    std::function<void(const std::string&)> dfs = [&](const std::string& anchor) {
        const std::string here = path.back();  // copy: path reallocates below
        if (++steps > budget)
            throw std::length_error("flatness_check: loop enumeration budget exceeded");
        for (const auto& t : atlas.transitions) {
            if (t.source != here) continue;
            if (t.target == anchor && path.size() >= 2) {
                std::vector<std::string> loop = path;
                loop.push_back(anchor);
                HolonomyResult h = loop_holonomy(atlas, loop, tol);
                ++report.loops_checked;
                if (!h.flat) report.flat = false;
                if (h.max_abs_phase > report.max_abs_phase) {
                    report.max_abs_phase = h.max_abs_phase;
                    report.witness_loop = loop;
                }
                if (report.witness_loop.empty() && (!h.non_returning.empty()))
                    report.witness_loop = loop;
            }
            if (static_cast<int>(path.size()) < max_loop_len && !on_path.count(t.target) &&
                t.target > anchor) {
                path.push_back(t.target);
                on_path.insert(t.target);
                dfs(anchor);
                on_path.erase(t.target);
                path.pop_back();
            }
        }
    };
    for (const auto& id : ids) {
        path = {id};
        on_path = {id};
        dfs(id);
    }
    return report;
}

}  // namespace ctxkit
