#include "ctxkit/io.hpp"

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

namespace ctxkit::io {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ParseError(where + ": " + what);
}

const json& field(const json& j, const std::string& where, const std::string& key) {
    if (!j.is_object()) fail(where, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(where, "missing field '" + key + "'");
    return *it;
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    return j.get<double>();
}

std::vector<double> real_vector(const json& j, const std::string& where) {
    if (!j.is_array()) fail(where, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

Cx complex_entry(const json& j, const std::string& where) {
    if (j.is_number()) return Cx(j.get<double>(), 0.0);
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return Cx(j[0].get<double>(), j[1].get<double>());
    fail(where, "expected a real number or an [re, im] pair");
}

CxMatrix complex_matrix(const json& j, const std::string& where) {
    if (!j.is_array()) fail(where, "expected a matrix (array of rows)");
    CxMatrix m;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const json& row = j[i];
        std::string rw = where + "[" + std::to_string(i) + "]";
        if (!row.is_array()) fail(rw, "expected a row (array)");
        std::vector<Cx> r;
        for (std::size_t k = 0; k < row.size(); ++k)
            r.push_back(complex_entry(row[k], rw + "[" + std::to_string(k) + "]"));
        m.push_back(std::move(r));
    }
    return m;
}

}  // namespace

json load_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open file");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    return j;
}

void save_text_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path dir = target.parent_path();
    fs::path tmp = (dir.empty() ? fs::path(".") : dir) /
                   (target.filename().string() + ".tmp-" + std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
        out << content;
        if (!out.flush()) throw std::runtime_error("write failure on '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
}

// --- scenario / behavior -----------------------------------------------------

json behavior_to_json(const Behavior& b) {
    json j;
    j["observables"] = json::array();
    for (const auto& o : b.scenario.observables)
        j["observables"].push_back({{"id", o.id}, {"arity", o.arity}});
    j["contexts"] = json::array();
    for (const auto& c : b.scenario.contexts)
        j["contexts"].push_back({{"id", c.id}, {"observables", c.observables}});
    j["tables"] = json::object();
    for (const auto& [cid, d] : b.tables) j["tables"][cid] = d.weights;
    return j;
}

Behavior behavior_from_json(const json& j, const std::string& where) {
    Behavior b;
    const json& obs = field(j, where, "observables");
    if (!obs.is_array()) fail(where + ".observables", "expected an array");
    for (std::size_t i = 0; i < obs.size(); ++i) {
        std::string w = where + ".observables[" + std::to_string(i) + "]";
        Observable o;
        const json& id = field(obs[i], w, "id");
        if (!id.is_string()) fail(w + ".id", "expected a string");
        o.id = id.get<std::string>();
        const json& ar = field(obs[i], w, "arity");
        if (!ar.is_number_integer()) fail(w + ".arity", "expected an integer");
        o.arity = ar.get<int>();
        b.scenario.observables.push_back(std::move(o));
    }
    const json& ctxs = field(j, where, "contexts");
    if (!ctxs.is_array()) fail(where + ".contexts", "expected an array");
    for (std::size_t i = 0; i < ctxs.size(); ++i) {
        std::string w = where + ".contexts[" + std::to_string(i) + "]";
        Context c;
        const json& id = field(ctxs[i], w, "id");
        if (!id.is_string()) fail(w + ".id", "expected a string");
        c.id = id.get<std::string>();
        const json& oo = field(ctxs[i], w, "observables");
        if (!oo.is_array()) fail(w + ".observables", "expected an array of ids");
        for (const auto& e : oo) {
            if (!e.is_string()) fail(w + ".observables", "expected string ids");
            c.observables.push_back(e.get<std::string>());
        }
        b.scenario.contexts.push_back(std::move(c));
    }
    const json& tables = field(j, where, "tables");
    if (!tables.is_object()) fail(where + ".tables", "expected an object");
    for (auto it = tables.begin(); it != tables.end(); ++it) {
        std::string w = where + ".tables." + it.key();
        Distribution d;
        d.weights = real_vector(it.value(), w);
        for (std::size_t k = 0; k < d.weights.size(); ++k)
            if (d.weights[k] < 0.0)
                fail(w + "[" + std::to_string(k) + "]", "weights must be non-negative");
        b.tables[it.key()] = std::move(d);
    }
    return b;
}

Behavior load_behavior(const std::string& path) {
    return behavior_from_json(load_json_file(path), path);
}

void save_behavior(const Behavior& b, const std::string& path) {
    save_text_atomic(path, behavior_to_json(b).dump(2) + "\n");
}

// --- bipartite ---------------------------------------------------------------

json bipartite_to_json(const BipartiteBehavior& b) {
    json j;
    j["settings"] = {b.n_x, b.n_y};
    j["outcomes"] = {b.n_a, b.n_b};
    j["tables"] = json::object();
    for (const auto& [xy, d] : b.tables)
        j["tables"][std::to_string(xy.first) + "," + std::to_string(xy.second)] = d.weights;
    return j;
}

BipartiteBehavior bipartite_from_json(const json& j, const std::string& where) {
    BipartiteBehavior b;
    const json& settings = field(j, where, "settings");
    if (!settings.is_array() || settings.size() != 2)
        fail(where + ".settings", "expected [n_x, n_y]");
    b.n_x = settings[0].get<int>();
    b.n_y = settings[1].get<int>();
    const json& outcomes = field(j, where, "outcomes");
    if (!outcomes.is_array() || outcomes.size() != 2)
        fail(where + ".outcomes", "expected [n_a, n_b]");
    b.n_a = outcomes[0].get<int>();
    b.n_b = outcomes[1].get<int>();
    const json& tables = field(j, where, "tables");
    if (!tables.is_object()) fail(where + ".tables", "expected an object keyed \"x,y\"");
    for (auto it = tables.begin(); it != tables.end(); ++it) {
        std::string w = where + ".tables." + it.key();
        int x = 0, y = 0;
        if (std::sscanf(it.key().c_str(), "%d,%d", &x, &y) != 2)
            fail(w, "key must look like \"x,y\"");
        Distribution d;
        d.weights = real_vector(it.value(), w);
        b.tables[{x, y}] = std::move(d);
    }
    return b;
}

BipartiteBehavior load_bipartite(const std::string& path) {
    return bipartite_from_json(load_json_file(path), path);
}

// --- atlas ---------------------------------------------------------------------

json atlas_to_json(const Atlas& a) {
    json j;
    j["worlds"] = json::object();
    for (const auto& [id, w] : a.worlds)
        j["worlds"][id] = {{"atoms", w.atoms}, {"measure", w.measure.weights}};
    j["transitions"] = json::array();
    for (const auto& t : a.transitions) {
        json branches = json::array();
        for (const auto& [from, to] : t.correspondence) {
            double phase = 0.0;
            auto it = t.phase_offsets.find(from);
            if (it != t.phase_offsets.end()) phase = it->second;
            branches.push_back({{"from", from}, {"to", to}, {"phase", phase}});
        }
        j["transitions"].push_back(
            {{"source", t.source}, {"target", t.target}, {"branches", branches}});
    }
    return j;
}

Atlas atlas_from_json(const json& j, const std::string& where) {
    Atlas a;
    const json& worlds = field(j, where, "worlds");
    if (!worlds.is_object()) fail(where + ".worlds", "expected an object");
    for (auto it = worlds.begin(); it != worlds.end(); ++it) {
        std::string w = where + ".worlds." + it.key();
        LogicWorld world;
        world.context_id = it.key();
        const json& atoms = field(it.value(), w, "atoms");
        if (!atoms.is_array()) fail(w + ".atoms", "expected an array of labels");
        for (const auto& e : atoms) {
            if (!e.is_string()) fail(w + ".atoms", "expected string labels");
            world.atoms.push_back(e.get<std::string>());
        }
        world.measure.weights = real_vector(field(it.value(), w, "measure"), w + ".measure");
        a.worlds[it.key()] = std::move(world);
    }
    const json& transitions = field(j, where, "transitions");
    if (!transitions.is_array()) fail(where + ".transitions", "expected an array");
    for (std::size_t i = 0; i < transitions.size(); ++i) {
        std::string w = where + ".transitions[" + std::to_string(i) + "]";
        TransitionMap t;
        const json& src = field(transitions[i], w, "source");
        const json& dst = field(transitions[i], w, "target");
        if (!src.is_string() || !dst.is_string()) fail(w, "source/target must be strings");
        t.source = src.get<std::string>();
        t.target = dst.get<std::string>();
        const json& branches = field(transitions[i], w, "branches");
        if (!branches.is_array()) fail(w + ".branches", "expected an array");
        for (std::size_t k = 0; k < branches.size(); ++k) {
            std::string bw = w + ".branches[" + std::to_string(k) + "]";
            const json& from = field(branches[k], bw, "from");
            const json& to = field(branches[k], bw, "to");
            if (!from.is_string() || !to.is_string()) fail(bw, "from/to must be strings");
            t.correspondence[from.get<std::string>()] = to.get<std::string>();
            if (branches[k].contains("phase"))
                t.phase_offsets[from.get<std::string>()] =
                    number(branches[k]["phase"], bw + ".phase");
        }
        a.transitions.push_back(std::move(t));
    }
    return a;
}

Atlas load_atlas(const std::string& path) { return atlas_from_json(load_json_file(path), path); }

// --- intervention model ----------------------------------------------------------

namespace {

InterventionOp op_from_json(const json& j, const std::string& id, StateKind kind,
                            const std::string& where) {
    InterventionOp op;
    op.id = id;
    op.kind = kind;
    if (kind == StateKind::stochastic) {
        CxMatrix m = complex_matrix(field(j, where, "matrix"), where + ".matrix");
        op.stochastic_action.assign(m.size(), {});
        for (std::size_t i = 0; i < m.size(); ++i)
            for (const Cx& e : m[i]) {
                if (e.imag() != 0.0) fail(where + ".matrix", "stochastic entries must be real");
                op.stochastic_action[i].push_back(e.real());
            }
        return op;
    }
    op.unitary = complex_matrix(field(j, where, "matrix"), where + ".matrix");
    const json& projectors = field(j, where, "projectors");
    if (!projectors.is_array()) fail(where + ".projectors", "expected an array of matrices");
    for (std::size_t k = 0; k < projectors.size(); ++k)
        op.projectors.push_back(complex_matrix(
            projectors[k], where + ".projectors[" + std::to_string(k) + "]"));
    return op;
}

SharedState state_from_json(const json& j, StateKind kind, const std::string& where) {
    SharedState x;
    x.kind = kind;
    if (!j.is_array()) fail(where, "expected an array");
    if (kind == StateKind::stochastic) {
        x.probabilities = real_vector(j, where);
    } else {
        for (std::size_t i = 0; i < j.size(); ++i)
            x.amplitudes.push_back(complex_entry(j[i], where + "[" + std::to_string(i) + "]"));
    }
    return x;
}

StateKind kind_from_json(const json& j, const std::string& where) {
    const json& kind = field(j, where, "kind");
    if (!kind.is_string()) fail(where + ".kind", "expected a string");
    std::string k = kind.get<std::string>();
    if (k == "stochastic") return StateKind::stochastic;
    if (k == "amplitude") return StateKind::amplitude;
    fail(where + ".kind", "expected \"stochastic\" or \"amplitude\"");
}

}  // namespace

InterventionModel model_from_json(const json& j, const std::string& where) {
    InterventionModel m;
    StateKind kind = kind_from_json(j, where);
    m.initial = state_from_json(field(j, where, "initial"), kind, where + ".initial");
    if (j.contains("dimension") &&
        j["dimension"].get<std::size_t>() != m.initial.dimension())
        fail(where + ".dimension", "does not match the initial state's length");
    const json& ops = field(j, where, "ops");
    if (!ops.is_object()) fail(where + ".ops", "expected an object keyed by op id");
    for (auto it = ops.begin(); it != ops.end(); ++it)
        m.ops[it.key()] = op_from_json(it.value(), it.key(), kind, where + ".ops." + it.key());
    if (j.contains("context_prior")) {
        const json& prior = j["context_prior"];
        if (!prior.is_object()) fail(where + ".context_prior", "expected an object");
        for (auto it = prior.begin(); it != prior.end(); ++it)
            m.context_prior[it.key()] =
                number(it.value(), where + ".context_prior." + it.key());
    }
    return m;
}

InterventionModel load_model(const std::string& path) {
    return model_from_json(load_json_file(path), path);
}

// --- tradeoff config --------------------------------------------------------------

TradeoffConfig tradeoff_config_from_json(const json& j, const std::string& where) {
    TradeoffConfig cfg;
    StateKind kind = kind_from_json(j, where);
    if (kind != StateKind::amplitude) fail(where + ".kind", "tradeoff requires amplitude kind");
    cfg.initial = state_from_json(field(j, where, "initial"), kind, where + ".initial");
    cfg.question_a = op_from_json(field(j, where, "question_a"), "A", kind, where + ".question_a");
    cfg.question_b = op_from_json(field(j, where, "question_b"), "B", kind, where + ".question_b");
    const json& levels = field(j, where, "memory_levels");
    if (!levels.is_array()) fail(where + ".memory_levels", "expected an array of integers");
    for (const auto& e : levels) {
        if (!e.is_number_integer()) fail(where + ".memory_levels", "expected integers");
        cfg.memory_levels.push_back(e.get<int>());
    }
    cfg.trials = field(j, where, "trials").get<std::size_t>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("noise")) cfg.noise = number(j["noise"], where + ".noise");
    return cfg;
}

TradeoffConfig load_tradeoff_config(const std::string& path) {
    return tradeoff_config_from_json(load_json_file(path), path);
}

// --- reports -------------------------------------------------------------------

json validation_to_json(const ValidationReport& r) {
    json j;
    j["kind"] = "validation";
    j["pass"] = r.ok();
    j["violations"] = json::array();
    for (const auto& v : r.violations)
        j["violations"].push_back(
            {{"code", v.code}, {"location", v.location}, {"message", v.message}});
    return j;
}

json disturbance_to_json(const DisturbanceReport& r) {
    json j;
    j["kind"] = "no-disturbance";
    j["pass"] = r.pass;
    j["max_residual"] = r.max_residual;
    j["residuals"] = json::array();
    for (const auto& e : r.entries)
        j["residuals"].push_back({{"observable", e.observable},
                                  {"context_a", e.context_a},
                                  {"context_b", e.context_b},
                                  {"residual", e.residual}});
    return j;
}

json certificate_to_json(const EmbeddingCertificate& c, const Scenario& s) {
    json j;
    j["kind"] = "embedding";
    switch (c.status) {
        case EmbeddingCertificate::Status::embeddable: j["status"] = "embeddable"; break;
        case EmbeddingCertificate::Status::non_embeddable: j["status"] = "non-embeddable"; break;
        case EmbeddingCertificate::Status::marginal: j["status"] = "marginal"; break;
    }
    j["margin"] = std::isfinite(c.margin) ? json(c.margin) : json("-inf");
    if (c.joint) {
        std::vector<GlobalAssignment> assignments = enumerate_global_assignments(s);
        json joint = json::array();
        for (std::size_t i = 0; i < c.joint->size(); ++i) {
            if ((*c.joint)[i] <= 1e-15) continue;
            joint.push_back(
                {{"assignment", assignments[i].as_map(s)}, {"weight", (*c.joint)[i]}});
        }
        j["joint"] = std::move(joint);
        j["joint_residual"] = c.joint_residual;
    }
    if (c.witness) {
        json w;
        w["cells"] = json::object();
        for (const auto& [cid, coeffs] : c.witness->coefficients) w["cells"][cid] = coeffs;
        w["value"] = c.witness->value_on_behavior;
        w["deterministic_max"] = c.witness->deterministic_max;
        w["margin"] = c.witness->margin;
        w["kind"] = c.witness->kind;
        j["witness"] = std::move(w);
    }
    if (c.disturbance) j["disturbance"] = disturbance_to_json(*c.disturbance);
    return j;
}

json no_signalling_to_json(const NoSignallingReport& r) {
    json j;
    j["kind"] = "no-signalling";
    j["pass"] = r.pass;
    j["max_residual"] = r.max_residual;
    j["residuals"] = json::array();
    for (const auto& e : r.worst)
        j["residuals"].push_back({{"party", e.party},
                                  {"setting", e.setting},
                                  {"outcome", e.outcome},
                                  {"between", {e.other_setting_1, e.other_setting_2}},
                                  {"residual", e.residual}});
    return j;
}

json local_decomposition_to_json(const LocalDecomposition& d) {
    json j;
    j["kind"] = "local-decomposition";
    switch (d.status) {
        case LocalDecomposition::Status::local: j["status"] = "local"; break;
        case LocalDecomposition::Status::nonlocal: j["status"] = "nonlocal"; break;
        case LocalDecomposition::Status::marginal: j["status"] = "marginal"; break;
    }
    j["margin"] = d.margin;
    if (d.model) {
        json strategies = json::array();
        for (const auto& s : d.model->strategies)
            strategies.push_back(
                {{"a_of_x", s.a_of_x}, {"b_of_y", s.b_of_y}, {"weight", s.weight}});
        j["model"] = {{"strategies", std::move(strategies)}, {"residual", d.model_residual}};
    }
    if (d.witness) {
        json w;
        w["cells"] = json::object();
        for (const auto& [xy, coeffs] : d.witness->cell_coefficients)
            w["cells"][std::to_string(xy.first) + "," + std::to_string(xy.second)] = coeffs;
        w["value"] = d.witness->value_on_behavior;
        w["classical_bound"] = d.witness->classical_bound;
        w["margin"] = d.witness->margin;
        if (d.witness->correlator) w["correlator"] = *d.witness->correlator;
        j["witness"] = std::move(w);
    }
    return j;
}

json holonomy_to_json(const HolonomyResult& h) {
    json j;
    j["kind"] = "holonomy";
    j["loop"] = h.loop;
    j["pass"] = h.flat;
    j["flat"] = h.flat;
    j["max_abs_phase"] = h.max_abs_phase;
    j["per_branch_phase"] = json::object();
    for (const auto& [atom, phase] : h.per_branch_phase) j["per_branch_phase"][atom] = phase;
    j["non_returning"] = json::object();
    for (const auto& [atom, to] : h.non_returning) j["non_returning"][atom] = to;
    j["dropped_atoms"] = h.dropped_atoms;
    return j;
}

json flatness_to_json(const FlatnessReport& r) {
    json j;
    j["kind"] = "flatness";
    j["pass"] = r.flat;
    j["flat"] = r.flat;
    j["max_abs_phase"] = r.max_abs_phase;
    j["witness_loop"] = r.witness_loop;
    j["loops_checked"] = r.loops_checked;
    return j;
}

json bookkeeping_to_json(const BookkeepingReport& r) {
    json j;
    j["kind"] = "bookkeeping";
    j["H_M"] = r.h_m;
    j["I_M_C"] = r.i_m_c;
    j["I_C_O_given_lambda"] = r.i_c_o_given_lambda;
    j["reproduces"] = r.reproduces;
    j["search_exhausted"] = r.search_exhausted;
    j["residual"] = r.residual;
    j["candidates_checked"] = r.candidates_checked;
    if (r.simulation) {
        json sim;
        sim["ontic_prior"] = r.simulation->ontic_prior;
        sim["n_memory"] = r.simulation->n_memory;
        sim["memory_policy"] = r.simulation->memory_policy;
        sim["response"] = r.simulation->response;
        j["simulation"] = std::move(sim);
    }
    return j;
}

json tradeoff_to_json(const TradeoffReport& r) {
    json j;
    j["kind"] = "tradeoff";
    j["seed"] = r.seed;
    j["trials"] = r.trials;
    j["levels"] = json::array();
    for (const auto& level : r.levels) {
        json l;
        l["m"] = level.memory;
        l["reliability"] = level.reliability;
        l["I_abs"] = level.i_abs;
        l["theta"] = level.fit_ok ? json(level.theta) : json();
        l["fit_ok"] = level.fit_ok;
        l["phase_feasible"] = level.phase_feasible;
        l["smoothed"] = level.smoothed;
        l["order_effect"] = level.order_effect_tv;
        l["I_MC"] = level.i_mc;
        l["p_b_first"] = level.p_b_first;
        l["p_a"] = level.p_a;
        l["p_b_given_a"] = level.p_b_given_a;
        l["p_b_given_not_a"] = level.p_b_given_not_a;
        j["levels"].push_back(std::move(l));
    }
    return j;
}

}  // namespace ctxkit::io
