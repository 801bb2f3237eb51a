// ctxkit: command-line front end for contextuality analyses.
//
// Exit codes: 0 = analysis ran and passed / was feasible; 1 = analysis ran
// and found the negative result (a finding, not an error); 2 = usage or
// parse error; 3 = numerically indeterminate ("marginal") result.

#include <cmath>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ctxkit/io.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFinding = 1;
constexpr int kExitUsage = 2;
constexpr int kExitMarginal = 3;

struct OutputOptions {
    std::string out_path;    // empty = stdout
    std::string format = "json";
};

void emit(const OutputOptions& opt, const std::string& text) {
    if (opt.out_path.empty()) {
        std::cout << text;
        if (text.empty() || text.back() != '\n') std::cout << '\n';
    } else {
        ctxkit::io::save_text_atomic(opt.out_path, text);
    }
}

void emit_json(const OutputOptions& opt, const ctxkit::io::json& j) {
    emit(opt, j.dump(2) + "\n");
}

int emit_error(const OutputOptions& opt, const std::string& message) {
    ctxkit::io::json j;
    j["kind"] = "error";
    j["message"] = message;
    emit(opt, j.dump(2) + "\n");
    return kExitUsage;
}

// Branch data for an event pair (outcome 0 of each observable) read off one
// context of a behavior file.
ctxkit::BranchData branch_data_from_behavior(const ctxkit::Behavior& b,
                                             const std::string& context,
                                             const std::string& obs_a,
                                             const std::string& obs_b) {
    ctxkit::Distribution pair = ctxkit::marginal(b, context, {obs_a, obs_b});
    const ctxkit::Context* c = b.scenario.find_context(context);
    // Order of the pair marginal follows the context's declared order.
    bool a_first = true;
    for (const auto& oid : c->observables) {
        if (oid == obs_a) break;
        if (oid == obs_b) {
            a_first = false;
            break;
        }
    }
    const ctxkit::Observable* oa = b.scenario.find_observable(obs_a);
    const ctxkit::Observable* ob = b.scenario.find_observable(obs_b);
    if (oa->arity != 2 || ob->arity != 2)
        throw std::invalid_argument("events must come from binary observables");
    auto cell = [&](int va, int vb) {
        int first = a_first ? va : vb;
        int second = a_first ? vb : va;
        return pair.weights[static_cast<std::size_t>(first * 2 + second)];
    };
    double p_a = cell(0, 0) + cell(0, 1);
    double p_not_a = cell(1, 0) + cell(1, 1);
    ctxkit::BranchData d;
    d.p_a = p_a;
    d.p_not_a = p_not_a;
    d.p_b_given_a = p_a > 0.0 ? cell(0, 0) / p_a : 0.0;
    d.p_b_given_not_a = p_not_a > 0.0 ? cell(1, 0) / p_not_a : 0.0;
    return d;
}

std::vector<std::string> split_ids(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"contextuality analysis toolkit"};
    app.require_subcommand(1);

    double tol = ctxkit::kDefaultTol;
    app.add_option("--tol", tol, "numeric tolerance")->capture_default_str();

    // validate ---------------------------------------------------------------
    auto* cmd_validate = app.add_subcommand("validate", "validate a behavior file");
    std::string validate_path;
    OutputOptions validate_out;
    cmd_validate->add_option("file", validate_path)->required();
    cmd_validate->add_option("--out", validate_out.out_path);

    // embed ------------------------------------------------------------------
    auto* cmd_embed = app.add_subcommand("embed", "global Boolean embedding check");
    std::string embed_path;
    std::size_t embed_cap = ctxkit::kDefaultAssignmentCap;
    OutputOptions embed_out;
    cmd_embed->add_option("file", embed_path)->required();
    cmd_embed->add_option("--cap", embed_cap, "max global assignments");
    cmd_embed->add_option("--out", embed_out.out_path);

    // interfere ----------------------------------------------------------------
    auto* cmd_interfere = app.add_subcommand("interfere", "glued projection at a phase");
    double in_pa = -1, in_pba = -1, in_pbna = -1, in_theta = 0.0;
    std::string in_behavior, in_context, in_event_a, in_event_b;
    OutputOptions interfere_out;
    cmd_interfere->add_option("--p-a", in_pa, "P(A)");
    cmd_interfere->add_option("--p-b-given-a", in_pba, "P(B|A)");
    cmd_interfere->add_option("--p-b-given-not-a", in_pbna, "P(B|notA)");
    cmd_interfere->add_option("--theta", in_theta, "gluing phase (radians)")->required();
    cmd_interfere->add_option("--behavior", in_behavior, "behavior file");
    cmd_interfere->add_option("--context", in_context);
    cmd_interfere->add_option("--event-a", in_event_a);
    cmd_interfere->add_option("--event-b", in_event_b);
    cmd_interfere->add_option("--out", interfere_out.out_path);

    // phase ----------------------------------------------------------------------
    auto* cmd_phase = app.add_subcommand("phase", "extract the gluing phase from a total");
    double ph_observed = -1, ph_pa = -1, ph_pba = -1, ph_pbna = -1;
    std::string ph_behavior, ph_context, ph_event_a, ph_event_b;
    OutputOptions phase_out;
    cmd_phase->add_option("--observed", ph_observed, "observed total P(B)")->required();
    cmd_phase->add_option("--p-a", ph_pa);
    cmd_phase->add_option("--p-b-given-a", ph_pba);
    cmd_phase->add_option("--p-b-given-not-a", ph_pbna);
    cmd_phase->add_option("--behavior", ph_behavior);
    cmd_phase->add_option("--context", ph_context);
    cmd_phase->add_option("--event-a", ph_event_a);
    cmd_phase->add_option("--event-b", ph_event_b);
    cmd_phase->add_option("--out", phase_out.out_path);

    // order-effect ------------------------------------------------------------------
    auto* cmd_order = app.add_subcommand("order-effect", "sequential order dependence");
    std::string order_model, order_a, order_b;
    OutputOptions order_out;
    cmd_order->add_option("--model", order_model)->required();
    cmd_order->add_option("--a", order_a)->required();
    cmd_order->add_option("--b", order_b)->required();
    cmd_order->add_option("--out", order_out.out_path);

    // holonomy -------------------------------------------------------------------
    auto* cmd_holonomy = app.add_subcommand("holonomy", "loop holonomy / atlas flatness");
    std::string holo_atlas, holo_loop;
    int holo_max_len = 6;
    OutputOptions holo_out;
    cmd_holonomy->add_option("--atlas", holo_atlas)->required();
    cmd_holonomy->add_option("--loop", holo_loop, "comma-separated world ids (closed loop)");
    cmd_holonomy->add_option("--max-loop-len", holo_max_len);
    cmd_holonomy->add_option("--out", holo_out.out_path);
    cmd_holonomy->add_option("--format", holo_out.format)
        ->check(CLI::IsMember({"json", "csv"}));

    // bookkeeping -------------------------------------------------------------------
    auto* cmd_book = app.add_subcommand("bookkeeping", "cheapest classical simulation");
    std::string book_path, book_prior;
    std::size_t book_lambda = 4, book_memory = 4;
    OutputOptions book_out;
    cmd_book->add_option("file", book_path)->required();
    cmd_book->add_option("--max-lambda", book_lambda);
    cmd_book->add_option("--max-memory", book_memory);
    cmd_book->add_option("--context-prior", book_prior, "JSON file with a weight list");
    cmd_book->add_option("--out", book_out.out_path);

    // bell ---------------------------------------------------------------------------
    auto* cmd_bell = app.add_subcommand("bell", "CHSH value + local decomposition");
    std::string bell_path;
    OutputOptions bell_out;
    cmd_bell->add_option("file", bell_path)->required();
    cmd_bell->add_option("--out", bell_out.out_path);
    cmd_bell->add_option("--format", bell_out.format)->check(CLI::IsMember({"json", "csv"}));

    // nosignal ------------------------------------------------------------------------
    auto* cmd_ns = app.add_subcommand("nosignal", "no-signalling check");
    std::string ns_path;
    OutputOptions ns_out;
    cmd_ns->add_option("file", ns_path)->required();
    cmd_ns->add_option("--out", ns_out.out_path);

    // tradeoff ---------------------------------------------------------------------------
    auto* cmd_tradeoff = app.add_subcommand("tradeoff", "memory/interference simulation");
    std::string tradeoff_config;
    std::optional<std::uint64_t> tradeoff_seed;
    OutputOptions tradeoff_out;
    tradeoff_out.format = "csv";
    cmd_tradeoff->add_option("--config", tradeoff_config)->required();
    cmd_tradeoff->add_option("--seed", tradeoff_seed, "override the config seed");
    cmd_tradeoff->add_option("--out", tradeoff_out.out_path);
    cmd_tradeoff->add_option("--format", tradeoff_out.format)
        ->check(CLI::IsMember({"json", "csv"}));

    // Global flags may appear after the subcommand as well.
    for (CLI::App* sub : {cmd_validate, cmd_embed, cmd_interfere, cmd_phase, cmd_order,
                          cmd_holonomy, cmd_book, cmd_bell, cmd_ns, cmd_tradeoff})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitPass : kExitUsage;
    }

    try {
        if (cmd_validate->parsed()) {
            ctxkit::Behavior b = ctxkit::io::load_behavior(validate_path);
            ctxkit::ValidationReport r = ctxkit::validate_behavior(b, tol);
            emit_json(validate_out, ctxkit::io::validation_to_json(r));
            return r.ok() ? kExitPass : kExitFinding;
        }

        if (cmd_embed->parsed()) {
            ctxkit::Behavior b = ctxkit::io::load_behavior(embed_path);
            ctxkit::EmbeddingCertificate cert =
                ctxkit::check_boolean_embedding(b, tol, embed_cap);
            emit_json(embed_out, ctxkit::io::certificate_to_json(cert, b.scenario));
            switch (cert.status) {
                case ctxkit::EmbeddingCertificate::Status::embeddable: return kExitPass;
                case ctxkit::EmbeddingCertificate::Status::non_embeddable: return kExitFinding;
                case ctxkit::EmbeddingCertificate::Status::marginal: return kExitMarginal;
            }
        }

        if (cmd_interfere->parsed() || cmd_phase->parsed()) {
            bool is_phase = cmd_phase->parsed();
            const OutputOptions& opt = is_phase ? phase_out : interfere_out;
            std::string behavior_path = is_phase ? ph_behavior : in_behavior;
            ctxkit::BranchData d;
            if (!behavior_path.empty()) {
                ctxkit::Behavior b = ctxkit::io::load_behavior(behavior_path);
                d = branch_data_from_behavior(b, is_phase ? ph_context : in_context,
                                              is_phase ? ph_event_a : in_event_a,
                                              is_phase ? ph_event_b : in_event_b);
            } else {
                d.p_a = is_phase ? ph_pa : in_pa;
                d.p_b_given_a = is_phase ? ph_pba : in_pba;
                d.p_b_given_not_a = is_phase ? ph_pbna : in_pbna;
                if (d.p_a < 0 || d.p_b_given_a < 0 || d.p_b_given_not_a < 0)
                    return emit_error(opt,
                                      "need either --behavior/--context/--event-a/--event-b "
                                      "or all of --p-a, --p-b-given-a, --p-b-given-not-a");
                d.p_not_a = 1.0 - d.p_a;
            }

            ctxkit::io::json j;
            if (!is_phase) {
                ctxkit::GluingPhase theta(in_theta);
                ctxkit::ProjectionResult r = ctxkit::glued_projection(d, theta);
                j["kind"] = "interference";
                j["ltp"] = ctxkit::ltp_predict(d);
                j["interference"] = ctxkit::interference_term(d, theta);
                j["total"] = r.probability;
                j["in_range"] = r.in_range;
                j["theta"] = theta.theta;
                emit_json(interfere_out, j);
                return kExitPass;
            }
            ctxkit::PhaseFit fit = ctxkit::extract_phase(ph_observed, d, tol);
            j["kind"] = "phase";
            j["theta"] = fit.theta.theta;
            j["feasible"] = fit.feasible;
            j["excess"] = fit.excess;
            j["ltp"] = ctxkit::ltp_predict(d);
            emit_json(phase_out, j);
            return fit.feasible ? kExitPass : kExitFinding;
        }

        if (cmd_order->parsed()) {
            ctxkit::InterventionModel m = ctxkit::io::load_model(order_model);
            ctxkit::validate_model(m, tol);
            ctxkit::OrderEffectReport r = ctxkit::order_effect_report(m, order_a, order_b);
            ctxkit::io::json j;
            j["kind"] = "order-effect";
            j["a"] = order_a;
            j["b"] = order_b;
            j["order_effect"] = r.tv_raw;
            j["order_effect_given_first_yes"] = r.tv_given_first_yes;
            j["commutator_norm"] = r.commutator;
            j["joint_ab"] = r.joint_ab;
            j["joint_ba_aligned"] = r.joint_ba;
            emit_json(order_out, j);
            return kExitPass;
        }

        if (cmd_holonomy->parsed()) {
            ctxkit::Atlas atlas = ctxkit::io::load_atlas(holo_atlas);
            ctxkit::ValidationReport valid = ctxkit::validate_atlas(atlas);
            if (!valid.ok())
                return emit_error(holo_out, "invalid atlas: " + valid.violations[0].message);
            if (!holo_loop.empty()) {
                ctxkit::HolonomyResult h =
                    ctxkit::loop_holonomy(atlas, split_ids(holo_loop), tol);
                if (holo_out.format == "csv") {
                    std::ostringstream os;
                    os << "loop,branch,phase\n";
                    os.precision(17);
                    std::string loop_str;
                    for (std::size_t i = 0; i < h.loop.size(); ++i)
                        loop_str += (i ? "->" : "") + h.loop[i];
                    for (const auto& [atom, phase] : h.per_branch_phase)
                        os << loop_str << ',' << atom << ',' << phase << '\n';
                    emit(holo_out, os.str());
                } else {
                    emit_json(holo_out, ctxkit::io::holonomy_to_json(h));
                }
                return h.flat ? kExitPass : kExitFinding;
            }
            ctxkit::FlatnessReport r = ctxkit::flatness_check(atlas, holo_max_len, tol);
            emit_json(holo_out, ctxkit::io::flatness_to_json(r));
            return r.flat ? kExitPass : kExitFinding;
        }

        if (cmd_book->parsed()) {
            ctxkit::Behavior b = ctxkit::io::load_behavior(book_path);
            ctxkit::BookkeepingCaps caps;
            caps.max_lambda = book_lambda;
            caps.max_memory = book_memory;
            std::optional<std::vector<double>> prior;
            if (!book_prior.empty()) {
                ctxkit::io::json pj = ctxkit::io::load_json_file(book_prior);
                prior = pj.get<std::vector<double>>();
            }
            ctxkit::BookkeepingReport r =
                ctxkit::min_bookkeeping(b, caps, tol, prior ? &*prior : nullptr);
            emit_json(book_out, ctxkit::io::bookkeeping_to_json(r));
            bool zero_cost = r.reproduces && r.i_m_c <= tol;
            return zero_cost ? kExitPass : kExitFinding;
        }

        if (cmd_bell->parsed()) {
            ctxkit::BipartiteBehavior b = ctxkit::io::load_bipartite(bell_path);
            ctxkit::ValidationReport valid = ctxkit::validate_bipartite(b, tol);
            if (!valid.ok())
                return emit_error(bell_out, "invalid behavior: " + valid.violations[0].message);
            ctxkit::NoSignallingReport ns = ctxkit::check_no_signalling(b, tol);
            ctxkit::LocalDecomposition d = ctxkit::local_decomposition(b, tol);
            double s = (b.n_x == 2 && b.n_y == 2 && b.n_a == 2 && b.n_b == 2)
                           ? ctxkit::chsh_value(b)
                           : std::nan("");
            std::string status = d.status == ctxkit::LocalDecomposition::Status::local
                                     ? "local"
                                     : d.status == ctxkit::LocalDecomposition::Status::nonlocal
                                           ? "nonlocal"
                                           : "marginal";
            if (bell_out.format == "csv") {
                std::ostringstream os;
                os << "S,ns_residual,local_status\n";
                os.precision(17);
                os << s << ',' << ns.max_residual << ',' << status << '\n';
                emit(bell_out, os.str());
            } else {
                ctxkit::io::json j;
                j["kind"] = "bell";
                j["S"] = std::isnan(s) ? ctxkit::io::json() : ctxkit::io::json(s);
                j["no_signalling"] = ctxkit::io::no_signalling_to_json(ns);
                j["local_decomposition"] = ctxkit::io::local_decomposition_to_json(d);
                emit_json(bell_out, j);
            }
            switch (d.status) {
                case ctxkit::LocalDecomposition::Status::local: return kExitPass;
                case ctxkit::LocalDecomposition::Status::nonlocal: return kExitFinding;
                case ctxkit::LocalDecomposition::Status::marginal: return kExitMarginal;
            }
        }

        if (cmd_ns->parsed()) {
            ctxkit::BipartiteBehavior b = ctxkit::io::load_bipartite(ns_path);
            ctxkit::NoSignallingReport r = ctxkit::check_no_signalling(b, tol);
            emit_json(ns_out, ctxkit::io::no_signalling_to_json(r));
            return r.pass ? kExitPass : kExitFinding;
        }

        if (cmd_tradeoff->parsed()) {
            ctxkit::TradeoffConfig cfg = ctxkit::io::load_tradeoff_config(tradeoff_config);
            if (tradeoff_seed) cfg.seed = *tradeoff_seed;
            ctxkit::TradeoffReport r = ctxkit::run_tradeoff(cfg);
            if (tradeoff_out.format == "csv") {
                std::ostringstream os;
                ctxkit::write_tradeoff_csv(r, os);
                emit(tradeoff_out, os.str());
            } else {
                emit_json(tradeoff_out, ctxkit::io::tradeoff_to_json(r));
            }
            return kExitPass;
        }
    } catch (const ctxkit::io::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
