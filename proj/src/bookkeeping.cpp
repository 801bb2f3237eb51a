#include "ctxkit/bookkeeping.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "ctxkit/embedding.hpp"
#include "ctxkit/simplex.hpp"

namespace ctxkit {

double entropy(const std::vector<double>& p) {
    double h = 0.0;
    for (double w : p) {
        if (w < 0.0) throw std::invalid_argument("entropy: negative weight");
        if (w > 0.0) h -= w * std::log2(w);
    }
    return h;
}

double mutual_information(const std::vector<std::vector<double>>& joint) {
    if (joint.empty()) return 0.0;
    std::vector<double> px(joint.size(), 0.0), py(joint[0].size(), 0.0), pxy;
    for (std::size_t x = 0; x < joint.size(); ++x)
        for (std::size_t y = 0; y < joint[x].size(); ++y) {
            px[x] += joint[x][y];
            py[y] += joint[x][y];
            pxy.push_back(joint[x][y]);
        }
    double mi = entropy(px) + entropy(py) - entropy(pxy);
    if (mi < -1e-12) throw std::runtime_error("mutual_information: negative beyond rounding");
    return std::max(mi, 0.0);
}

double conditional_mutual_information(
    const std::vector<std::vector<std::vector<double>>>& joint) {
    if (joint.empty()) return 0.0;
    const std::size_t nc = joint.size();
    const std::size_t no = joint[0].size();
    const std::size_t nl = no == 0 ? 0 : joint[0][0].size();
    double total = 0.0;
    for (std::size_t l = 0; l < nl; ++l) {
        double pl = 0.0;
        for (std::size_t c = 0; c < nc; ++c)
            for (std::size_t o = 0; o < no; ++o) pl += joint[c][o][l];
        if (pl <= 0.0) continue;
        std::vector<std::vector<double>> cond(nc, std::vector<double>(no, 0.0));
        for (std::size_t c = 0; c < nc; ++c)
            for (std::size_t o = 0; o < no; ++o) cond[c][o] = joint[c][o][l] / pl;
        total += pl * mutual_information(cond);
    }
    return total;
}

Behavior simulate_behavior(const ClassicalSimulation& sim, const Scenario& s) {
    const std::size_t nl = sim.n_lambda();
    if (sim.memory_policy.size() != nl || sim.response.size() != nl)
        throw std::invalid_argument("simulate_behavior: component sizes disagree on |lambda|");
    Behavior b;
    b.scenario = s;
    for (std::size_t ci = 0; ci < s.contexts.size(); ++ci) {
        const Context& c = s.contexts[ci];
        std::size_t n_out = s.table_size(c);
        Distribution d;
        d.weights.assign(n_out, 0.0);
        for (std::size_t l = 0; l < nl; ++l) {
            if (sim.memory_policy[l].size() <= ci)
                throw std::invalid_argument("simulate_behavior: policy missing context");
            const auto& pol = sim.memory_policy[l][ci];
            for (std::size_t m = 0; m < pol.size(); ++m) {
                if (pol[m] == 0.0) continue;
                const auto& resp = sim.response[l][m][ci];
                if (resp.size() != n_out)
                    throw std::invalid_argument("simulate_behavior: response size mismatch");
                for (std::size_t o = 0; o < n_out; ++o)
                    d.weights[o] += sim.ontic_prior[l] * pol[m] * resp[o];
            }
        }
        b.tables[c.id] = std::move(d);
    }
    return b;
}

namespace {

double reproduction_residual(const Behavior& got, const Behavior& want) {
    double r = 0.0;
    for (const auto& c : want.scenario.contexts) {
        const auto& a = got.table(c.id).weights;
        const auto& b = want.table(c.id).weights;
        for (std::size_t i = 0; i < b.size(); ++i) r = std::max(r, std::abs(a[i] - b[i]));
    }
    return r;
}

std::vector<double> default_context_prior(std::size_t n) {
    return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

// Joint p[c][o][l] induced by a simulation, a context prior and the ontic
// prior. Outcome alphabets are padded to the largest table.
std::vector<std::vector<std::vector<double>>> induced_col_joint(
    const ClassicalSimulation& sim, const Scenario& s, const std::vector<double>& cprior) {
    std::size_t no = 0;
    for (const auto& c : s.contexts) no = std::max(no, s.table_size(c));
    const std::size_t nc = s.contexts.size();
    const std::size_t nl = sim.n_lambda();
    std::vector<std::vector<std::vector<double>>> joint(
        nc, std::vector<std::vector<double>>(no, std::vector<double>(nl, 0.0)));
    for (std::size_t ci = 0; ci < nc; ++ci) {
        std::size_t n_out = s.table_size(s.contexts[ci]);
        for (std::size_t l = 0; l < nl; ++l) {
            const auto& pol = sim.memory_policy[l][ci];
            for (std::size_t m = 0; m < pol.size(); ++m) {
                if (pol[m] == 0.0) continue;
                const auto& resp = sim.response[l][m][ci];
                for (std::size_t o = 0; o < n_out; ++o)
                    joint[ci][o][l] += cprior[ci] * sim.ontic_prior[l] * pol[m] * resp[o];
            }
        }
    }
    return joint;
}

// Joint p[m][c] of the memory symbol against the context.
std::vector<std::vector<double>> induced_mc_joint(const ClassicalSimulation& sim,
                                                  const Scenario& s,
                                                  const std::vector<double>& cprior) {
    const std::size_t nc = s.contexts.size();
    std::vector<std::vector<double>> joint(sim.n_memory, std::vector<double>(nc, 0.0));
    for (std::size_t l = 0; l < sim.n_lambda(); ++l)
        for (std::size_t ci = 0; ci < nc; ++ci) {
            const auto& pol = sim.memory_policy[l][ci];
            for (std::size_t m = 0; m < pol.size(); ++m)
                joint[m][ci] += sim.ontic_prior[l] * cprior[ci] * pol[m];
        }
    return joint;
}

void fill_information(BookkeepingReport& rep, const ClassicalSimulation& sim, const Scenario& s,
                      const std::vector<double>& cprior) {
    auto mc = induced_mc_joint(sim, s, cprior);
    std::vector<double> pm(sim.n_memory, 0.0);
    for (std::size_t m = 0; m < sim.n_memory; ++m)
        for (double w : mc[m]) pm[m] += w;
    rep.h_m = entropy(pm);
    rep.i_m_c = mutual_information(mc);
    rep.i_c_o_given_lambda = conditional_mutual_information(induced_col_joint(sim, s, cprior));
}

struct SearchShared {
    const Behavior& b;
    const Scenario& s;
    std::vector<GlobalAssignment> assignments;
    std::vector<std::vector<double>> table_rows;  // per context, in scenario order
    std::vector<std::vector<std::size_t>> restriction;  // [assignment][context] -> outcome
    std::vector<std::vector<bool>> supported;           // [context][outcome] -> b > tol
    std::vector<double> cprior;
    double tol = kDefaultTol;
};

// Per-worker accumulator; merged chunk-by-chunk in enumeration order so the
// reported optimum is deterministic regardless of scheduling.
struct SearchLocal {
    std::size_t checked = 0;
    bool found = false;
    double best_i = 0.0;
    ClassicalSimulation best_sim;
};

// One deterministic candidate: symbols S (assignment indices) and per-lambda
// policies g (context -> position in S). The mixing weights solve a small
// full-rank system; candidates with dependent columns are skipped, since any
// basic solution there has a zero weight and the same simulation already
// appears as a smaller candidate (columns are 0/1, so exact dependence shows
// up as an exactly zero pivot). Hot path: no allocation until a candidate
// actually improves on the incumbent.
void consider(const SearchShared& st, SearchLocal& local,
              const std::vector<std::size_t>& symbols,
              const std::vector<const std::vector<std::size_t>*>& gset) {
    const std::size_t nc = st.s.contexts.size();
    const std::size_t nl = gset.size();
    const std::size_t msize = symbols.size();

    // Outcome index per (lambda, context).
    std::size_t cell[4 * 8];
    for (std::size_t l = 0; l < nl; ++l)
        for (std::size_t ci = 0; ci < nc; ++ci)
            cell[l * nc + ci] = st.restriction[symbols[(*gset[l])[ci]]][ci];

    // Normal equations: (A^T A)[i][j] = #contexts where i and j hit the same
    // cell; (A^T p)[i] = sum of the hit table entries.
    double ata[4][5];
    for (std::size_t i = 0; i < nl; ++i) {
        for (std::size_t j = 0; j < nl; ++j) {
            double s = 0.0;
            for (std::size_t ci = 0; ci < nc; ++ci)
                if (cell[i * nc + ci] == cell[j * nc + ci]) s += 1.0;
            ata[i][j] = s;
        }
        double s = 0.0;
        for (std::size_t ci = 0; ci < nc; ++ci)
            s += st.table_rows[ci][cell[i * nc + ci]];
        ata[i][4] = s;
    }
    for (std::size_t col = 0; col < nl; ++col) {
        std::size_t piv = col;
        for (std::size_t i = col + 1; i < nl; ++i)
            if (std::abs(ata[i][col]) > std::abs(ata[piv][col])) piv = i;
        if (std::abs(ata[piv][col]) < 1e-9) return;  // dependent columns
        if (piv != col)
            for (std::size_t j = 0; j <= 4; ++j) std::swap(ata[piv][j], ata[col][j]);
        for (std::size_t i = 0; i < nl; ++i) {
            if (i == col) continue;
            double f = ata[i][col] / ata[col][col];
            if (f == 0.0) continue;
            for (std::size_t j = col; j <= 4; ++j) ata[i][j] -= f * ata[col][j];
        }
    }
    double mu[4];
    for (std::size_t i = 0; i < nl; ++i) {
        mu[i] = ata[i][4] / ata[i][i];
        if (mu[i] < -1e-12) return;
        if (mu[i] < 0.0) mu[i] = 0.0;
    }
    // Residual: per supported cell, the hitting weights must sum to b.
    for (std::size_t ci = 0; ci < nc; ++ci) {
        const std::vector<double>& row = st.table_rows[ci];
        for (std::size_t o = 0; o < row.size(); ++o) {
            double s = 0.0;
            for (std::size_t l = 0; l < nl; ++l)
                if (cell[l * nc + ci] == o) s += mu[l];
            if (std::abs(s - row[o]) > st.tol) return;
        }
    }

    // I(M;C) of this candidate, computed in place.
    double mc[16 * 8];
    for (std::size_t k = 0; k < msize * nc; ++k) mc[k] = 0.0;
    for (std::size_t l = 0; l < nl; ++l)
        for (std::size_t ci = 0; ci < nc; ++ci)
            mc[(*gset[l])[ci] * nc + ci] += mu[l] * st.cprior[ci];
    double hm = 0.0, hc = 0.0, hmc = 0.0;
    for (std::size_t m = 0; m < msize; ++m) {
        double pm = 0.0;
        for (std::size_t ci = 0; ci < nc; ++ci) {
            double w = mc[m * nc + ci];
            pm += w;
            if (w > 0.0) hmc -= w * std::log2(w);
        }
        if (pm > 0.0) hm -= pm * std::log2(pm);
    }
    for (std::size_t ci = 0; ci < nc; ++ci) {
        double pc = 0.0;
        for (std::size_t m = 0; m < msize; ++m) pc += mc[m * nc + ci];
        if (pc > 0.0) hc -= pc * std::log2(pc);
    }
    double i_mc = std::max(hm + hc - hmc, 0.0);
    if (local.found && i_mc >= local.best_i - 1e-15) return;

    ClassicalSimulation sim;
    sim.ontic_prior.assign(mu, mu + nl);
    sim.n_memory = msize;
    sim.memory_policy.assign(nl, {});
    sim.response.assign(nl, {});
    for (std::size_t l = 0; l < nl; ++l) {
        sim.memory_policy[l].assign(nc, std::vector<double>(msize, 0.0));
        for (std::size_t ci = 0; ci < nc; ++ci) sim.memory_policy[l][ci][(*gset[l])[ci]] = 1.0;
        sim.response[l].assign(msize, {});
        for (std::size_t m = 0; m < msize; ++m) {
            sim.response[l][m].assign(nc, {});
            for (std::size_t ci = 0; ci < nc; ++ci) {
                std::size_t n_out = st.s.table_size(st.s.contexts[ci]);
                sim.response[l][m][ci].assign(n_out, 0.0);
                sim.response[l][m][ci][st.restriction[symbols[m]][ci]] = 1.0;
            }
        }
    }
    local.found = true;
    local.best_i = i_mc;
    local.best_sim = std::move(sim);
}

// Enumerate, for one symbol set, the candidate policies and their subsets
// with cover/usage pruning. Outcome sets are tracked as 64-bit masks.
void search_symbol_set(const SearchShared& st, const BookkeepingCaps& caps,
                       const std::vector<std::size_t>& symbols, SearchLocal& local,
                       const std::function<void(std::size_t)>& spend_budget) {
    const std::size_t nc = st.s.contexts.size();
    const std::size_t msize = symbols.size();

    // Required outcome mask per context and per-symbol validity.
    std::vector<std::uint64_t> required(nc, 0);
    for (std::size_t ci = 0; ci < nc; ++ci)
        for (std::size_t o = 0; o < st.supported[ci].size(); ++o)
            if (st.supported[ci][o]) required[ci] |= std::uint64_t{1} << o;

    std::vector<std::vector<std::size_t>> valid(nc);
    std::vector<std::uint64_t> reachable(nc, 0);
    for (std::size_t ci = 0; ci < nc; ++ci) {
        for (std::size_t k = 0; k < msize; ++k) {
            std::size_t o = st.restriction[symbols[k]][ci];
            if (st.supported[ci][o]) {
                valid[ci].push_back(k);
                reachable[ci] |= std::uint64_t{1} << o;
            }
        }
        if ((reachable[ci] & required[ci]) != required[ci]) return;  // cannot cover
    }
    // Every symbol must be usable somewhere, or a smaller set covers this case.
    for (std::size_t k = 0; k < msize; ++k) {
        bool usable = false;
        for (std::size_t ci = 0; ci < nc && !usable; ++ci)
            usable = std::find(valid[ci].begin(), valid[ci].end(), k) != valid[ci].end();
        if (!usable) return;
    }

    // Candidate policies: functions context -> valid symbol position.
    struct Candidate {
        std::vector<std::size_t> g;                // symbol per context
        std::vector<std::uint64_t> outcome_mask;   // per context, single bit
        std::uint64_t symbol_mask = 0;
    };
    std::vector<Candidate> gs;
    {
        std::vector<std::size_t> g(nc, 0);
        std::function<void(std::size_t)> build = [&](std::size_t ci) {
            if (ci == nc) {
                Candidate cand;
                cand.g = g;
                cand.outcome_mask.assign(nc, 0);
                for (std::size_t c2 = 0; c2 < nc; ++c2) {
                    cand.outcome_mask[c2] = std::uint64_t{1}
                                            << st.restriction[symbols[g[c2]]][c2];
                    cand.symbol_mask |= std::uint64_t{1} << g[c2];
                }
                gs.push_back(std::move(cand));
                return;
            }
            for (std::size_t k : valid[ci]) {
                g[ci] = k;
                build(ci + 1);
            }
        };
        build(0);
    }

    const std::uint64_t all_symbols = msize == 64 ? ~std::uint64_t{0}
                                                  : (std::uint64_t{1} << msize) - 1;
    std::vector<std::size_t> chosen;
    // covered outcome masks per depth (depth 0 = nothing chosen)
    std::vector<std::vector<std::uint64_t>> covered_at(caps.max_lambda + 1,
                                                       std::vector<std::uint64_t>(nc, 0));
    std::vector<std::uint64_t> used_at(caps.max_lambda + 1, 0);

    std::size_t nodes = 0;
    std::function<void(std::size_t)> pick = [&](std::size_t start_g) {
        if (local.found && local.best_i <= 0.0) return;  // nothing beats zero cost
        ++local.checked;
        if (++nodes % 4096 == 0) spend_budget(4096);

        const std::size_t depth = chosen.size();
        const auto& covered = covered_at[depth];
        const std::uint64_t used = used_at[depth];
        if (depth > 0) {
            bool cover_all = true;
            for (std::size_t ci = 0; ci < nc && cover_all; ++ci)
                cover_all = (covered[ci] & required[ci]) == required[ci];
            if (cover_all && used == all_symbols) {
                std::vector<const std::vector<std::size_t>*> gset;
                gset.reserve(chosen.size());
                for (std::size_t gi : chosen) gset.push_back(&gs[gi].g);
                consider(st, local, symbols, gset);
            }
        }
        std::size_t rem = caps.max_lambda - depth;
        if (rem == 0) return;
        // Each further policy covers at most one new outcome per context and
        // at most nc new symbols.
        for (std::size_t ci = 0; ci < nc; ++ci) {
            auto miss = static_cast<std::size_t>(
                __builtin_popcountll(required[ci] & ~covered[ci]));
            if (miss > rem) return;
        }
        auto unused = static_cast<std::size_t>(__builtin_popcountll(all_symbols & ~used));
        if (unused > rem * nc) return;

        for (std::size_t gi = start_g; gi < gs.size(); ++gi) {
            chosen.push_back(gi);
            for (std::size_t ci = 0; ci < nc; ++ci)
                covered_at[depth + 1][ci] = covered[ci] | gs[gi].outcome_mask[ci];
            used_at[depth + 1] = used | gs[gi].symbol_mask;
            pick(gi + 1);
            chosen.pop_back();
        }
    };
    pick(0);
    spend_budget(nodes % 4096);
}

// Parallel driver: symbol sets are independent work units; per-chunk results
// are merged in enumeration order (min by value, earlier chunk on ties).
SearchLocal search_deterministic(const SearchShared& st, const BookkeepingCaps& caps,
                                 std::size_t* total_checked) {
    const std::size_t na = st.assignments.size();
    if (caps.max_lambda > 4 || caps.max_memory > 16 || st.s.contexts.size() > 8)
        throw std::length_error(
            "min_bookkeeping: caps exceeded (search supports |lambda| <= 4, |M| <= 16, "
            "<= 8 contexts)");
    for (std::size_t ci = 0; ci < st.s.contexts.size(); ++ci)
        if (st.supported[ci].size() > 64)
            throw std::length_error("min_bookkeeping: context table too large for the search");

    std::vector<std::vector<std::size_t>> chunks;
    for (std::size_t msize = 1; msize <= std::min(caps.max_memory, na); ++msize) {
        std::vector<std::size_t> symbols;
        std::function<void(std::size_t)> pick_symbols = [&](std::size_t start) {
            if (symbols.size() == msize) {
                chunks.push_back(symbols);
                return;
            }
            for (std::size_t j = start; j < na; ++j) {
                if (na - j < msize - symbols.size()) break;
                symbols.push_back(j);
                pick_symbols(j + 1);
                symbols.pop_back();
            }
        };
        pick_symbols(0);
    }

    std::atomic<std::size_t> next_chunk{0};
    std::atomic<std::size_t> stop_after{chunks.size()};  // chunks past this are skipped
    std::atomic<std::size_t> budget_spent{0};
    std::vector<SearchLocal> results(chunks.size());
    std::mutex error_mutex;
    std::exception_ptr error;

    auto worker = [&]() {
        auto spend = [&](std::size_t n) {
            if (n == 0) return;
            if (budget_spent.fetch_add(n, std::memory_order_relaxed) + n > caps.budget)
                throw std::length_error(
                    "min_bookkeeping: search budget exceeded; tighten caps");
        };
        try {
            for (;;) {
                std::size_t chunk = next_chunk.fetch_add(1, std::memory_order_relaxed);
                if (chunk >= chunks.size()) return;
                if (chunk > stop_after.load(std::memory_order_relaxed)) continue;
                SearchLocal local;
                search_symbol_set(st, caps, chunks[chunk], local, spend);
                if (local.found && local.best_i <= 0.0) {
                    std::size_t cur = stop_after.load(std::memory_order_relaxed);
                    while (chunk < cur &&
                           !stop_after.compare_exchange_weak(cur, chunk,
                                                             std::memory_order_relaxed)) {
                    }
                }
                results[chunk] = std::move(local);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
        }
    };

    unsigned n_threads = std::max(1u, std::min(std::thread::hardware_concurrency(), 8u));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);

    SearchLocal best;
    *total_checked = 0;
    for (const auto& r : results) {
        *total_checked += r.checked;
        if (!r.found) continue;
        if (!best.found || r.best_i < best.best_i - 1e-15) {
            best.found = true;
            best.best_i = r.best_i;
            best.best_sim = r.best_sim;
        }
    }
    best.checked = *total_checked;
    return best;
}

}  // namespace

BookkeepingReport min_bookkeeping(const Behavior& b, const BookkeepingCaps& caps, double tol,
                                  const std::vector<double>* context_prior) {
    ValidationReport valid = validate_behavior(b, std::max(tol, kDefaultTol));
    if (!valid.ok())
        throw std::invalid_argument("min_bookkeeping: invalid behavior: " +
                                    valid.violations.front().message);
    const Scenario& s = b.scenario;
    std::vector<double> cprior =
        context_prior ? *context_prior : default_context_prior(s.contexts.size());
    if (cprior.size() != s.contexts.size())
        throw std::invalid_argument("min_bookkeeping: context prior size mismatch");

    BookkeepingReport rep;

    EmbeddingCertificate cert = check_boolean_embedding(b, tol);
    if (cert.status == EmbeddingCertificate::Status::embeddable) {
        // The global joint is the ontic prior; the response reads the ontic
        // state's assignment, so no memory symbol is needed at all.
        std::vector<GlobalAssignment> assignments = enumerate_global_assignments(s);
        ClassicalSimulation sim;
        const auto& joint = *cert.joint;
        std::vector<std::size_t> support;
        for (std::size_t j = 0; j < joint.size(); ++j)
            if (joint[j] > 1e-15) support.push_back(j);
        double norm = 0.0;
        for (std::size_t j : support) norm += joint[j];
        sim.n_memory = 1;
        for (std::size_t j : support) sim.ontic_prior.push_back(joint[j] / norm);
        sim.memory_policy.assign(support.size(), {});
        sim.response.assign(support.size(), {});
        for (std::size_t l = 0; l < support.size(); ++l) {
            sim.memory_policy[l].assign(s.contexts.size(), std::vector<double>{1.0});
            sim.response[l].assign(1, {});
            sim.response[l][0].assign(s.contexts.size(), {});
            for (std::size_t ci = 0; ci < s.contexts.size(); ++ci) {
                std::size_t n_out = s.table_size(s.contexts[ci]);
                sim.response[l][0][ci].assign(n_out, 0.0);
                std::vector<int> arities = context_arities(s, s.contexts[ci]);
                std::vector<int> outs;
                for (const auto& oid : s.contexts[ci].observables) {
                    std::size_t pos = 0;
                    while (s.observables[pos].id != oid) ++pos;
                    outs.push_back(assignments[support[l]].outcomes[pos]);
                }
                sim.response[l][0][ci][outcome_index(arities, outs)] = 1.0;
            }
        }
        Behavior produced = simulate_behavior(sim, s);
        rep.residual = reproduction_residual(produced, b);
        rep.reproduces = rep.residual <= std::max(tol, cert.joint_residual + 1e-12);
        rep.simulation = std::move(sim);
        fill_information(rep, *rep.simulation, s, cprior);
        rep.search_exhausted = false;
        return rep;
    }

    // Deterministic search under caps.
    SearchShared st{b, s, enumerate_global_assignments(s), {}, {}, {}, cprior, tol};
    for (const auto& c : s.contexts) st.table_rows.push_back(b.table(c.id).weights);
    st.restriction.assign(st.assignments.size(), std::vector<std::size_t>(s.contexts.size(), 0));
    lp::Matrix cellm = assignment_cell_matrix(s, st.assignments);
    {
        std::size_t row0 = 0;
        for (std::size_t ci = 0; ci < s.contexts.size(); ++ci) {
            std::size_t n_out = s.table_size(s.contexts[ci]);
            for (std::size_t j = 0; j < st.assignments.size(); ++j)
                for (std::size_t o = 0; o < n_out; ++o)
                    if (cellm[row0 + o][j] == 1.0) st.restriction[j][ci] = o;
            row0 += n_out;
        }
    }
    st.supported.assign(s.contexts.size(), {});
    for (std::size_t ci = 0; ci < s.contexts.size(); ++ci) {
        const auto& t = b.table(s.contexts[ci].id).weights;
        st.supported[ci].assign(t.size(), false);
        for (std::size_t o = 0; o < t.size(); ++o) st.supported[ci][o] = t[o] > tol;
    }

    std::size_t total_checked = 0;
    SearchLocal best = search_deterministic(st, caps, &total_checked);
    rep.candidates_checked = total_checked;
    if (!best.found) {
        rep.reproduces = false;
        rep.search_exhausted = true;
        return rep;
    }
    Behavior produced = simulate_behavior(best.best_sim, s);
    rep.residual = reproduction_residual(produced, b);
    rep.reproduces = rep.residual <= tol;
    rep.search_exhausted = false;
    rep.simulation = std::move(best.best_sim);
    fill_information(rep, *rep.simulation, s, cprior);
    return rep;
}

}  // namespace ctxkit
