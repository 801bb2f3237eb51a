#include "ctxkit/tradeoff.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "ctxkit/bookkeeping.hpp"
#include "ctxkit/projection.hpp"

namespace ctxkit {

namespace {

// splitmix64: tiny, fully specified, identical on every platform.
struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    std::size_t sample(const std::vector<double>& dist) {
        double u = uniform();
        double acc = 0.0;
        for (std::size_t i = 0; i < dist.size(); ++i) {
            acc += dist[i];
            if (u < acc) return i;
        }
        return dist.size() - 1;
    }
};

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t level, std::uint64_t arm) {
    Rng mix(master ^ (0x100000001b3ull * (level + 1)) ^ (0xcbf29ce484222325ull * (arm + 1)));
    mix.next();
    return mix.next();
}

}  // namespace

void validate_tradeoff_config(const TradeoffConfig& cfg) {
    if (cfg.question_a.kind != StateKind::amplitude ||
        cfg.question_b.kind != StateKind::amplitude || cfg.initial.kind != StateKind::amplitude)
        throw std::invalid_argument("tradeoff: questions and state must be amplitude kind");
    validate_state(cfg.initial);
    validate_op(cfg.question_a);
    validate_op(cfg.question_b);
    if (cfg.question_a.outcome_count() != 2 || cfg.question_b.outcome_count() != 2)
        throw std::invalid_argument("tradeoff: questions must be binary");
    if (cfg.trials < 1) throw std::invalid_argument("tradeoff: trials must be >= 1");
    if (!(cfg.noise >= 0.0 && cfg.noise < 0.5))
        throw std::invalid_argument("tradeoff: noise must lie in [0, 0.5)");
    if (!std::is_sorted(cfg.memory_levels.begin(), cfg.memory_levels.end()))
        throw std::invalid_argument("tradeoff: memory levels must be ascending");
    for (int m : cfg.memory_levels)
        if (m < 0) throw std::invalid_argument("tradeoff: memory levels must be >= 0");
}

TradeoffReport run_tradeoff(const TradeoffConfig& cfg) {
    validate_tradeoff_config(cfg);

    // Exact model quantities shared by every level.
    ApplyResult first_a = apply(cfg.question_a, cfg.initial);
    const std::vector<double>& q_a = first_a.outcomes.weights;
    std::vector<std::vector<double>> b_given_a(2);
    for (int a = 0; a < 2; ++a) {
        if (q_a[static_cast<std::size_t>(a)] > 0.0)
            b_given_a[a] = apply(cfg.question_b, first_a.branch_states[a]).outcomes.weights;
        else
            b_given_a[a] = {0.5, 0.5};  // unreachable branch, weight zero below
    }
    // The flat agent's stored joint: the A-then-B statistics.
    std::vector<std::vector<double>> j_cl(2, std::vector<double>(2, 0.0));
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) j_cl[a][b] = q_a[a] * b_given_a[a][b];
    std::vector<double> j_cl_flat = {j_cl[0][0], j_cl[0][1], j_cl[1][0], j_cl[1][1]};

    // Coherent B-first branch data.
    ApplyResult first_b = apply(cfg.question_b, cfg.initial);
    const std::vector<double>& q_b = first_b.outcomes.weights;
    std::vector<std::vector<double>> a_given_b(2);
    for (int b = 0; b < 2; ++b) {
        if (q_b[static_cast<std::size_t>(b)] > 0.0)
            a_given_b[b] = apply(cfg.question_a, first_b.branch_states[b]).outcomes.weights;
        else
            a_given_b[b] = {0.5, 0.5};
    }

    TradeoffReport report;
    report.seed = cfg.seed;
    report.trials = cfg.trials;

    for (std::size_t li = 0; li < cfg.memory_levels.size(); ++li) {
        const int m = cfg.memory_levels[li];
        const double reliability = 1.0 - std::pow(2.0, -static_cast<double>(m));
        const std::size_t alphabet = static_cast<std::size_t>(std::max(m, 1));

        Rng rng_ab(stream_seed(cfg.seed, li, 0));
        Rng rng_ba(stream_seed(cfg.seed, li, 1));

        auto noisy = [&](int answer, Rng& rng) {
            if (cfg.noise > 0.0 && rng.uniform() < cfg.noise)
                return static_cast<int>(rng.next() & 1u);
            return answer;
        };

        std::vector<std::vector<double>> count_ab(2, std::vector<double>(2, 0.0));
        std::vector<std::vector<double>> count_ba(2, std::vector<double>(2, 0.0));
        // Memory-symbol x context counts; context 0 = A asked first.
        std::vector<std::vector<double>> count_mc(alphabet, std::vector<double>(2, 0.0));

        for (std::size_t t = 0; t < cfg.trials; ++t) {
            // A-then-B arm.
            bool reliable = rng_ab.uniform() < reliability;
            int a, b;
            if (reliable) {
                std::size_t cell = rng_ab.sample(j_cl_flat);
                a = static_cast<int>(cell / 2);
                b = static_cast<int>(cell % 2);
            } else {
                a = static_cast<int>(rng_ab.sample(q_a));
                b = static_cast<int>(rng_ab.sample(b_given_a[a]));
            }
            a = noisy(a, rng_ab);
            b = noisy(b, rng_ab);
            count_ab[a][b] += 1.0;
            std::size_t sym = reliable ? (0u * 2u + static_cast<std::size_t>(a)) % alphabet : 0u;
            count_mc[sym][0] += 1.0;

            // B-then-A arm. The flat agent reports from its stored joint;
            // the coherent agent collapses through B first.
            bool reliable2 = rng_ba.uniform() < reliability;
            int a2, b2;
            if (reliable2) {
                std::size_t cell = rng_ba.sample(j_cl_flat);
                a2 = static_cast<int>(cell / 2);
                b2 = static_cast<int>(cell % 2);
            } else {
                b2 = static_cast<int>(rng_ba.sample(q_b));
                a2 = static_cast<int>(rng_ba.sample(a_given_b[b2]));
            }
            b2 = noisy(b2, rng_ba);
            a2 = noisy(a2, rng_ba);
            count_ba[a2][b2] += 1.0;
            std::size_t sym2 =
                reliable2 ? (1u * 2u + static_cast<std::size_t>(b2)) % alphabet : 0u;
            count_mc[sym2][1] += 1.0;
        }

        TradeoffLevel level;
        level.memory = m;
        level.reliability = reliability;

        const double n = static_cast<double>(cfg.trials);
        double n_a0 = count_ab[0][0] + count_ab[0][1];
        double n_a1 = count_ab[1][0] + count_ab[1][1];
        level.p_a = n_a0 / n;
        if (n_a0 > 0.0) {
            level.p_b_given_a = count_ab[0][0] / n_a0;
        } else {
            level.p_b_given_a = (count_ab[0][0] + 1.0) / (n_a0 + 2.0);
            level.smoothed = true;
        }
        if (n_a1 > 0.0) {
            level.p_b_given_not_a = count_ab[1][0] / n_a1;
        } else {
            level.p_b_given_not_a = (count_ab[1][0] + 1.0) / (n_a1 + 2.0);
            level.smoothed = true;
        }
        level.p_b_first = (count_ba[0][0] + count_ba[1][0]) / n;

        BranchData d{level.p_a, level.p_b_given_a, 1.0 - level.p_a, level.p_b_given_not_a};
        RealizationWeights w = realization_weights(d);
        level.i_abs = std::abs(level.p_b_first - ltp_predict(d));
        if (w.r_a * w.r_not_a < 1e-6) {
            level.fit_ok = false;  // no cross-term support; do not fabricate a phase
        } else {
            PhaseFit fit = extract_phase(level.p_b_first, d);
            level.fit_ok = true;
            level.phase_feasible = fit.feasible;
            level.theta = fit.theta.theta;
        }

        double tv = 0.0;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                tv += std::abs(count_ab[a][b] - count_ba[a][b]) / n;
                level.joint_ab.push_back(count_ab[a][b] / n);
                level.joint_ba.push_back(count_ba[a][b] / n);
            }
        level.order_effect_tv = 0.5 * tv;

        for (auto& row : count_mc)
            for (double& c : row) c /= 2.0 * n;
        level.i_mc = mutual_information(count_mc);

        report.levels.push_back(level);
    }
    return report;
}

void write_tradeoff_csv(const TradeoffReport& r, std::ostream& os) {
    os << "m,I_abs,theta,order_effect,I_MC\n";
    os.precision(17);
    for (const auto& level : r.levels) {
        os << level.memory << ',' << level.i_abs << ',';
        if (level.fit_ok)
            os << level.theta;
        else
            os << "nan";
        os << ',' << level.order_effect_tv << ',' << level.i_mc << '\n';
    }
}

void fit_report_to_csv(const TradeoffReport& r, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_tradeoff_csv(r, out);
    if (!out.flush()) throw std::runtime_error("write failure on '" + path + "'");
}

}  // namespace ctxkit
