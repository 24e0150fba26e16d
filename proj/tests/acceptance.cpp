// Prints one PASS/FAIL line per acceptance criterion and exits nonzero on any FAIL.
// Usage: acceptance <path to the panelfair CLI>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "panelfair/builders.hpp"
#include "panelfair/config.hpp"
#include "panelfair/harness.hpp"
#include "panelfair/learners.hpp"
#include "panelfair/losses.hpp"
#include "panelfair/reduction.hpp"
#include "panelfair/verify.hpp"

using namespace panelfair;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& what) {
    std::cout << "criterion " << id << ": " << (pass ? "PASS" : "FAIL") << "  " << what << std::endl;
    if (!pass) ++failures;
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_1() {
    const auto start = Clock::now();
    const auto ident = check_reduction_identities(10000, 101);
    const auto equiv = check_representative_equivalence(10000, 102);
    const auto joint = check_joint_loss(1000, 103, 5);
    const double elapsed = seconds_since(start);
    const bool pass = ident.pass && ident.max_discrepancy < 1e-9 && equiv.pass && equiv.max_discrepancy == 0.0 &&
                      joint.pass && elapsed < 60.0;
    report(1, pass,
           "identities max " + fmt(ident.max_discrepancy) + " (< 1e-9), panel mismatches " +
               fmt(equiv.max_discrepancy) + " (= 0), joint-loss slack " + fmt(joint.max_discrepancy) + " (" +
               (joint.pass ? "ok" : "violated") + "), " + fmt(elapsed) + " s (< 60)");
}

void criterion_2() {
    const auto g = gap_example_values(0.2, 0.1, Policy::uniform(2));
    const bool pass = g.realized_unfairness == 1.0 && g.policy_unfairness == 0.0 && check_gap_example().pass;
    report(2, pass,
           "realized unfairness " + fmt(g.realized_unfairness) + " (= 1), policy unfairness " +
               fmt(g.policy_unfairness) + " (= 0)");
}

void criterion_3() {
    Rng rng = substream(301, "acceptance");
    double worst = 0.0;
    std::size_t coordinates = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 4 + uniform_index(rng, 3);
        const auto cls = random_class(n, 2 + uniform_index(rng, 10), rng);
        Exp2Learner learner(cls.size(), 0.1, 0.5 * uniform01(rng));
        std::vector<double> w(cls.size());
        for (double& v : w) v = -4.0 * uniform01(rng);
        learner.set_log_weights(w);
        const Policy pi = learner.policy();

        const std::size_t k = 2 + uniform_index(rng, 3);
        std::vector<ContextId> xs;
        std::vector<Bit> ys;
        for (std::size_t i = 0; i < k; ++i) {
            xs.push_back(static_cast<ContextId>(uniform_index(rng, n)));
            ys.push_back(static_cast<Bit>(uniform_index(rng, 2)));
        }
        const RoundInstance round(xs, ys);
        const auto r1 = static_cast<ContextId>(uniform_index(rng, n));
        const auto r2 = static_cast<ContextId>(uniform_index(rng, n));
        const AuditReport rep{r1, r2, r1 != r2};
        const std::size_t C = 1 + uniform_index(rng, 4);

        const ReducedRound truth = reduce_round(round, cls[0], rep, C);
        const std::size_t width = truth.width();
        std::vector<double> mean(width, 0.0);
        for (std::size_t h = 0; h < cls.size(); ++h) {
            const auto est = learner.estimate_losses(semi_bandit_observe(reduce_round(round, cls[h], rep, C)), cls);
            for (std::size_t i = 0; i < width; ++i) mean[i] += pi[h] * est[i];
        }
        for (std::size_t i = 0; i < width; ++i) {
            double q = 0.0;
            for (std::size_t h = 0; h < cls.size(); ++h) q += cls[h](truth.augmented_contexts[i]) ? pi[h] : 0.0;
            if (q <= 0.0) continue;
            ++coordinates;
            worst = std::max(worst, std::abs(mean[i] - truth.loss_vector[i]));
        }
    }
    report(3, worst < 1e-12,
           "max |E[l_hat] - l| " + fmt(worst) + " (< 1e-12) over " + std::to_string(coordinates) +
               " coordinates in 1000 rounds");
}

void criterion_4() {
    const auto start = Clock::now();
    const auto c = check_estimation_concentration(50, 10000, 0.05, 20, 401, 2);
    const double elapsed = seconds_since(start);
    report(4, c.pass && elapsed < 300.0,
           "miss fraction " + fmt(c.max_discrepancy) + " (<= " + fmt(c.tolerance) + "), " + fmt(elapsed) +
               " s (< 300)");
}

struct TrendRuns {
    double error_rate_small = 0.0;
    double error_rate_large = 0.0;
    double unfair_rate_small = 0.0;
    double unfair_rate_large = 0.0;
    bool traces_ok = true;
    std::size_t trace_count = 0;
    std::uint64_t masked_reads = 0;
    std::uint64_t masked_counter = 0;
    double seconds = 0.0;
};

TrendRuns trend_runs() {
    TrendRuns out;
    const auto start = Clock::now();
    const std::uint64_t counter_before = MaskedLosses::masked_read_attempts();
    constexpr int kSeeds = 10;
    for (std::size_t T : {std::size_t{2000}, std::size_t{20000}}) {
        double err = 0.0, unfair = 0.0;
        for (int seed = 1; seed <= kSeeds; ++seed) {
            const RunConfig config = run_config_from_text(R"({"scenario": "two_groups", "T": )" + std::to_string(T) +
                                                          R"(, "seed": )" + std::to_string(seed) + "}");
            const RunRecord r = run_protocol(config);
            err += r.report.error_regret / static_cast<double>(T);
            unfair += static_cast<double>(r.report.unfairness_total) / static_cast<double>(T);
            out.masked_reads += r.masked_reads;
            for (const auto& tr : r.traces) {
                ++out.trace_count;
                const bool ok = tr.width == config.k + 2 * r.learner.C && tr.inner_product >= 0.0 &&
                                tr.inner_product <= static_cast<double>(tr.width) && tr.loss_entries_valid;
                out.traces_ok = out.traces_ok && ok;
            }
            if (r.traces.size() != T) out.traces_ok = false;
        }
        (T == 2000 ? out.error_rate_small : out.error_rate_large) = err / kSeeds;
        (T == 2000 ? out.unfair_rate_small : out.unfair_rate_large) = unfair / kSeeds;
    }
    out.masked_counter = MaskedLosses::masked_read_attempts() - counter_before;
    out.seconds = seconds_since(start);
    return out;
}

void criteria_5_7_8() {
    const TrendRuns r = trend_runs();
    const bool error_ok = r.error_rate_large <= 0.5 * r.error_rate_small;
    const bool unfair_ok = r.unfair_rate_large <= 0.5 * r.unfair_rate_small;
    report(5, error_ok && unfair_ok && r.seconds < 600.0,
           "regret/T " + fmt(r.error_rate_small) + " -> " + fmt(r.error_rate_large) + ", unfairness/T " +
               fmt(r.unfair_rate_small) + " -> " + fmt(r.unfair_rate_large) + " (each <= 0.5x), " +
               fmt(r.seconds) + " s (< 600)");
    report(7, r.traces_ok && r.trace_count > 0,
           std::to_string(r.trace_count) + " rounds with <a, l> in [0, k + 2C] and l entries in {0, 1/2, 1}");
    report(8, r.masked_reads == 0 && r.masked_counter == 0,
           "masked reads " + std::to_string(r.masked_reads) + " (= 0)");
}

void criterion_6() {
    constexpr int kSeeds = 10;
    constexpr std::size_t T = 200;
    double unfair_r1 = 0.0, unfair_r1000 = 0.0;
    for (int seed = 1; seed <= kSeeds; ++seed) {
        for (std::size_t R : {std::size_t{1}, std::size_t{1000}}) {
            const RunConfig config = run_config_from_text(R"({"scenario": "mirror_pair", "T": 200, "seed": )" +
                                                          std::to_string(seed) + R"(, "learner": {"R": )" +
                                                          std::to_string(R) + "}}");
            const double u = static_cast<double>(run_protocol(config).report.unfairness_total) / kSeeds;
            (R == 1 ? unfair_r1 : unfair_r1000) += u;
        }
    }
    report(6, unfair_r1 >= 0.8 * T && unfair_r1000 <= 0.05 * T,
           "mean unfairness R=1 " + fmt(unfair_r1) + " (>= 160), R=1000 " + fmt(unfair_r1000) + " (<= 10)");
}

void criterion_9(const std::string& cli) {
    const fs::path config = fs::path(PANELFAIR_SOURCE_DIR) / "configs" / "mirror_pair.toml";
    const fs::path root = fs::current_path() / "acceptance_determinism";
    fs::remove_all(root);
    bool ran = true;
    for (const char* sub : {"a", "b"}) {
        const std::string cmd = "\"" + cli + "\" run --config \"" + config.string() + "\" --seed 3 --out \"" +
                                (root / sub).string() + "\" > \"" + (root.string() + "_" + sub + ".log") + "\" 2>&1";
        ran = ran && std::system(cmd.c_str()) == 0;
    }
    bool same = ran;
    for (const char* f : {"ledger.csv", "summary.json"}) {
        const auto a = root / "a" / f;
        const auto b = root / "b" / f;
        same = same && fs::exists(a) && fs::exists(b) && slurp(a) == slurp(b) && !slurp(a).empty();
    }
    report(9, same, ran ? "ledger.csv and summary.json byte-identical across two CLI runs" : "CLI run failed");
}

// Exact minimum over the grid {p : p_h in {0, 1/N, ..., 1}, sum p = 1} of the
// summed error, subject to every panel verdict being "no violation". All
// marginals are integers in units of 1/N; the last free coordinate is solved
// in closed form since everything is linear in it.
struct GridConstraint {
    std::vector<int> diff;  // h(x) - h(x') per hypothesis
    long long max_gap;      // largest allowed N * (pi(x) - pi(x'))
};

double grid_minimum(const std::vector<AuditedRound>& history, double alpha, double gamma, const HypothesisClass& cls,
                    long long N) {
    const std::size_t n = cls.size();
    std::vector<GridConstraint> constraints;
    std::vector<long long> cost(n, 0);  // error per hypothesis (already an integer)
    long long cost_const = 0;
    for (const auto& round : history) {
        const auto& inst = round.instance;
        for (std::size_t i = 0; i < inst.k(); ++i) {
            // |pi(x) - y| is pi(x) for y = 0 and 1 - pi(x) for y = 1.
            for (std::size_t h = 0; h < n; ++h) {
                cost[h] += inst.labels[i] ? -static_cast<long long>(cls[h](inst.contexts[i]))
                                          : static_cast<long long>(cls[h](inst.contexts[i]));
            }
            if (inst.labels[i]) cost_const += 1;
        }
        const auto& members = round.panel->members();
        const std::size_t votes = static_cast<std::size_t>(std::ceil(gamma * members.size() - 1e-12));
        for (std::size_t s = 0; s < inst.k(); ++s) {
            for (std::size_t l = 0; l < inst.k(); ++l) {
                const ContextId x = inst.contexts[s], xp = inst.contexts[l];
                if (x == xp) continue;
                // Flagged by at least `votes` members iff the gap exceeds the votes-th smallest d + alpha.
                std::vector<double> d;
                for (const auto& m : members) d.push_back(m(x, xp));
                std::sort(d.begin(), d.end());
                const double bound = d[votes - 1] + alpha;
                if (bound >= 1.0) continue;
                GridConstraint c;
                for (std::size_t h = 0; h < n; ++h) c.diff.push_back(int{cls[h](x)} - int{cls[h](xp)});
                c.max_gap = static_cast<long long>(std::floor(bound * static_cast<double>(N) + 1e-7));
                constraints.push_back(std::move(c));
            }
        }
    }

    long long best = std::numeric_limits<long long>::max();
    std::vector<long long> p(n, 0);
    // Outer coordinates 0..n-3 enumerated, coordinate n-2 solved, n-1 takes the rest.
    auto solve_inner = [&](long long remaining) {
        if (n == 1) {
            long long value = 0;
            p[0] = N;
            for (const auto& c : constraints) {
                if (c.diff[0] * N > c.max_gap) return;
            }
            value = cost[0] * N;
            best = std::min(best, value);
            return;
        }
        const std::size_t a = n - 2, b = n - 1;
        long long lo = 0, hi = remaining;
        for (const auto& c : constraints) {
            long long base = 0;
            for (std::size_t h = 0; h < a; ++h) base += c.diff[h] * p[h];
            base += c.diff[b] * remaining;
            const long long slope = c.diff[a] - c.diff[b];  // gap(t) = base + slope * t, t = p[a]
            const long long room = c.max_gap - base;
            if (slope == 0) {
                if (room < 0) return;
            } else if (slope > 0) {
                hi = std::min(hi, room >= 0 ? room / slope : -((-room + slope - 1) / slope));
            } else {
                const long long s = -slope;
                lo = std::max(lo, room >= 0 ? -(room / s) : (-room + s - 1) / s);
            }
        }
        if (lo > hi) return;
        long long base = 0;
        for (std::size_t h = 0; h < a; ++h) base += cost[h] * p[h];
        base += cost[b] * remaining;
        const long long slope = cost[a] - cost[b];
        best = std::min({best, base + slope * lo, base + slope * hi});
    };
    auto recurse = [&](auto&& self, std::size_t h, long long remaining) -> void {
        if (n < 2 || h == n - 2) {
            solve_inner(remaining);
            return;
        }
        for (long long v = 0; v <= remaining; ++v) {
            p[h] = v;
            self(self, h + 1, remaining - v);
        }
        p[h] = 0;
    };
    recurse(recurse, 0, N);
    if (best == std::numeric_limits<long long>::max()) return std::numeric_limits<double>::infinity();
    return static_cast<double>(cost_const) + static_cast<double>(best) / static_cast<double>(N);
}

void criterion_10() {
    Rng rng = substream(1001, "acceptance");
    double worst = 0.0;
    bool below = false;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + uniform_index(rng, 3);
        const auto cls = random_class(n, 2 + uniform_index(rng, 3), rng);
        const double alpha = 0.05 * static_cast<double>(uniform_index(rng, 3));
        const std::size_t m = 1 + uniform_index(rng, 4);
        const double gamma = static_cast<double>(1 + uniform_index(rng, m)) / static_cast<double>(m);
        std::vector<AuditedRound> history;
        const std::size_t T = 1 + uniform_index(rng, 5);
        for (std::size_t t = 0; t < T; ++t) {
            std::vector<DistanceFunction> members;
            for (std::size_t j = 0; j < m; ++j) members.push_back(random_distance(n, 0.0, 0.8, 0.1, rng));
            const std::size_t k = 2 + uniform_index(rng, 2);
            std::vector<ContextId> xs;
            std::vector<Bit> ys;
            for (std::size_t i = 0; i < k; ++i) {
                xs.push_back(static_cast<ContextId>(uniform_index(rng, n)));
                ys.push_back(static_cast<Bit>(uniform_index(rng, 2)));
            }
            history.push_back({RoundInstance(xs, ys), std::make_shared<const Panel>(members, alpha, gamma)});
        }
        const double lp = best_fair_policy(history, alpha, gamma, cls).objective;
        const double grid = grid_minimum(history, alpha, gamma, cls, 1000);
        worst = std::max(worst, std::abs(lp - grid));
        below = below || grid < lp - 1e-9;
    }
    report(10, worst <= 1e-2, "max |LP - grid(1e-3)| " + fmt(worst) + " (<= 1e-2) over 100 instances" +
                                  (below ? ", grid below LP on some instance" : ""));
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: acceptance <panelfair CLI>\n";
        return 2;
    }
    const auto start = Clock::now();
    const std::string cli = argv[1];
    const std::vector<std::pair<std::vector<int>, std::function<void()>>> steps{
        {{1}, criterion_1},       {{2}, criterion_2}, {{3}, criterion_3},
        {{4}, criterion_4},       {{5, 7, 8}, criteria_5_7_8}, {{6}, criterion_6},
        {{9}, [&] { criterion_9(cli); }}, {{10}, criterion_10}};
    for (const auto& [ids, run] : steps) {
        try {
            run();
        } catch (const std::exception& e) {
            for (int id : ids) report(id, false, std::string("threw: ") + e.what());
        }
    }
    std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << " in "
              << fmt(seconds_since(start)) << " s" << std::endl;
    return failures == 0 ? 0 : 1;
}
