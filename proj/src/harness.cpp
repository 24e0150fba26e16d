#include "panelfair/harness.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "panelfair/errors.hpp"
#include "panelfair/reduction.hpp"

#ifndef PANELFAIR_VERSION
#define PANELFAIR_VERSION "unknown"
#endif

namespace panelfair {

namespace {

using Clock = std::chrono::steady_clock;

RoundTrace trace_of(const ReducedRound& reduced) {
    RoundTrace trace;
    trace.inner_product = reduced.inner_product();
    trace.width = reduced.width();
    for (double v : reduced.loss_vector) {
        if (v != 0.0 && v != 0.5 && v != 1.0) trace.loss_entries_valid = false;
    }
    return trace;
}

RunRecord start_record(const RunConfig& config, const ResolvedLearner& learner) {
    RunRecord record;
    record.name = config.name;
    record.T = config.T;
    record.k = config.k;
    record.seed = config.seed;
    record.config_json = config.source_json;
    record.learner = learner;
    record.alpha = config.environment.panels.alpha();
    record.gamma = config.environment.panels.gamma();
    record.benchmark_epsilon = config.benchmark_epsilon;
    record.version = version_string();
    return record;
}

// Hindsight comparators over the realized rounds and panels.
void finish_record(RunRecord& record, const RunConfig& config, const std::vector<AuditedRound>& history) {
    const HypothesisClass& cls = *config.cls;
    const double alpha_eff = std::max(0.0, record.alpha - record.benchmark_epsilon);

    const ComparatorSolution best = best_fair_policy(history, alpha_eff, record.gamma, cls);
    record.lp_benchmark = best.objective;
    record.comparator_policy.assign(best.policy.weights().begin(), best.policy.weights().end());

    std::vector<AuditReport> reports;
    reports.reserve(record.ledger.size());
    for (const auto& row : record.ledger.rows()) reports.push_back({row.rho1, row.rho2, row.rho1 != row.rho2});
    const ComparatorSolution best_lag = best_fair_lagrangian(history, alpha_eff, record.gamma, cls,
                                                             static_cast<double>(record.learner.C), reports);
    // The comparator's Lagrangian total is recomputed from its marginals so it
    // matches the per-round column definition exactly.
    const auto lag_marginals = policy_marginals(best_lag.policy, cls);
    double lag_total = 0.0;
    for (std::size_t t = 0; t < history.size(); ++t) {
        const LagrangianParams params(static_cast<double>(record.learner.C), reports[t].first, reports[t].second);
        lag_total += lagrangian_loss(lag_marginals, history[t].instance, params);
    }
    record.lp_benchmark_lagrangian = lag_total;

    const auto marginals = policy_marginals(best.policy, cls);
    long comparator_unfair = 0;
    for (const auto& round : history) comparator_unfair += unfair_loss(marginals, round.instance, *round.panel);
    record.comparator_unfairness = comparator_unfair;

    record.report = regret_report(record.ledger, record.lp_benchmark, record.lp_benchmark_lagrangian,
                                  record.comparator_unfairness);
}

}  // namespace

std::string to_string(Algorithm algorithm) { return algorithm == Algorithm::Ftpl ? "ftpl" : "exp2"; }

Algorithm algorithm_from_string(const std::string& text) {
    if (text == "exp2") return Algorithm::Exp2;
    if (text == "ftpl") return Algorithm::Ftpl;
    throw ConfigError("unknown algorithm '" + text + "'");
}

std::size_t guarded_ceil(double x) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError("schedule value must be finite and >= 0");
    return static_cast<std::size_t>(std::ceil(x - 1e-9));
}

ResolvedLearner resolve_learner(const LearnerConfig& config, std::size_t T, std::size_t k,
                                const HypothesisClass& cls) {
    if (T == 0) throw ConfigError("T must be >= 1");
    ResolvedLearner out;
    out.algorithm = config.algorithm;
    out.preset = config.preset.empty() ? to_string(config.algorithm) : config.preset;
    out.estimator_mode = config.estimator_mode;
    const auto t = static_cast<double>(T);

    if (out.preset == "exp2") {
        out.C = guarded_ceil(std::pow(t, 1.0 / 5.0));
        out.R = 1;
        out.L = 1;
    } else if (out.preset == "ftpl" || out.preset == "ftpl_proof") {
        out.C = guarded_ceil(std::pow(t, 4.0 / 45.0));
        out.R = out.preset == "ftpl" ? T : guarded_ceil(std::pow(t, 38.0 / 45.0));
        out.L = guarded_ceil(std::pow(t, 1.0 / 3.0));
    } else {
        throw ConfigError("unknown learner preset '" + out.preset + "'");
    }
    if (config.C) out.C = *config.C;
    if (config.R) out.R = *config.R;
    if (config.L) out.L = *config.L;
    out.C = std::max<std::size_t>(out.C, 1);
    out.R = std::max<std::size_t>(out.R, 1);
    out.L = std::max<std::size_t>(out.L, 1);
    if (config.C && *config.C == 0) throw ConfigError("C must be >= 1");
    if (config.R && *config.R == 0) throw ConfigError("R must be >= 1");
    if (config.L && *config.L == 0) throw ConfigError("L must be >= 1");

    const double width = static_cast<double>(k + 2 * out.C);
    const double log_h = std::log(static_cast<double>(std::max<std::size_t>(cls.size(), 2)));
    out.eta = config.eta.value_or(std::sqrt(2.0 * log_h / (width * t)));
    out.explore_mix = config.explore_mix.value_or(std::min(0.5, 1.0 / std::sqrt(t)));

    if (out.algorithm == Algorithm::Ftpl) {
        out.separator = find_separator(cls);
        const double s = static_cast<double>(std::max<std::size_t>(out.separator.size(), 1));
        out.omega = config.omega.value_or(std::sqrt(t) / s);
    } else {
        out.omega = config.omega.value_or(0.0);
    }
    return out;
}

void RunConfig::validate() const {
    if (T < 1) throw ConfigError("T must be >= 1");
    if (k < 2) throw ConfigError("k must be >= 2");
    if (!universe) throw ConfigError("run config has no context universe");
    if (!cls) throw ConfigError("run config has no hypothesis class");
    if (cls->universe_size() != universe->size()) {
        throw ConfigError("hypothesis tables do not cover the universe");
    }
    if (!(benchmark_epsilon >= 0.0)) throw ConfigError("benchmark epsilon must be >= 0");
    environment.validate(*universe, T, k);
}

RunRecord run_protocol_exp2(const RunConfig& config) {
    config.validate();
    if (config.learner.algorithm != Algorithm::Exp2) throw ConfigError("run_protocol_exp2 needs an exp2 learner");
    const auto started = Clock::now();
    const HypothesisClass& cls = *config.cls;
    const ResolvedLearner params = resolve_learner(config.learner, config.T, config.k, cls);

    RunRecord record = start_record(config, params);
    Exp2Learner learner(cls.size(), params.eta, params.explore_mix);
    Environment env(config.environment, config.universe->size(), config.k, config.seed);
    Rng draw_rng = substream(config.seed, "learner");
    const ContextId fallback = config.universe->default_context();
    const std::uint64_t masked_before = MaskedLosses::masked_read_attempts();

    for (std::size_t t = 1; t <= config.T; ++t) {
        const Policy policy = learner.policy();
        const auto marginals = policy_marginals(policy, cls);
        const AuditedRound round = env.next(t, marginals);
        const std::size_t h = sample_hypothesis(policy, draw_rng);
        const AuditReport report = audit_round(marginals, round.instance, *round.panel, fallback);

        const ReducedRound reduced = reduce_round(round.instance, cls[h], report, params.C);
        if (config.record_traces) record.traces.push_back(trace_of(reduced));
        learner.update(semi_bandit_observe(reduced), cls);

        LedgerRow row;
        row.t = t;
        row.error = error_loss(marginals, round.instance);
        row.unfair = report.is_violation ? 1 : 0;
        row.lagrangian = lagrangian_loss(marginals, round.instance,
                                         LagrangianParams(static_cast<double>(params.C), report.first, report.second));
        row.rho1 = report.first;
        row.rho2 = report.second;
        row.hyp_index = h;
        record.ledger.record(row);
    }

    record.masked_reads = MaskedLosses::masked_read_attempts() - masked_before;
    finish_record(record, config, env.history());
    record.runtime_s = std::chrono::duration<double>(Clock::now() - started).count();
    return record;
}

RunRecord run_protocol_ftpl(const RunConfig& config) {
    config.validate();
    if (config.learner.algorithm != Algorithm::Ftpl) throw ConfigError("run_protocol_ftpl needs an ftpl learner");
    const auto started = Clock::now();
    const HypothesisClass& cls = *config.cls;
    const ResolvedLearner params = resolve_learner(config.learner, config.T, config.k, cls);

    RunRecord record = start_record(config, params);
    FtplLearner learner(cls, params.separator, FtplParams{params.omega, params.L, params.R, params.estimator_mode});
    Environment env(config.environment, config.universe->size(), config.k, config.seed);
    Rng resample_rng = substream(config.seed, "resample");
    Rng estimate_rng = substream(config.seed, "estimate");
    const ContextId fallback = config.universe->default_context();
    const std::uint64_t masked_before = MaskedLosses::masked_read_attempts();

    std::vector<double> previous = policy_marginals(Policy::uniform(cls.size()), cls);
    for (std::size_t t = 1; t <= config.T; ++t) {
        const AuditedRound round = env.next(t, previous);
        const ResampleResult sample = learner.resample(resample_rng);
        const auto marginals = policy_marginals(sample.empirical, cls);
        const Hypothesis& realized = cls[sample.realized];
        const AuditReport report = audit_round(marginals, round.instance, *round.panel, fallback);

        const ReducedRound reduced = reduce_round(round.instance, realized, report, params.C);
        if (config.record_traces) record.traces.push_back(trace_of(reduced));
        learner.update(semi_bandit_observe(reduced), sample.empirical, estimate_rng);

        std::vector<double> realized_marginals(realized.predictions().begin(), realized.predictions().end());
        LedgerRow row;
        row.t = t;
        row.error = error_loss(realized_marginals, round.instance);
        row.unfair = report.is_violation ? 1 : 0;
        row.lagrangian = lagrangian_loss(realized_marginals, round.instance,
                                         LagrangianParams(static_cast<double>(params.C), report.first, report.second));
        row.rho1 = report.first;
        row.rho2 = report.second;
        row.hyp_index = sample.realized;
        record.ledger.record(row);
        previous = marginals;
    }

    record.masked_reads = MaskedLosses::masked_read_attempts() - masked_before;
    finish_record(record, config, env.history());
    record.runtime_s = std::chrono::duration<double>(Clock::now() - started).count();
    return record;
}

RunRecord run_protocol(const RunConfig& config) {
    return config.learner.algorithm == Algorithm::Ftpl ? run_protocol_ftpl(config) : run_protocol_exp2(config);
}

std::string version_string() { return std::string("panelfair ") + PANELFAIR_VERSION; }

}  // namespace panelfair
