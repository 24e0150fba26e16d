#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "panelfair/core.hpp"
#include "panelfair/environment.hpp"
#include "panelfair/learners.hpp"
#include "panelfair/losses.hpp"

namespace panelfair {

enum class Algorithm { Exp2, Ftpl };

std::string to_string(Algorithm algorithm);
Algorithm algorithm_from_string(const std::string& text);

/// Learner block of a run config. Unset fields fall back to the preset.
struct LearnerConfig {
    Algorithm algorithm = Algorithm::Exp2;
    /// "exp2", "ftpl" or "ftpl_proof"; empty selects the preset named after the algorithm.
    std::string preset;
    std::optional<double> eta;
    std::optional<double> explore_mix;
    std::optional<double> omega;
    std::optional<std::size_t> L;
    std::optional<std::size_t> R;
    std::optional<std::size_t> C;
    EstimatorMode estimator_mode = EstimatorMode::GeometricResampling;
};

/// Every learner parameter after presets and overrides are applied.
struct ResolvedLearner {
    Algorithm algorithm = Algorithm::Exp2;
    std::string preset;
    std::size_t C = 1;
    double eta = 0.0;
    double explore_mix = 0.0;
    double omega = 0.0;
    std::size_t L = 1;
    std::size_t R = 1;
    EstimatorMode estimator_mode = EstimatorMode::GeometricResampling;
    std::vector<ContextId> separator;
};

/// ceil(x) that does not round 3.0000000000000004 up to 4.
std::size_t guarded_ceil(double x);

/// Presets:
///   exp2:       C = ceil(T^(1/5))
///   ftpl:       C = ceil(T^(4/45)), R = T, L = ceil(T^(1/3))
///   ftpl_proof: as ftpl but R = ceil(T^(38/45))
/// Shared defaults: eta = sqrt(2 ln|H| / ((k + 2C) T)), explore_mix = T^(-1/2),
/// omega = sqrt(T) / |S|.
ResolvedLearner resolve_learner(const LearnerConfig& config, std::size_t T, std::size_t k,
                                const HypothesisClass& cls);

struct RunConfig {
    std::string name = "run";
    std::size_t T = 1;
    std::size_t k = 2;
    std::uint64_t seed = 0;
    std::shared_ptr<const ContextUniverse> universe;
    std::shared_ptr<const HypothesisClass> cls;
    EnvironmentScript environment;
    LearnerConfig learner;
    /// The comparator is Q_{alpha - epsilon, gamma}.
    double benchmark_epsilon = 0.0;
    /// Keep per-round reduction traces in the record.
    bool record_traces = true;
    /// Canonical JSON of the config this was built from (empty if built in code).
    std::string source_json;

    /// Throws ConfigError on T < 1, k < 2, missing parts, or a script that cannot serve the run.
    void validate() const;
};

/// Per-round facts about the reduced round, kept for post-hoc range checks.
struct RoundTrace {
    double inner_product = 0.0;
    std::size_t width = 0;
    /// Every loss entry is one of 0, 1/2, 1.
    bool loss_entries_valid = true;
};

struct RunRecord {
    std::string name;
    std::size_t T = 0;
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::string config_json;
    ResolvedLearner learner;
    double alpha = 0.0;
    double gamma = 1.0;
    double benchmark_epsilon = 0.0;

    RegretLedger ledger;
    double lp_benchmark = 0.0;
    double lp_benchmark_lagrangian = 0.0;
    long comparator_unfairness = 0;
    std::vector<double> comparator_policy;
    RegretReport report;

    std::vector<RoundTrace> traces;
    std::uint64_t masked_reads = 0;
    double runtime_s = 0.0;
    std::string version;
};

/// Exp2 loop: deploy pi^t, environment emits the round, draw h^t ~ pi^t,
/// audit pi^t, reduce, update on masked losses. The error column is Error(pi^t).
RunRecord run_protocol_exp2(const RunConfig& config);

/// FTPL loop: environment emits the round (adaptive rules see the previous
/// empirical policy), resample (pi_hat^t, h_hat^t), audit pi_hat^t, reduce
/// with h_hat^t, update. Error and Lagrangian columns use h_hat^t, the
/// unfairness column uses pi_hat^t.
RunRecord run_protocol_ftpl(const RunConfig& config);

/// Dispatches on config.learner.algorithm.
RunRecord run_protocol(const RunConfig& config);

/// Build identifier embedded in summaries.
std::string version_string();

}  // namespace panelfair
