#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "panelfair/core.hpp"
#include "panelfair/reduction.hpp"
#include "panelfair/rng.hpp"

namespace panelfair {

/// Importance weights below this are refused rather than divided by.
inline constexpr double kMinObservationProbability = 1e-12;

// ---------------------------------------------------------------------------
// Exp2
// ---------------------------------------------------------------------------

/// Exponential weights over the whole class, mixed with uniform exploration.
/// Loss estimates are shared across hypotheses through the linear structure
/// of <a^h, l>, so one observation updates every expert.
class Exp2Learner {
public:
    Exp2Learner(std::size_t num_hypotheses, double eta, double explore_mix);

    /// explore_mix * uniform + (1 - explore_mix) * softmax(log_weights).
    Policy policy() const;

    /// Estimated loss vector of length 2k'. First half: l_i / q_i where
    /// observed, 0 where masked; q_i is the probability under policy() that
    /// coordinate i is played. Second half: the known constant 1/2.
    /// Throws NumericalError if an observed coordinate has q_i < 1e-12.
    std::vector<double> estimate_losses(const SemiBanditFeedback& feedback, const HypothesisClass& cls) const;

    /// log_weights[h] -= eta * <a^h, l_hat>.
    void update(const SemiBanditFeedback& feedback, const HypothesisClass& cls);

    std::span<const double> log_weights() const noexcept { return log_weights_; }
    double eta() const noexcept { return eta_; }
    double explore_mix() const noexcept { return explore_mix_; }
    std::size_t round() const noexcept { return round_; }

    /// Test hook: overwrite the log-weights directly.
    void set_log_weights(std::vector<double> w);

private:
    std::vector<double> log_weights_;
    double eta_;
    double explore_mix_;
    std::size_t round_ = 0;
};

// ---------------------------------------------------------------------------
// Optimization oracle and separators
// ---------------------------------------------------------------------------

/// One round of estimated losses over the augmented contexts (first half of
/// the semi-bandit vector; the second half is the constant 1/2).
struct EstimatedRound {
    std::vector<ContextId> contexts;
    std::vector<double> losses;
};

/// argmin_h sum_t sum_i h(x_{t,i}) (l_hat_{t,i} - 1/2), lowest index on ties.
std::size_t erm_oracle(std::span<const EstimatedRound> history, const HypothesisClass& cls);

/// argmin_h sum_x h(x) weight[x], lowest index on ties.
std::size_t erm_oracle_weighted(std::span<const double> context_weights, const HypothesisClass& cls);

/// True iff every pair of distinct hypotheses disagrees somewhere on `separator`.
bool is_separator(const HypothesisClass& cls, std::span<const ContextId> separator);

/// Greedy cover: repeatedly take the context that splits the most pairs not yet
/// split (lowest id on ties). The result is verified before it is returned.
std::vector<ContextId> find_separator(const HypothesisClass& cls);

// ---------------------------------------------------------------------------
// Context-semi-bandit FTPL with resampling
// ---------------------------------------------------------------------------

enum class EstimatorMode {
    /// K_i = number of fresh draws until coordinate i is played, capped at L.
    GeometricResampling,
    /// K_i = 1 / max(empirical marginal, 1/L).
    PlugIn,
};

std::string to_string(EstimatorMode mode);
EstimatorMode estimator_mode_from_string(const std::string& text);

struct FtplParams {
    double omega = 1.0;
    std::size_t L = 1;
    std::size_t R = 1;
    EstimatorMode mode = EstimatorMode::GeometricResampling;
};

struct ResampleResult {
    Policy empirical;
    std::size_t realized;
};

class FtplLearner {
public:
    /// Throws ConfigError if the separator does not separate the class, or if
    /// omega <= 0, L == 0 or R == 0.
    FtplLearner(const HypothesisClass& cls, std::vector<ContextId> separator, FtplParams params);

    /// One sample from the implicit perturbed-leader distribution: a Laplace(omega)
    /// fake loss on each separator context, then the oracle on history + fakes.
    std::size_t draw(Rng& rng) const;

    /// R independent draws -> empirical policy, plus one realized draw from it.
    ResampleResult resample(Rng& rng) const;

    /// Append this round's loss estimates. `empirical` is the policy reported by
    /// resample() for this round (used by the plug-in estimator).
    void update(const SemiBanditFeedback& feedback, const Policy& empirical, Rng& rng);

    /// First-half estimates the update would produce, without changing state.
    std::vector<double> estimate_losses(const SemiBanditFeedback& feedback, const Policy& empirical,
                                        Rng& rng) const;

    const std::vector<ContextId>& separator() const noexcept { return separator_; }
    const FtplParams& params() const noexcept { return params_; }
    const std::vector<EstimatedRound>& history() const noexcept { return history_; }
    std::span<const double> context_weights() const noexcept { return context_weights_; }

private:
    HypothesisClass cls_;
    std::vector<ContextId> separator_;
    FtplParams params_;
    std::vector<EstimatedRound> history_;
    // sum over history of (l_hat - 1/2) per context, and sum_x h(x) * that per hypothesis.
    std::vector<double> context_weights_;
    std::vector<double> base_scores_;
};

/// R draws from an arbitrary sampler, returned as an empirical policy over n hypotheses.
template <typename Sampler>
Policy empirical_policy(std::size_t n, std::size_t R, Sampler&& sample) {
    std::vector<double> counts(n, 0.0);
    for (std::size_t r = 0; r < R; ++r) counts[sample()] += 1.0;
    for (double& c : counts) c /= static_cast<double>(R);
    return Policy::normalized(std::move(counts));
}

}  // namespace panelfair
