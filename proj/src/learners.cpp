#include "panelfair/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "panelfair/errors.hpp"

namespace panelfair {

namespace {

void check_feedback(const SemiBanditFeedback& fb) {
    const std::size_t width = fb.width();
    if (fb.augmented_contexts.size() != width || fb.action.size() != 2 * width || fb.losses.size() != 2 * width) {
        throw ConfigError("semi-bandit feedback has inconsistent dimensions");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Exp2
// ---------------------------------------------------------------------------

Exp2Learner::Exp2Learner(std::size_t num_hypotheses, double eta, double explore_mix)
    : log_weights_(num_hypotheses, 0.0), eta_(eta), explore_mix_(explore_mix) {
    if (num_hypotheses == 0) throw ConfigError("Exp2 needs a nonempty class");
    if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("Exp2 learning rate must be positive");
    if (!(explore_mix >= 0.0 && explore_mix < 1.0)) throw ConfigError("Exp2 exploration mix must lie in [0, 1)");
}

Policy Exp2Learner::policy() const {
    const double top = *std::max_element(log_weights_.begin(), log_weights_.end());
    std::vector<double> w(log_weights_.size());
    double sum = 0.0;
    for (std::size_t h = 0; h < w.size(); ++h) {
        w[h] = std::exp(log_weights_[h] - top);
        sum += w[h];
    }
    const double uniform = 1.0 / static_cast<double>(w.size());
    for (double& v : w) v = explore_mix_ * uniform + (1.0 - explore_mix_) * (v / sum);
    return Policy::normalized(std::move(w));
}

std::vector<double> Exp2Learner::estimate_losses(const SemiBanditFeedback& feedback,
                                                 const HypothesisClass& cls) const {
    check_feedback(feedback);
    if (cls.size() != log_weights_.size()) throw ConfigError("class size does not match the Exp2 state");
    const std::size_t width = feedback.width();
    const auto marginals = policy_marginals(policy(), cls);

    std::vector<double> estimate(2 * width, 0.5);
    for (std::size_t i = 0; i < width; ++i) {
        if (!feedback.losses.observed(i)) {
            estimate[i] = 0.0;
            continue;
        }
        const double q = marginals[static_cast<std::size_t>(feedback.augmented_contexts[i])];
        if (q < kMinObservationProbability) {
            throw NumericalError("observed coordinate " + std::to_string(i) + " has play probability " +
                                 std::to_string(q));
        }
        estimate[i] = feedback.losses.at(i) / q;
    }
    return estimate;
}

void Exp2Learner::update(const SemiBanditFeedback& feedback, const HypothesisClass& cls) {
    const auto estimate = estimate_losses(feedback, cls);
    const std::size_t width = feedback.width();
    for (std::size_t h = 0; h < cls.size(); ++h) {
        double inner = 0.0;
        for (std::size_t i = 0; i < width; ++i) {
            inner += cls[h](feedback.augmented_contexts[i]) ? estimate[i] : estimate[width + i];
        }
        log_weights_[h] -= eta_ * inner;
    }
    // Shift so the largest log-weight is 0; the policy is invariant to this.
    const double top = *std::max_element(log_weights_.begin(), log_weights_.end());
    for (double& w : log_weights_) w -= top;
    ++round_;
}

void Exp2Learner::set_log_weights(std::vector<double> w) {
    if (w.size() != log_weights_.size()) throw ConfigError("log-weight vector has the wrong size");
    log_weights_ = std::move(w);
}

// ---------------------------------------------------------------------------
// Oracle and separators
// ---------------------------------------------------------------------------

std::size_t erm_oracle(std::span<const EstimatedRound> history, const HypothesisClass& cls) {
    std::size_t best = 0;
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t h = 0; h < cls.size(); ++h) {
        double score = 0.0;
        for (const auto& round : history) {
            if (round.contexts.size() != round.losses.size()) {
                throw ConfigError("estimated round has mismatched contexts and losses");
            }
            for (std::size_t i = 0; i < round.contexts.size(); ++i) {
                if (cls[h](round.contexts[i])) score += round.losses[i] - 0.5;
            }
        }
        if (score < best_score) {
            best_score = score;
            best = h;
        }
    }
    return best;
}

std::size_t erm_oracle_weighted(std::span<const double> context_weights, const HypothesisClass& cls) {
    if (context_weights.size() != cls.universe_size()) throw ConfigError("weight vector does not cover the universe");
    std::size_t best = 0;
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t h = 0; h < cls.size(); ++h) {
        const auto& table = cls[h].predictions();
        double score = 0.0;
        for (std::size_t x = 0; x < table.size(); ++x) {
            if (table[x]) score += context_weights[x];
        }
        if (score < best_score) {
            best_score = score;
            best = h;
        }
    }
    return best;
}

bool is_separator(const HypothesisClass& cls, std::span<const ContextId> separator) {
    for (ContextId x : separator) {
        if (x < 0 || static_cast<std::size_t>(x) >= cls.universe_size()) return false;
    }
    for (std::size_t a = 0; a < cls.size(); ++a) {
        for (std::size_t b = a + 1; b < cls.size(); ++b) {
            const bool split = std::any_of(separator.begin(), separator.end(),
                                           [&](ContextId x) { return cls[a](x) != cls[b](x); });
            if (!split) return false;
        }
    }
    return true;
}

std::vector<ContextId> find_separator(const HypothesisClass& cls) {
    std::vector<std::pair<std::size_t, std::size_t>> open;
    for (std::size_t a = 0; a < cls.size(); ++a) {
        for (std::size_t b = a + 1; b < cls.size(); ++b) {
            if (cls[a] == cls[b]) throw InputError("class contains duplicate hypotheses; no separator exists");
            open.emplace_back(a, b);
        }
    }
    std::vector<ContextId> chosen;
    const auto n = static_cast<ContextId>(cls.universe_size());
    while (!open.empty()) {
        ContextId best = -1;
        std::size_t best_count = 0;
        for (ContextId x = 0; x < n; ++x) {
            const auto count = static_cast<std::size_t>(std::count_if(
                open.begin(), open.end(), [&](const auto& p) { return cls[p.first](x) != cls[p.second](x); }));
            if (count > best_count) {
                best_count = count;
                best = x;
            }
        }
        if (best < 0) throw InvariantError("no context splits the remaining hypothesis pairs");
        chosen.push_back(best);
        std::erase_if(open, [&](const auto& p) { return cls[p.first](best) != cls[p.second](best); });
    }
    if (!is_separator(cls, chosen)) throw InvariantError("greedy separator failed verification");
    return chosen;
}

// ---------------------------------------------------------------------------
// FTPL with resampling
// ---------------------------------------------------------------------------

std::string to_string(EstimatorMode mode) {
    return mode == EstimatorMode::PlugIn ? "plugin" : "geometric";
}

EstimatorMode estimator_mode_from_string(const std::string& text) {
    if (text == "geometric" || text == "geometric_resampling") return EstimatorMode::GeometricResampling;
    if (text == "plugin" || text == "plug_in" || text == "plug-in") return EstimatorMode::PlugIn;
    throw ConfigError("unknown estimator mode '" + text + "'");
}

FtplLearner::FtplLearner(const HypothesisClass& cls, std::vector<ContextId> separator, FtplParams params)
    : cls_(cls),
      separator_(std::move(separator)),
      params_(params),
      context_weights_(cls.universe_size(), 0.0),
      base_scores_(cls.size(), 0.0) {
    if (!(params_.omega > 0.0) || !std::isfinite(params_.omega)) throw ConfigError("FTPL omega must be positive");
    if (params_.L == 0) throw ConfigError("FTPL resampling cap L must be >= 1");
    if (params_.R == 0) throw ConfigError("FTPL resample count R must be >= 1");
    if (!is_separator(cls_, separator_)) throw ConfigError("separator set does not separate the class");
}

std::size_t FtplLearner::draw(Rng& rng) const {
    thread_local std::vector<double> noise;
    noise.resize(separator_.size());
    for (double& z : noise) z = laplace(rng, params_.omega);

    std::size_t best = 0;
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t h = 0; h < cls_.size(); ++h) {
        double score = base_scores_[h];
        for (std::size_t j = 0; j < separator_.size(); ++j) {
            if (cls_[h](separator_[j])) score += noise[j];
        }
        if (score < best_score) {
            best_score = score;
            best = h;
        }
    }
    return best;
}

ResampleResult FtplLearner::resample(Rng& rng) const {
    Policy empirical = empirical_policy(cls_.size(), params_.R, [&] { return draw(rng); });
    const std::size_t realized = sample_hypothesis(empirical, rng);
    return {std::move(empirical), realized};
}

std::vector<double> FtplLearner::estimate_losses(const SemiBanditFeedback& feedback, const Policy& empirical,
                                                 Rng& rng) const {
    check_feedback(feedback);
    if (empirical.size() != cls_.size()) throw ConfigError("empirical policy does not match the class");
    const std::size_t width = feedback.width();
    std::vector<double> estimate(width, 0.0);

    // Coordinates that need an inverse-probability factor.
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < width; ++i) {
        if (!feedback.losses.observed(i)) continue;
        const double loss = feedback.losses.at(i);
        if (loss == 0.0) continue;
        estimate[i] = loss;
        pending.push_back(i);
    }
    if (pending.empty()) return estimate;

    if (params_.mode == EstimatorMode::PlugIn) {
        const auto marginals = policy_marginals(empirical, cls_);
        const double floor = 1.0 / static_cast<double>(params_.L);
        for (std::size_t i : pending) {
            const double q = marginals[static_cast<std::size_t>(feedback.augmented_contexts[i])];
            estimate[i] *= 1.0 / std::max(q, floor);
        }
        return estimate;
    }

    // Geometric resampling: one shared replay sequence serves every coordinate.
    std::vector<std::size_t> counts(width, params_.L);
    for (std::size_t replay = 1; replay <= params_.L && !pending.empty(); ++replay) {
        const Hypothesis& h = cls_[draw(rng)];
        std::erase_if(pending, [&](std::size_t i) {
            if (!h(feedback.augmented_contexts[i])) return false;
            counts[i] = replay;
            return true;
        });
    }
    for (std::size_t i = 0; i < width; ++i) {
        if (estimate[i] != 0.0) estimate[i] *= static_cast<double>(counts[i]);
    }
    return estimate;
}

void FtplLearner::update(const SemiBanditFeedback& feedback, const Policy& empirical, Rng& rng) {
    auto estimate = estimate_losses(feedback, empirical, rng);
    for (std::size_t i = 0; i < estimate.size(); ++i) {
        const auto x = static_cast<std::size_t>(feedback.augmented_contexts[i]);
        const double delta = estimate[i] - 0.5;
        context_weights_[x] += delta;
        for (std::size_t h = 0; h < cls_.size(); ++h) {
            if (cls_[h](feedback.augmented_contexts[i])) base_scores_[h] += delta;
        }
    }
    history_.push_back({feedback.augmented_contexts, std::move(estimate)});
}

}  // namespace panelfair
