#include "panelfair/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "panelfair/errors.hpp"

namespace panelfair {

ContextUniverse::ContextUniverse(std::vector<Context> contexts, ContextId default_context)
    : contexts_(std::move(contexts)), default_context_(default_context) {
    if (contexts_.empty()) throw InputError("context universe is empty");
    dimension_ = contexts_.front().features.size();
    for (std::size_t i = 0; i < contexts_.size(); ++i) {
        if (contexts_[i].id != static_cast<ContextId>(i)) {
            throw InputError("context ids must be dense and ordered; position " + std::to_string(i) +
                             " holds id " + std::to_string(contexts_[i].id));
        }
        if (contexts_[i].features.size() != dimension_) {
            throw InputError("context " + std::to_string(i) + " has feature dimension " +
                             std::to_string(contexts_[i].features.size()) + ", expected " +
                             std::to_string(dimension_));
        }
    }
    if (!contains(default_context_)) {
        throw InputError("default context " + std::to_string(default_context_) + " is not in the universe");
    }
}

ContextUniverse ContextUniverse::from_features(std::vector<std::vector<double>> features,
                                               ContextId default_context) {
    std::vector<Context> contexts;
    contexts.reserve(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
        contexts.push_back({static_cast<ContextId>(i), std::move(features[i])});
    }
    return ContextUniverse(std::move(contexts), default_context);
}

Hypothesis::Hypothesis(std::vector<Bit> predictions) : predictions_(std::move(predictions)) {
    for (Bit b : predictions_) {
        if (b > 1) throw InputError("hypothesis predictions must be 0 or 1");
    }
}

bool Hypothesis::is_constant() const noexcept {
    return std::adjacent_find(predictions_.begin(), predictions_.end(), std::not_equal_to<>()) ==
           predictions_.end();
}

HypothesisClass::HypothesisClass(std::string name, std::vector<Hypothesis> hypotheses,
                                 ConstantMember constant)
    : name_(std::move(name)), hypotheses_(std::move(hypotheses)) {
    if (hypotheses_.empty()) throw InputError("hypothesis class '" + name_ + "' is empty");
    const std::size_t n = hypotheses_.front().size();
    if (n == 0) throw InputError("hypotheses must cover at least one context");
    std::set<std::vector<Bit>> seen;
    for (std::size_t i = 0; i < hypotheses_.size(); ++i) {
        if (hypotheses_[i].size() != n) {
            throw InputError("hypothesis " + std::to_string(i) + " has " +
                             std::to_string(hypotheses_[i].size()) + " predictions, expected " +
                             std::to_string(n));
        }
        if (!seen.insert(hypotheses_[i].predictions()).second) {
            throw InputError("hypothesis " + std::to_string(i) + " duplicates an earlier prediction table");
        }
    }
    if (constant == ConstantMember::Required && constant_index() == hypotheses_.size()) {
        throw InputError("hypothesis class '" + name_ + "' has no constant hypothesis");
    }
}

std::size_t HypothesisClass::constant_index() const noexcept {
    for (std::size_t i = 0; i < hypotheses_.size(); ++i) {
        if (hypotheses_[i].is_constant()) return i;
    }
    return hypotheses_.size();
}

Policy::Policy(std::vector<double> weights) : weights_(std::move(weights)) {
    if (weights_.empty()) throw ConfigError("policy has no weights");
    double sum = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("policy weights must be finite and nonnegative");
        sum += w;
    }
    if (std::fabs(sum - 1.0) > kSumTolerance) {
        throw ConfigError("policy weights sum to " + std::to_string(sum) + ", expected 1");
    }
}

Policy Policy::uniform(std::size_t n) {
    if (n == 0) throw ConfigError("uniform policy over an empty class");
    return Policy(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Policy Policy::point_mass(std::size_t n, std::size_t index) {
    if (index >= n) throw ConfigError("point mass index out of range");
    std::vector<double> w(n, 0.0);
    w[index] = 1.0;
    return Policy(std::move(w));
}

Policy Policy::normalized(std::vector<double> weights) {
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("weights must be finite and nonnegative");
        sum += w;
    }
    if (!(sum > 0.0)) throw ConfigError("weights sum to zero");
    for (double& w : weights) w /= sum;
    return Policy(std::move(weights));
}

Policy Policy::mixture(double lambda, const Policy& a, const Policy& b) {
    if (a.size() != b.size()) throw ConfigError("mixture of policies with different dimensions");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("mixture weight must lie in [0, 1]");
    std::vector<double> w(a.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = lambda * a[i] + (1.0 - lambda) * b[i];
    return Policy::normalized(std::move(w));
}

RoundInstance::RoundInstance(std::vector<ContextId> ctx, std::vector<Bit> lbl)
    : contexts(std::move(ctx)), labels(std::move(lbl)) {
    if (contexts.size() < 2) throw InputError("a round needs at least two individuals");
    if (labels.size() != contexts.size()) throw InputError("round has mismatched context and label counts");
    for (Bit b : labels) {
        if (b > 1) throw InputError("labels must be 0 or 1");
    }
}

void RoundInstance::validate(const ContextUniverse& universe) const {
    for (ContextId x : contexts) {
        if (!universe.contains(x)) throw InputError("round references unknown context " + std::to_string(x));
    }
}

double policy_marginal(const Policy& policy, const HypothesisClass& cls, ContextId x) {
    if (policy.size() != cls.size()) {
        throw ConfigError("policy has " + std::to_string(policy.size()) + " weights but the class has " +
                          std::to_string(cls.size()) + " hypotheses");
    }
    if (x < 0 || static_cast<std::size_t>(x) >= cls.universe_size()) {
        throw InputError("unknown context " + std::to_string(x));
    }
    double p = 0.0;
    for (std::size_t h = 0; h < cls.size(); ++h) {
        if (cls[h](x)) p += policy[h];
    }
    return std::min(p, 1.0);
}

std::vector<double> policy_marginals(const Policy& policy, const HypothesisClass& cls) {
    if (policy.size() != cls.size()) {
        throw ConfigError("policy has " + std::to_string(policy.size()) + " weights but the class has " +
                          std::to_string(cls.size()) + " hypotheses");
    }
    std::vector<double> out(cls.universe_size(), 0.0);
    for (std::size_t h = 0; h < cls.size(); ++h) {
        const auto& table = cls[h].predictions();
        for (std::size_t x = 0; x < out.size(); ++x) {
            if (table[x]) out[x] += policy[h];
        }
    }
    for (double& p : out) p = std::min(p, 1.0);
    return out;
}

std::size_t sample_hypothesis(const Policy& policy, Rng& rng) {
    const double u = uniform01(rng);
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < policy.size(); ++i) {
        if (policy[i] <= 0.0) continue;
        cumulative += policy[i];
        last_positive = i;
        if (u < cumulative) return i;
    }
    // u landed in the rounding gap above the accumulated sum.
    return last_positive;
}

std::vector<Bit> predict_round(const Hypothesis& h, const RoundInstance& instance) {
    std::vector<Bit> out;
    out.reserve(instance.k());
    for (ContextId x : instance.contexts) {
        if (x < 0 || static_cast<std::size_t>(x) >= h.size()) {
            throw InputError("unknown context " + std::to_string(x));
        }
        out.push_back(h(x));
    }
    return out;
}

}  // namespace panelfair
