#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "panelfair/rng.hpp"

namespace panelfair {

using ContextId = std::int32_t;
using Bit = std::uint8_t;

struct Context {
    ContextId id = 0;
    std::vector<double> features;
};

/// Finite set of individuals. Ids are dense in [0, size()) and match the
/// position of each context; every context carries a feature vector of the
/// same dimension. One member is designated as the "no violation" marker.
class ContextUniverse {
public:
    ContextUniverse(std::vector<Context> contexts, ContextId default_context);

    /// Contexts get ids 0..n-1 in the order given.
    static ContextUniverse from_features(std::vector<std::vector<double>> features,
                                         ContextId default_context = 0);

    std::size_t size() const noexcept { return contexts_.size(); }
    std::size_t dimension() const noexcept { return dimension_; }
    ContextId default_context() const noexcept { return default_context_; }
    bool contains(ContextId x) const noexcept {
        return x >= 0 && static_cast<std::size_t>(x) < contexts_.size();
    }
    const Context& operator[](ContextId x) const { return contexts_.at(static_cast<std::size_t>(x)); }
    const std::vector<Context>& contexts() const noexcept { return contexts_; }

private:
    std::vector<Context> contexts_;
    ContextId default_context_;
    std::size_t dimension_ = 0;
};

/// Binary predictor as an explicit prediction table over the universe.
class Hypothesis {
public:
    Hypothesis() = default;
    explicit Hypothesis(std::vector<Bit> predictions);

    Bit operator()(ContextId x) const { return predictions_[static_cast<std::size_t>(x)]; }
    std::size_t size() const noexcept { return predictions_.size(); }
    const std::vector<Bit>& predictions() const noexcept { return predictions_; }
    bool is_constant() const noexcept;

    friend bool operator==(const Hypothesis&, const Hypothesis&) = default;

private:
    std::vector<Bit> predictions_;
};

class HypothesisClass {
public:
    enum class ConstantMember { Required, NotRequired };

    /// Throws InputError on duplicate tables, ragged tables, an empty class, or
    /// (unless waived) a class with no constant hypothesis.
    HypothesisClass(std::string name, std::vector<Hypothesis> hypotheses,
                    ConstantMember constant = ConstantMember::Required);

    const std::string& name() const noexcept { return name_; }
    std::size_t size() const noexcept { return hypotheses_.size(); }
    std::size_t universe_size() const noexcept { return hypotheses_.front().size(); }
    const Hypothesis& operator[](std::size_t i) const { return hypotheses_.at(i); }
    const std::vector<Hypothesis>& hypotheses() const noexcept { return hypotheses_; }

    /// Index of the first constant hypothesis, or size() when there is none.
    std::size_t constant_index() const noexcept;

private:
    std::string name_;
    std::vector<Hypothesis> hypotheses_;
};

/// Probability vector over a hypothesis class.
class Policy {
public:
    static constexpr double kSumTolerance = 1e-12;

    /// Throws ConfigError unless entries are >= 0 and sum to 1 within kSumTolerance.
    explicit Policy(std::vector<double> weights);

    static Policy uniform(std::size_t n);
    static Policy point_mass(std::size_t n, std::size_t index);
    /// Rescales nonnegative weights with a positive sum.
    static Policy normalized(std::vector<double> weights);
    /// lambda * a + (1 - lambda) * b
    static Policy mixture(double lambda, const Policy& a, const Policy& b);

    std::size_t size() const noexcept { return weights_.size(); }
    double operator[](std::size_t i) const { return weights_[i]; }
    std::span<const double> weights() const noexcept { return weights_; }

private:
    std::vector<double> weights_;
};

/// One protocol round: k individuals and their (hidden) labels.
struct RoundInstance {
    RoundInstance() = default;
    RoundInstance(std::vector<ContextId> contexts, std::vector<Bit> labels);

    std::size_t k() const noexcept { return contexts.size(); }
    /// Throws InputError if any context is outside the universe.
    void validate(const ContextUniverse& universe) const;

    std::vector<ContextId> contexts;
    std::vector<Bit> labels;
};

/// Pr_{h ~ policy}[h(x) = 1].
double policy_marginal(const Policy& policy, const HypothesisClass& cls, ContextId x);

/// Marginals for every context of the universe, indexed by context id.
std::vector<double> policy_marginals(const Policy& policy, const HypothesisClass& cls);

/// Index of a hypothesis drawn according to the policy weights.
std::size_t sample_hypothesis(const Policy& policy, Rng& rng);

std::vector<Bit> predict_round(const Hypothesis& h, const RoundInstance& instance);

}  // namespace panelfair
