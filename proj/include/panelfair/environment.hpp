#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "panelfair/auditing.hpp"
#include "panelfair/core.hpp"
#include "panelfair/losses.hpp"
#include "panelfair/rng.hpp"

namespace panelfair {

enum class AdversaryRule { LabelFlipper, FairnessProber, Stochastic };

std::string to_string(AdversaryRule rule);
/// Throws ConfigError for an unknown rule id.
AdversaryRule adversary_rule_from_string(const std::string& text);

/// i.i.d. contexts from `context_weights` (uniform if empty), label of x is
/// Bernoulli(label_prob[x]).
struct StochasticSpec {
    std::vector<double> context_weights;
    std::vector<double> label_prob;
};

/// Per-round perturbation of a base metric: each member gets
/// d_j(x, y) = clamp(base(x, y) + U(-jitter, jitter), 0, 1), drawn symmetrically.
struct RandomPanelSpec {
    std::size_t m = 1;
    double alpha = 0.0;
    double gamma = 1.0;
    DistanceFunction base;
    double jitter = 0.0;
};

struct PanelSchedule {
    enum class Kind { Fixed, PerRound, Random };

    Kind kind = Kind::Fixed;
    /// One panel for Fixed, one per round for PerRound.
    std::vector<std::shared_ptr<const Panel>> panels;
    RandomPanelSpec random;

    static PanelSchedule fixed(Panel panel);
    static PanelSchedule per_round(std::vector<Panel> panels);
    static PanelSchedule random_draws(RandomPanelSpec spec);

    double alpha() const;
    double gamma() const;
    std::size_t universe_size() const;
};

struct EnvironmentScript {
    enum class Kind { Stochastic, FixedSequence, Adaptive };

    Kind kind = Kind::Stochastic;
    StochasticSpec stochastic;
    std::vector<RoundInstance> rounds;
    /// Fixed sequences shorter than T repeat from the start.
    bool cycle = false;
    AdversaryRule rule = AdversaryRule::Stochastic;
    PanelSchedule panels;

    /// Throws ConfigError if the script cannot serve T rounds of size k over
    /// the universe (short sequence, unknown context, bad probabilities, panel
    /// over the wrong universe).
    void validate(const ContextUniverse& universe, std::size_t T, std::size_t k) const;
};

std::string to_string(EnvironmentScript::Kind kind);

/// Built-in adaptive rules. Pure in (history, marginals, rng state):
///  - label_flipper: random contexts, each labelled to maximize the expected error of the policy;
///  - fairness_prober: the ordered pair maximizing pi(x) - pi(x'), padded with random contexts;
///  - stochastic: contexts and labels as in `stochastic`.
RoundInstance adversary_adaptive(AdversaryRule rule, std::span<const AuditedRound> history,
                                 std::span<const double> marginals, std::size_t k, const StochasticSpec& stochastic,
                                 Rng& rng);

/// Stateful round source for one run. Every draw comes from substreams of the run seed.
class Environment {
public:
    Environment(EnvironmentScript script, std::size_t universe_size, std::size_t k, std::uint64_t seed);

    /// Round t (1-based). `marginals` are those of the currently deployed policy;
    /// only adaptive scripts look at them. Throws InputError when a fixed
    /// sequence or per-round panel list runs out.
    AuditedRound next(std::size_t t, std::span<const double> marginals);

    const std::vector<AuditedRound>& history() const noexcept { return history_; }
    const EnvironmentScript& script() const noexcept { return script_; }

private:
    std::shared_ptr<const Panel> panel_for(std::size_t t);

    EnvironmentScript script_;
    std::size_t universe_size_;
    std::size_t k_;
    Rng rounds_rng_;
    Rng panel_rng_;
    std::vector<AuditedRound> history_;
};

}  // namespace panelfair
