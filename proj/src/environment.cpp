#include "panelfair/environment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "panelfair/errors.hpp"

namespace panelfair {

namespace {

ContextId sample_context(const std::vector<double>& weights, std::size_t n, Rng& rng) {
    if (weights.empty()) return static_cast<ContextId>(uniform_index(rng, n));
    double total = 0.0;
    for (double w : weights) total += w;
    const double u = uniform01(rng) * total;
    double acc = 0.0;
    for (std::size_t x = 0; x < weights.size(); ++x) {
        acc += weights[x];
        if (u < acc) return static_cast<ContextId>(x);
    }
    // Rounding left u at the very top; return the last context with positive weight.
    for (std::size_t x = weights.size(); x-- > 0;) {
        if (weights[x] > 0.0) return static_cast<ContextId>(x);
    }
    return 0;
}

Bit sample_label(const StochasticSpec& spec, ContextId x, Rng& rng) {
    const double p = spec.label_prob.empty() ? 0.5 : spec.label_prob[static_cast<std::size_t>(x)];
    return bernoulli(rng, p) ? Bit{1} : Bit{0};
}

RoundInstance stochastic_round(const StochasticSpec& spec, std::size_t n, std::size_t k, Rng& rng) {
    std::vector<ContextId> contexts(k);
    std::vector<Bit> labels(k);
    for (std::size_t i = 0; i < k; ++i) {
        contexts[i] = sample_context(spec.context_weights, n, rng);
        labels[i] = sample_label(spec, contexts[i], rng);
    }
    return RoundInstance(std::move(contexts), std::move(labels));
}

void check_probabilities(const std::vector<double>& values, std::size_t n, const char* what) {
    if (values.empty()) return;
    if (values.size() != n) throw ConfigError(std::string(what) + " must have one entry per context");
    for (double v : values) {
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(what) + " entries must lie in [0, 1]");
    }
}

}  // namespace

std::string to_string(AdversaryRule rule) {
    switch (rule) {
        case AdversaryRule::LabelFlipper: return "label_flipper";
        case AdversaryRule::FairnessProber: return "fairness_prober";
        case AdversaryRule::Stochastic: return "stochastic";
    }
    return "stochastic";
}

AdversaryRule adversary_rule_from_string(const std::string& text) {
    if (text == "label_flipper") return AdversaryRule::LabelFlipper;
    if (text == "fairness_prober") return AdversaryRule::FairnessProber;
    if (text == "stochastic") return AdversaryRule::Stochastic;
    throw ConfigError("unknown adversary rule '" + text + "'");
}

std::string to_string(EnvironmentScript::Kind kind) {
    switch (kind) {
        case EnvironmentScript::Kind::Stochastic: return "stochastic";
        case EnvironmentScript::Kind::FixedSequence: return "fixed_sequence";
        case EnvironmentScript::Kind::Adaptive: return "adaptive";
    }
    return "stochastic";
}

PanelSchedule PanelSchedule::fixed(Panel panel) {
    PanelSchedule s;
    s.kind = Kind::Fixed;
    s.panels.push_back(std::make_shared<const Panel>(std::move(panel)));
    return s;
}

PanelSchedule PanelSchedule::per_round(std::vector<Panel> panels) {
    if (panels.empty()) throw ConfigError("per-round panel schedule is empty");
    PanelSchedule s;
    s.kind = Kind::PerRound;
    for (auto& p : panels) s.panels.push_back(std::make_shared<const Panel>(std::move(p)));
    return s;
}

PanelSchedule PanelSchedule::random_draws(RandomPanelSpec spec) {
    if (spec.m == 0) throw ConfigError("random panel needs m >= 1");
    if (spec.base.size() == 0) throw ConfigError("random panel needs a base metric");
    if (!(spec.jitter >= 0.0 && spec.jitter <= 1.0)) throw ConfigError("panel jitter must lie in [0, 1]");
    // Validates alpha and gamma.
    Panel probe(std::vector<DistanceFunction>(spec.m, spec.base), spec.alpha, spec.gamma);
    PanelSchedule s;
    s.kind = Kind::Random;
    s.random = std::move(spec);
    return s;
}

double PanelSchedule::alpha() const { return kind == Kind::Random ? random.alpha : panels.front()->alpha(); }

double PanelSchedule::gamma() const { return kind == Kind::Random ? random.gamma : panels.front()->gamma(); }

std::size_t PanelSchedule::universe_size() const {
    return kind == Kind::Random ? random.base.size() : panels.front()->universe_size();
}

void EnvironmentScript::validate(const ContextUniverse& universe, std::size_t T, std::size_t k) const {
    const std::size_t n = universe.size();
    if (k < 2) throw ConfigError("round size k must be >= 2");
    if (panels.kind != PanelSchedule::Kind::Random && panels.panels.empty()) {
        throw ConfigError("environment has no panel");
    }
    if (panels.universe_size() != n) throw ConfigError("panel metric does not cover the universe");
    if (panels.kind == PanelSchedule::Kind::PerRound) {
        if (panels.panels.size() < T) throw ConfigError("per-round panel list is shorter than T");
        for (const auto& p : panels.panels) {
            if (p->universe_size() != n) throw ConfigError("panel metric does not cover the universe");
            if (p->alpha() != panels.alpha() || p->gamma() != panels.gamma()) {
                throw ConfigError("per-round panels must share alpha and gamma");
            }
        }
    }
    check_probabilities(stochastic.label_prob, n, "label_prob");
    if (!stochastic.context_weights.empty()) {
        if (stochastic.context_weights.size() != n) {
            throw ConfigError("context_weights must have one entry per context");
        }
        double total = 0.0;
        for (double w : stochastic.context_weights) {
            if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("context_weights must be nonnegative");
            total += w;
        }
        if (!(total > 0.0)) throw ConfigError("context_weights sum to zero");
    }
    if (kind == Kind::FixedSequence) {
        if (rounds.empty() || (!cycle && rounds.size() < T)) {
            throw ConfigError("fixed sequence has " + std::to_string(rounds.size()) + " rounds but T = " +
                              std::to_string(T));
        }
        for (const auto& r : rounds) {
            if (r.k() != k) throw ConfigError("fixed sequence round has the wrong size");
            try {
                r.validate(universe);
            } catch (const InputError& e) {
                throw ConfigError(e.what());
            }
        }
    }
}

RoundInstance adversary_adaptive(AdversaryRule rule, std::span<const AuditedRound> /*history*/,
                                 std::span<const double> marginals, std::size_t k, const StochasticSpec& stochastic,
                                 Rng& rng) {
    const std::size_t n = marginals.size();
    if (n < 2) throw ConfigError("adaptive adversaries need at least two contexts");
    switch (rule) {
        case AdversaryRule::Stochastic: return stochastic_round(stochastic, n, k, rng);
        case AdversaryRule::LabelFlipper: {
            std::vector<ContextId> contexts(k);
            std::vector<Bit> labels(k);
            for (std::size_t i = 0; i < k; ++i) {
                contexts[i] = sample_context(stochastic.context_weights, n, rng);
                labels[i] = marginals[static_cast<std::size_t>(contexts[i])] < 0.5 ? Bit{1} : Bit{0};
            }
            return RoundInstance(std::move(contexts), std::move(labels));
        }
        case AdversaryRule::FairnessProber: {
            ContextId best_x = 0;
            ContextId best_xp = 1;
            double best_gap = marginals[0] - marginals[1];
            for (std::size_t x = 0; x < n; ++x) {
                for (std::size_t xp = 0; xp < n; ++xp) {
                    if (x == xp) continue;
                    const double gap = marginals[x] - marginals[xp];
                    if (gap > best_gap) {
                        best_gap = gap;
                        best_x = static_cast<ContextId>(x);
                        best_xp = static_cast<ContextId>(xp);
                    }
                }
            }
            std::vector<ContextId> contexts{best_x, best_xp};
            while (contexts.size() < k) contexts.push_back(sample_context(stochastic.context_weights, n, rng));
            std::vector<Bit> labels(k);
            for (std::size_t i = 0; i < k; ++i) labels[i] = sample_label(stochastic, contexts[i], rng);
            return RoundInstance(std::move(contexts), std::move(labels));
        }
    }
    throw ConfigError("unknown adversary rule");
}

Environment::Environment(EnvironmentScript script, std::size_t universe_size, std::size_t k, std::uint64_t seed)
    : script_(std::move(script)),
      universe_size_(universe_size),
      k_(k),
      rounds_rng_(substream(seed, "environment")),
      panel_rng_(substream(seed, "panel")) {}

std::shared_ptr<const Panel> Environment::panel_for(std::size_t t) {
    const auto& schedule = script_.panels;
    switch (schedule.kind) {
        case PanelSchedule::Kind::Fixed: return schedule.panels.front();
        case PanelSchedule::Kind::PerRound:
            if (t > schedule.panels.size()) throw InputError("per-round panel list exhausted at round " + std::to_string(t));
            return schedule.panels[t - 1];
        case PanelSchedule::Kind::Random: {
            const auto& spec = schedule.random;
            const std::size_t n = spec.base.size();
            std::vector<DistanceFunction> members;
            members.reserve(spec.m);
            for (std::size_t j = 0; j < spec.m; ++j) {
                auto rows = spec.base.rows();
                for (std::size_t a = 0; a < n; ++a) {
                    for (std::size_t b = a + 1; b < n; ++b) {
                        const double noise = spec.jitter * (2.0 * uniform01(panel_rng_) - 1.0);
                        const double v = std::clamp(rows[a][b] + noise, 0.0, 1.0);
                        rows[a][b] = v;
                        rows[b][a] = v;
                    }
                }
                members.emplace_back(std::move(rows));
            }
            return std::make_shared<const Panel>(std::move(members), spec.alpha, spec.gamma);
        }
    }
    throw ConfigError("unknown panel schedule");
}

AuditedRound Environment::next(std::size_t t, std::span<const double> marginals) {
    if (marginals.size() != universe_size_) throw ConfigError("marginals do not cover the universe");
    RoundInstance instance;
    switch (script_.kind) {
        case EnvironmentScript::Kind::Stochastic:
            instance = stochastic_round(script_.stochastic, universe_size_, k_, rounds_rng_);
            break;
        case EnvironmentScript::Kind::FixedSequence:
            if (t == 0 || (!script_.cycle && t > script_.rounds.size())) {
                throw InputError("fixed sequence exhausted at round " + std::to_string(t));
            }
            instance = script_.rounds[(t - 1) % script_.rounds.size()];
            break;
        case EnvironmentScript::Kind::Adaptive:
            instance = adversary_adaptive(script_.rule, history_, marginals, k_, script_.stochastic, rounds_rng_);
            break;
    }
    AuditedRound round{std::move(instance), panel_for(t)};
    history_.push_back(round);
    return round;
}

}  // namespace panelfair
