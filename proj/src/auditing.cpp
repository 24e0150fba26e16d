#include "panelfair/auditing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "panelfair/errors.hpp"

namespace panelfair {

DistanceFunction::DistanceFunction(std::vector<std::vector<double>> rows) : n_(rows.size()) {
    if (n_ == 0) throw InputError("distance matrix is empty");
    values_.resize(n_ * n_);
    for (std::size_t i = 0; i < n_; ++i) {
        if (rows[i].size() != n_) throw InputError("distance matrix is not square");
        std::copy(rows[i].begin(), rows[i].end(), values_.begin() + static_cast<std::ptrdiff_t>(i * n_));
    }
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = i + 1; j < n_; ++j) {
            const double a = values_[i * n_ + j];
            if (a != values_[j * n_ + i]) {
                throw InputError("distance matrix is not symmetric at (" + std::to_string(i) + ", " +
                                 std::to_string(j) + ")");
            }
            if (!(a >= 0.0 && a <= 1.0)) {
                throw InputError("distance (" + std::to_string(i) + ", " + std::to_string(j) +
                                 ") = " + std::to_string(a) + " is outside [0, 1]");
            }
        }
    }
}

std::vector<std::vector<double>> DistanceFunction::rows() const {
    std::vector<std::vector<double>> out(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        out[i].assign(values_.begin() + static_cast<std::ptrdiff_t>(i * n_),
                      values_.begin() + static_cast<std::ptrdiff_t>((i + 1) * n_));
    }
    return out;
}

std::size_t votes_required(double gamma, std::size_t m) {
    const double raw = gamma * static_cast<double>(m);
    auto votes = static_cast<std::size_t>(std::ceil(raw - 1e-12));
    return std::clamp<std::size_t>(votes, 1, m);
}

Panel::Panel(std::vector<DistanceFunction> members, double alpha, double gamma)
    : members_(std::move(members)), alpha_(alpha), gamma_(gamma) {
    if (members_.empty()) throw ConfigError("a panel needs at least one member");
    if (!(alpha_ >= 0.0) || !std::isfinite(alpha_)) throw ConfigError("panel alpha must be >= 0");
    if (!(gamma_ > 0.0 && gamma_ <= 1.0)) throw ConfigError("panel gamma must lie in (0, 1]");
    for (const auto& d : members_) {
        if (d.size() != members_.front().size()) {
            throw ConfigError("panel members disagree on the universe size");
        }
    }
    required_votes_ = votes_required(gamma_, members_.size());
}

bool panel_violation(double pi_x, double pi_xp, const Panel& panel, ContextId x, ContextId xp) {
    std::size_t votes = 0;
    for (const auto& d : panel.members()) {
        if (alpha_violation(pi_x, pi_xp, d(x, xp), panel.alpha())) ++votes;
    }
    return votes >= panel.required_votes();
}

std::size_t representative_index(const Panel& panel, ContextId x, ContextId xp) {
    return representative_index(panel, panel.gamma(), x, xp);
}

std::size_t representative_index(const Panel& panel, double gamma, ContextId x, ContextId xp) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
    std::vector<std::size_t> order(panel.m());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return panel.member(a)(x, xp) < panel.member(b)(x, xp);
    });
    return order[votes_required(gamma, panel.m()) - 1];
}

AuditReport audit_round(std::span<const double> marginals, const RoundInstance& instance,
                        const Panel& panel, ContextId default_context) {
    for (ContextId x : instance.contexts) {
        if (x < 0 || static_cast<std::size_t>(x) >= marginals.size()) {
            throw InputError("round references unknown context " + std::to_string(x));
        }
    }
    const std::size_t k = instance.k();
    for (std::size_t s = 0; s < k; ++s) {
        for (std::size_t l = 0; l < k; ++l) {
            if (s == l) continue;
            const ContextId x = instance.contexts[s];
            const ContextId xp = instance.contexts[l];
            // Repeated individuals are treated identically and cannot violate.
            if (x == xp) continue;
            if (panel_violation(marginals[static_cast<std::size_t>(x)], marginals[static_cast<std::size_t>(xp)],
                                panel, x, xp)) {
                return {x, xp, true};
            }
        }
    }
    return {default_context, default_context, false};
}

AuditReport audit_round(const Policy& policy, const HypothesisClass& cls, const RoundInstance& instance,
                        const Panel& panel, ContextId default_context) {
    const auto marginals = policy_marginals(policy, cls);
    return audit_round(marginals, instance, panel, default_context);
}

}  // namespace panelfair
