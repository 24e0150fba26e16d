#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "panelfair/core.hpp"

namespace panelfair {

/// One auditor's symmetric similarity judgements, a dense |X| x |X| matrix.
/// Off-diagonal entries lie in [0, 1]; the diagonal is never consulted.
class DistanceFunction {
public:
    DistanceFunction() = default;
    /// Throws InputError if the matrix is not square, not exactly symmetric,
    /// or has an off-diagonal entry outside [0, 1].
    explicit DistanceFunction(std::vector<std::vector<double>> rows);

    double operator()(ContextId x, ContextId y) const {
        return values_[static_cast<std::size_t>(x) * n_ + static_cast<std::size_t>(y)];
    }
    std::size_t size() const noexcept { return n_; }
    std::vector<std::vector<double>> rows() const;

private:
    std::size_t n_ = 0;
    std::vector<double> values_;
};

/// m auditors plus the (alpha, gamma) thresholds.
class Panel {
public:
    /// Throws ConfigError for an empty panel, alpha < 0, gamma outside (0, 1], or
    /// members over universes of different sizes.
    Panel(std::vector<DistanceFunction> members, double alpha, double gamma);

    const std::vector<DistanceFunction>& members() const noexcept { return members_; }
    const DistanceFunction& member(std::size_t i) const { return members_.at(i); }
    std::size_t m() const noexcept { return members_.size(); }
    double alpha() const noexcept { return alpha_; }
    double gamma() const noexcept { return gamma_; }
    std::size_t universe_size() const noexcept { return members_.front().size(); }

    /// ceil(gamma * m): the number of members that must flag a pair.
    std::size_t required_votes() const noexcept { return required_votes_; }

private:
    std::vector<DistanceFunction> members_;
    double alpha_;
    double gamma_;
    std::size_t required_votes_;
};

/// ceil(gamma * m) with a 1e-12 guard so e.g. gamma = 2/3, m = 3 gives 2 and not 3.
std::size_t votes_required(double gamma, std::size_t m);

struct AuditReport {
    ContextId first = 0;
    ContextId second = 0;
    bool is_violation = false;

    std::pair<ContextId, ContextId> pair() const { return {first, second}; }
    friend bool operator==(const AuditReport&, const AuditReport&) = default;
};

/// pi(x) - pi(x') > d + alpha. Ordered: only x being favoured over x' counts.
inline bool alpha_violation(double pi_x, double pi_xp, double d, double alpha) {
    return pi_x - pi_xp > d + alpha;
}

/// True iff at least ceil(gamma m) members flag an alpha-violation on (x, x').
bool panel_violation(double pi_x, double pi_xp, const Panel& panel, ContextId x, ContextId xp);

/// Member whose distance on (x, x') is the ceil(gamma m)-th smallest, ties
/// broken by lowest member index. 0-based. Does not depend on any policy.
std::size_t representative_index(const Panel& panel, ContextId x, ContextId xp);

/// Same selection for an explicit gamma (the comparator may vary gamma while
/// reusing the panel's members).
std::size_t representative_index(const Panel& panel, double gamma, ContextId x, ContextId xp);

/// Scans the ordered pairs (s, l), s != l, of the round in lexicographic order
/// and reports the first pair of distinct contexts on which the panel finds a
/// violation; otherwise (v, v) for the default context v.
AuditReport audit_round(std::span<const double> marginals, const RoundInstance& instance,
                        const Panel& panel, ContextId default_context);

AuditReport audit_round(const Policy& policy, const HypothesisClass& cls, const RoundInstance& instance,
                        const Panel& panel, ContextId default_context);

}  // namespace panelfair
