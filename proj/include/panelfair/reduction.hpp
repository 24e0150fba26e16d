#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "panelfair/auditing.hpp"
#include "panelfair/core.hpp"

namespace panelfair {

/// Output of the semi-bandit reduction for one round.
///
/// With k' = k + 2C:
///   augmented_contexts = (x_1..x_k, rho1 x C, rho2 x C)
///   augmented_labels   = (y_1..y_k, 0 x C, 1 x C)
///   loss_vector        = (1 - augmented_labels, 1/2 x k')       length 2k'
///   action_vector      = (h(augmented), 1 - h(augmented))       length 2k'
struct ReducedRound {
    std::size_t k = 0;
    std::size_t C = 0;
    std::vector<ContextId> augmented_contexts;
    std::vector<Bit> augmented_labels;
    std::vector<double> loss_vector;
    std::vector<Bit> action_vector;

    std::size_t width() const noexcept { return k + 2 * C; }
    /// <a, l>, always in [0, k'].
    double inner_product() const;
};

/// Throws ConfigError for C == 0 and InputError for contexts outside h's table.
ReducedRound reduce_round(const RoundInstance& instance, const Hypothesis& h, const AuditReport& report,
                          std::size_t C);

/// <a^h, l> for an arbitrary hypothesis against the round's loss vector.
double action_loss(const ReducedRound& reduced, const Hypothesis& h);

/// Loss vector as seen by a semi-bandit learner: only coordinates where the
/// played action is 1 carry a value. Masked values are never copied in, and
/// any attempt to read one is counted and rejected.
class MaskedLosses {
public:
    MaskedLosses() = default;

    std::size_t size() const noexcept { return observed_.size(); }
    bool observed(std::size_t i) const { return observed_.at(i) != 0; }
    /// Throws std::logic_error (after counting the attempt) if i is masked.
    double at(std::size_t i) const;

    /// Process-wide count of reads of masked coordinates.
    static std::uint64_t masked_read_attempts() noexcept;
    static void reset_masked_read_attempts() noexcept;

private:
    friend class SemiBanditObserver;
    std::vector<double> values_;
    std::vector<Bit> observed_;
};

/// Everything a learner is allowed to know after a round.
struct SemiBanditFeedback {
    std::size_t k = 0;
    std::size_t C = 0;
    std::vector<ContextId> augmented_contexts;
    std::vector<Bit> action;
    MaskedLosses losses;

    std::size_t width() const noexcept { return k + 2 * C; }
};

/// Per-coordinate semi-bandit masking: l_i is revealed iff a_i = 1.
SemiBanditFeedback semi_bandit_observe(const ReducedRound& reduced);

struct IdentitySides {
    double lhs;
    double rhs;
};

/// lhs = L_{C,rho}(pi) - L_{C,rho}(pi'), rhs = 2 (E_{h~pi}<a^h, l> - E_{h~pi'}<a^h, l>)
/// with rho the reported pair; the two agree exactly in real arithmetic.
IdentitySides lagrangian_identity_check(const Policy& pi, const Policy& pi2, const HypothesisClass& cls,
                                        const RoundInstance& instance, const AuditReport& report, std::size_t C);

}  // namespace panelfair
