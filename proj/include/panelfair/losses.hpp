#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "panelfair/auditing.hpp"
#include "panelfair/core.hpp"

namespace panelfair {

/// Sum over the round of E_{h~pi} 1[h(x_i) != y_i], computed as sum_i |pi(x_i) - y_i|.
double error_loss(std::span<const double> marginals, const RoundInstance& instance);
double error_loss(const Policy& policy, const HypothesisClass& cls, const RoundInstance& instance);

/// 1 iff the panel reports a violating pair for the policy on this round.
int unfair_loss(std::span<const double> marginals, const RoundInstance& instance, const Panel& panel);
int unfair_loss(const Policy& policy, const HypothesisClass& cls, const RoundInstance& instance,
                const Panel& panel);

struct LagrangianParams {
    /// Throws ConfigError unless C > 0.
    LagrangianParams(double C, ContextId rho1, ContextId rho2);

    double C;
    ContextId rho1;
    ContextId rho2;
};

/// error + C * (pi(rho1) - pi(rho2)); the penalty is exactly 0 when rho1 == rho2.
double lagrangian_loss(std::span<const double> marginals, const RoundInstance& instance,
                       const LagrangianParams& params);
double lagrangian_loss(const Policy& policy, const HypothesisClass& cls, const RoundInstance& instance,
                       const LagrangianParams& params);

/// A realized round together with the panel that audited it.
struct AuditedRound {
    RoundInstance instance;
    std::shared_ptr<const Panel> panel;
};

/// One linearized fairness constraint: pi(x) - pi(x') <= bound.
struct FairnessConstraint {
    ContextId x;
    ContextId xp;
    double bound;
};

/// The polytope Q_{alpha_eff, gamma} in linear form: for every ordered pair of
/// distinct contexts appearing together in some round, the tightest
/// representative-auditor bound d^{rep}(x, x') + alpha_eff. Pairs whose bound
/// is >= 1 can never bind and are omitted.
std::vector<FairnessConstraint> fair_policy_constraints(std::span<const AuditedRound> history, double alpha_eff,
                                                        double gamma);

struct ComparatorSolution {
    Policy policy;
    double objective;
};

/// Minimizes sum_h cost[h] * pi(h) over pi in the simplex subject to the
/// fairness constraints. Throws InvariantError if the LP is infeasible.
ComparatorSolution minimize_over_fair_policies(const HypothesisClass& cls,
                                               std::span<const FairnessConstraint> constraints,
                                               std::span<const double> cost_per_hypothesis);

/// Most accurate (alpha_eff, gamma)-fair policy in hindsight: minimizes the summed
/// error over `objective` subject to fairness on every round of `history`.
ComparatorSolution best_fair_policy(std::span<const AuditedRound> history, double alpha_eff, double gamma,
                                    const HypothesisClass& cls, std::span<const RoundInstance> objective);

/// Convenience: the objective rounds are the history's own instances.
ComparatorSolution best_fair_policy(std::span<const AuditedRound> history, double alpha_eff, double gamma,
                                    const HypothesisClass& cls);

/// Same comparator set, Lagrangian objective sum_t L_{C, rho^t}.
ComparatorSolution best_fair_lagrangian(std::span<const AuditedRound> history, double alpha_eff, double gamma,
                                        const HypothesisClass& cls, double C,
                                        std::span<const AuditReport> reports);

struct LedgerRow {
    std::size_t t = 0;
    double error = 0.0;
    int unfair = 0;
    double lagrangian = 0.0;
    ContextId rho1 = 0;
    ContextId rho2 = 0;
    std::size_t hyp_index = 0;
};

class RegretLedger {
public:
    void record(const LedgerRow& row);

    const std::vector<LedgerRow>& rows() const noexcept { return rows_; }
    std::size_t size() const noexcept { return rows_.size(); }
    double total_error() const noexcept { return total_error_; }
    long total_unfair() const noexcept { return total_unfair_; }
    double total_lagrangian() const noexcept { return total_lagrangian_; }

private:
    std::vector<LedgerRow> rows_;
    double total_error_ = 0.0;
    long total_unfair_ = 0;
    double total_lagrangian_ = 0.0;
};

struct RegretReport {
    double error_regret = 0.0;
    long unfairness_total = 0;
    /// Violation count minus the comparator's own violation count.
    double unfairness_regret = 0.0;
    double lagrangian_regret = 0.0;
};

RegretReport regret_report(const RegretLedger& ledger, double benchmark_error, double benchmark_lagrangian,
                           long comparator_unfairness = 0);

/// CSV with header t,error,unfair,lagrangian,rho1,rho2,hyp_index and a final TOTAL row.
void write_ledger_csv(const RegretLedger& ledger, std::ostream& out);
/// Reads the rows back (the TOTAL row is checked against the column sums and skipped).
RegretLedger read_ledger_csv(std::istream& in);

}  // namespace panelfair
