#include "panelfair/losses.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "panelfair/errors.hpp"
#include "panelfair/format.hpp"
#include "panelfair/simplex.hpp"

namespace panelfair {

namespace {

double marginal_at(std::span<const double> marginals, ContextId x) {
    if (x < 0 || static_cast<std::size_t>(x) >= marginals.size()) {
        throw InputError("unknown context " + std::to_string(x));
    }
    return marginals[static_cast<std::size_t>(x)];
}

// Summed 0-1 loss of each hypothesis over the rounds.
std::vector<double> error_costs(const HypothesisClass& cls, std::span<const RoundInstance> rounds) {
    std::vector<double> cost(cls.size(), 0.0);
    for (const auto& round : rounds) {
        for (std::size_t i = 0; i < round.k(); ++i) {
            const ContextId x = round.contexts[i];
            if (x < 0 || static_cast<std::size_t>(x) >= cls.universe_size()) {
                throw InputError("round references unknown context " + std::to_string(x));
            }
            for (std::size_t h = 0; h < cls.size(); ++h) {
                if (cls[h](x) != round.labels[i]) cost[h] += 1.0;
            }
        }
    }
    return cost;
}

}  // namespace

double error_loss(std::span<const double> marginals, const RoundInstance& instance) {
    double loss = 0.0;
    for (std::size_t i = 0; i < instance.k(); ++i) {
        const double p = marginal_at(marginals, instance.contexts[i]);
        loss += instance.labels[i] ? 1.0 - p : p;
    }
    return loss;
}

double error_loss(const Policy& policy, const HypothesisClass& cls, const RoundInstance& instance) {
    return error_loss(policy_marginals(policy, cls), instance);
}

int unfair_loss(std::span<const double> marginals, const RoundInstance& instance, const Panel& panel) {
    // The reported pair is irrelevant here, so any default context will do.
    return audit_round(marginals, instance, panel, 0).is_violation ? 1 : 0;
}

int unfair_loss(const Policy& policy, const HypothesisClass& cls, const RoundInstance& instance,
                const Panel& panel) {
    return unfair_loss(policy_marginals(policy, cls), instance, panel);
}

LagrangianParams::LagrangianParams(double c, ContextId r1, ContextId r2) : C(c), rho1(r1), rho2(r2) {
    if (!(C > 0.0) || !std::isfinite(C)) throw ConfigError("Lagrangian weight C must be positive");
}

double lagrangian_loss(std::span<const double> marginals, const RoundInstance& instance,
                       const LagrangianParams& params) {
    const double error = error_loss(marginals, instance);
    if (params.rho1 == params.rho2) {
        marginal_at(marginals, params.rho1);
        return error;
    }
    return error + params.C * (marginal_at(marginals, params.rho1) - marginal_at(marginals, params.rho2));
}

double lagrangian_loss(const Policy& policy, const HypothesisClass& cls, const RoundInstance& instance,
                       const LagrangianParams& params) {
    return lagrangian_loss(policy_marginals(policy, cls), instance, params);
}

std::vector<FairnessConstraint> fair_policy_constraints(std::span<const AuditedRound> history, double alpha_eff,
                                                        double gamma) {
    if (!(alpha_eff >= 0.0)) throw ConfigError("effective alpha must be >= 0");
    std::map<std::pair<ContextId, ContextId>, double> tightest;
    for (const auto& round : history) {
        if (!round.panel) throw ConfigError("audited round without a panel");
        const Panel& panel = *round.panel;
        const auto& ctx = round.instance.contexts;
        for (std::size_t s = 0; s < ctx.size(); ++s) {
            for (std::size_t l = 0; l < ctx.size(); ++l) {
                if (s == l || ctx[s] == ctx[l]) continue;
                const std::size_t rep = representative_index(panel, gamma, ctx[s], ctx[l]);
                const double bound = panel.member(rep)(ctx[s], ctx[l]) + alpha_eff;
                auto [it, inserted] = tightest.try_emplace({ctx[s], ctx[l]}, bound);
                if (!inserted) it->second = std::min(it->second, bound);
            }
        }
    }
    std::vector<FairnessConstraint> out;
    for (const auto& [pair, bound] : tightest) {
        if (bound < 1.0) out.push_back({pair.first, pair.second, bound});
    }
    return out;
}

ComparatorSolution minimize_over_fair_policies(const HypothesisClass& cls,
                                               std::span<const FairnessConstraint> constraints,
                                               std::span<const double> cost_per_hypothesis) {
    const std::size_t n = cls.size();
    if (cost_per_hypothesis.size() != n) throw ConfigError("cost vector does not match the class size");

    LinearProgram lp;
    lp.objective.assign(cost_per_hypothesis.begin(), cost_per_hypothesis.end());
    lp.add_eq(std::vector<double>(n, 1.0), 1.0);
    for (const auto& c : constraints) {
        std::vector<double> row(n, 0.0);
        bool any = false;
        for (std::size_t h = 0; h < n; ++h) {
            row[h] = static_cast<double>(cls[h](c.x)) - static_cast<double>(cls[h](c.xp));
            any = any || row[h] != 0.0;
        }
        if (any) lp.add_le(std::move(row), c.bound);
    }

    const LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::Optimal) {
        throw InvariantError("fair comparator LP is not solvable; the class needs a constant hypothesis");
    }
    Policy policy = Policy::normalized(sol.x);
    double objective = 0.0;
    for (std::size_t h = 0; h < n; ++h) objective += cost_per_hypothesis[h] * policy[h];
    return {std::move(policy), objective};
}

ComparatorSolution best_fair_policy(std::span<const AuditedRound> history, double alpha_eff, double gamma,
                                    const HypothesisClass& cls, std::span<const RoundInstance> objective) {
    if (history.empty()) throw ConfigError("comparator needs a nonempty history");
    const auto constraints = fair_policy_constraints(history, alpha_eff, gamma);
    const auto cost = error_costs(cls, objective);
    return minimize_over_fair_policies(cls, constraints, cost);
}

ComparatorSolution best_fair_policy(std::span<const AuditedRound> history, double alpha_eff, double gamma,
                                    const HypothesisClass& cls) {
    std::vector<RoundInstance> rounds;
    rounds.reserve(history.size());
    for (const auto& r : history) rounds.push_back(r.instance);
    return best_fair_policy(history, alpha_eff, gamma, cls, rounds);
}

ComparatorSolution best_fair_lagrangian(std::span<const AuditedRound> history, double alpha_eff, double gamma,
                                        const HypothesisClass& cls, double C,
                                        std::span<const AuditReport> reports) {
    if (history.empty()) throw ConfigError("comparator needs a nonempty history");
    if (reports.size() != history.size()) throw ConfigError("one audit report per round is required");
    if (!(C > 0.0)) throw ConfigError("Lagrangian weight C must be positive");
    std::vector<RoundInstance> rounds;
    rounds.reserve(history.size());
    for (const auto& r : history) rounds.push_back(r.instance);
    auto cost = error_costs(cls, rounds);
    for (const auto& report : reports) {
        if (report.first == report.second) continue;
        for (std::size_t h = 0; h < cls.size(); ++h) {
            cost[h] += C * (static_cast<double>(cls[h](report.first)) - static_cast<double>(cls[h](report.second)));
        }
    }
    const auto constraints = fair_policy_constraints(history, alpha_eff, gamma);
    return minimize_over_fair_policies(cls, constraints, cost);
}

void RegretLedger::record(const LedgerRow& row) {
    if (row.unfair != 0 && row.unfair != 1) throw InputError("unfairness loss must be 0 or 1");
    rows_.push_back(row);
    total_error_ += row.error;
    total_unfair_ += row.unfair;
    total_lagrangian_ += row.lagrangian;
}

RegretReport regret_report(const RegretLedger& ledger, double benchmark_error, double benchmark_lagrangian,
                           long comparator_unfairness) {
    RegretReport report;
    report.error_regret = ledger.total_error() - benchmark_error;
    report.unfairness_total = ledger.total_unfair();
    report.unfairness_regret = static_cast<double>(ledger.total_unfair() - comparator_unfairness);
    report.lagrangian_regret = ledger.total_lagrangian() - benchmark_lagrangian;
    return report;
}

void write_ledger_csv(const RegretLedger& ledger, std::ostream& out) {
    out << "t,error,unfair,lagrangian,rho1,rho2,hyp_index\n";
    for (const auto& r : ledger.rows()) {
        out << r.t << ',' << format_number(r.error) << ',' << r.unfair << ',' << format_number(r.lagrangian) << ','
            << r.rho1 << ',' << r.rho2 << ',' << r.hyp_index << '\n';
    }
    out << "TOTAL," << format_number(ledger.total_error()) << ',' << ledger.total_unfair() << ','
        << format_number(ledger.total_lagrangian()) << ",,,\n";
}

RegretLedger read_ledger_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "t,error,unfair,lagrangian,rho1,rho2,hyp_index") {
        throw InputError("ledger CSV has an unexpected header");
    }
    RegretLedger ledger;
    bool saw_total = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.emplace_back();
        if (cells.size() != 7) throw InputError("ledger CSV row has " + std::to_string(cells.size()) + " cells");
        try {
            if (cells[0] == "TOTAL") {
                saw_total = true;
                const double err = std::stod(cells[1]);
                if (std::stol(cells[2]) != ledger.total_unfair() ||
                    std::fabs(err - ledger.total_error()) > 1e-6 * std::max(1.0, std::fabs(err))) {
                    throw InputError("ledger TOTAL row disagrees with the per-round rows");
                }
                continue;
            }
            LedgerRow row;
            row.t = std::stoul(cells[0]);
            row.error = std::stod(cells[1]);
            row.unfair = std::stoi(cells[2]);
            row.lagrangian = std::stod(cells[3]);
            row.rho1 = std::stoi(cells[4]);
            row.rho2 = std::stoi(cells[5]);
            row.hyp_index = std::stoul(cells[6]);
            ledger.record(row);
        } catch (const std::logic_error& e) {
            if (dynamic_cast<const InputError*>(&e)) throw;
            throw InputError("malformed ledger CSV row: " + line);
        }
    }
    if (!saw_total) throw InputError("ledger CSV has no TOTAL row");
    return ledger;
}

}  // namespace panelfair
