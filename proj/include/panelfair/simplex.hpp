#pragma once

#include <cstddef>
#include <vector>

namespace panelfair {

/// minimize objective . x  subject to  le_rows x <= le_rhs,  eq_rows x = eq_rhs,  x >= 0.
struct LinearProgram {
    std::vector<double> objective;
    std::vector<std::vector<double>> le_rows;
    std::vector<double> le_rhs;
    std::vector<std::vector<double>> eq_rows;
    std::vector<double> eq_rhs;

    std::size_t num_variables() const noexcept { return objective.size(); }
    void add_le(std::vector<double> row, double rhs) {
        le_rows.push_back(std::move(row));
        le_rhs.push_back(rhs);
    }
    void add_eq(std::vector<double> row, double rhs) {
        eq_rows.push_back(std::move(row));
        eq_rhs.push_back(rhs);
    }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> x;
    double objective = 0.0;
};

/// Dense two-phase tableau simplex with Bland's anti-cycling rule. Sized for
/// desk problems (tens of variables, up to ~10^4 rows). `tolerance` is used
/// for both feasibility and optimality decisions.
LpSolution solve_lp(const LinearProgram& lp, double tolerance = 1e-9);

}  // namespace panelfair
