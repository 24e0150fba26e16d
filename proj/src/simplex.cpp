#include "panelfair/simplex.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "panelfair/errors.hpp"

namespace panelfair {

namespace {

constexpr std::size_t kMaxPivots = 200000;

class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols)
        : cols_(cols), cells_(rows, std::vector<double>(cols + 1, 0.0)), basis_(rows, 0) {}

    std::size_t rows() const { return cells_.size(); }
    std::size_t cols() const { return cols_; }
    double& at(std::size_t r, std::size_t c) { return cells_[r][c]; }
    double at(std::size_t r, std::size_t c) const { return cells_[r][c]; }
    double& rhs(std::size_t r) { return cells_[r][cols_]; }
    std::size_t& basic(std::size_t r) { return basis_[r]; }
    std::size_t basic(std::size_t r) const { return basis_[r]; }

    void drop_row(std::size_t r) {
        cells_.erase(cells_.begin() + static_cast<std::ptrdiff_t>(r));
        basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
    }

    void pivot(std::size_t r, std::size_t c, std::vector<double>& cost_row) {
        auto& prow = cells_[r];
        const double p = prow[c];
        for (double& v : prow) v /= p;
        prow[c] = 1.0;
        auto eliminate = [&](std::vector<double>& row) {
            const double f = row[c];
            if (f == 0.0) return;
            for (std::size_t j = 0; j <= cols_; ++j) row[j] -= f * prow[j];
            row[c] = 0.0;
        };
        for (std::size_t i = 0; i < cells_.size(); ++i) {
            if (i != r) eliminate(cells_[i]);
        }
        eliminate(cost_row);
        basis_[r] = c;
    }

    // Reduced-cost row for `cost`, expressed in the current basis. The last
    // entry holds minus the objective value.
    std::vector<double> reduced_costs(const std::vector<double>& cost) const {
        std::vector<double> z(cols_ + 1, 0.0);
        for (std::size_t j = 0; j < cols_; ++j) z[j] = cost[j];
        for (std::size_t r = 0; r < cells_.size(); ++r) {
            const double cb = cost[basis_[r]];
            if (cb == 0.0) continue;
            for (std::size_t j = 0; j <= cols_; ++j) z[j] -= cb * cells_[r][j];
        }
        return z;
    }

    // Bland's rule simplex on columns [0, allowed). Returns false if unbounded.
    bool optimize(std::vector<double>& z, std::size_t allowed, double tol) {
        for (std::size_t iter = 0; iter < kMaxPivots; ++iter) {
            std::size_t entering = allowed;
            for (std::size_t j = 0; j < allowed; ++j) {
                if (z[j] < -tol) {
                    entering = j;
                    break;
                }
            }
            if (entering == allowed) return true;

            std::size_t leaving = rows();
            double best_ratio = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < rows(); ++r) {
                const double a = cells_[r][entering];
                if (a <= tol) continue;
                const double ratio = std::max(cells_[r][cols_], 0.0) / a;
                if (ratio < best_ratio - tol ||
                    (std::fabs(ratio - best_ratio) <= tol && basis_[r] < basis_[leaving])) {
                    best_ratio = ratio;
                    leaving = r;
                }
            }
            if (leaving == rows()) return false;
            pivot(leaving, entering, z);
            for (auto& row : cells_) {
                if (std::fabs(row[cols_]) < 1e-14) row[cols_] = 0.0;
            }
        }
        throw InvariantError("simplex exceeded " + std::to_string(kMaxPivots) + " pivots");
    }

private:
    std::size_t cols_;
    std::vector<std::vector<double>> cells_;
    std::vector<std::size_t> basis_;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, double tolerance) {
    const std::size_t n = lp.num_variables();
    const std::size_t n_le = lp.le_rows.size();
    const std::size_t n_eq = lp.eq_rows.size();
    if (lp.le_rhs.size() != n_le || lp.eq_rhs.size() != n_eq) {
        throw ConfigError("linear program has mismatched row and right-hand-side counts");
    }
    for (const auto& row : lp.le_rows) {
        if (row.size() != n) throw ConfigError("inequality row has the wrong number of coefficients");
    }
    for (const auto& row : lp.eq_rows) {
        if (row.size() != n) throw ConfigError("equality row has the wrong number of coefficients");
    }

    // Column layout: [original | slack/surplus per <= row | artificials].
    std::size_t n_art = n_eq;
    for (double b : lp.le_rhs) {
        if (b < 0.0) ++n_art;
    }
    const std::size_t slack0 = n;
    const std::size_t art0 = n + n_le;
    const std::size_t cols = art0 + n_art;
    Tableau tab(n_le + n_eq, cols);

    std::size_t next_art = art0;
    for (std::size_t i = 0; i < n_le; ++i) {
        const double sign = lp.le_rhs[i] < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < n; ++j) tab.at(i, j) = sign * lp.le_rows[i][j];
        tab.at(i, slack0 + i) = sign;
        tab.rhs(i) = sign * lp.le_rhs[i];
        if (sign > 0) {
            tab.basic(i) = slack0 + i;
        } else {
            tab.at(i, next_art) = 1.0;
            tab.basic(i) = next_art++;
        }
    }
    for (std::size_t e = 0; e < n_eq; ++e) {
        const std::size_t i = n_le + e;
        const double sign = lp.eq_rhs[e] < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < n; ++j) tab.at(i, j) = sign * lp.eq_rows[e][j];
        tab.rhs(i) = sign * lp.eq_rhs[e];
        tab.at(i, next_art) = 1.0;
        tab.basic(i) = next_art++;
    }

    // Phase 1: drive the artificials to zero.
    if (n_art > 0) {
        std::vector<double> phase1(cols, 0.0);
        for (std::size_t j = art0; j < cols; ++j) phase1[j] = 1.0;
        auto z = tab.reduced_costs(phase1);
        tab.optimize(z, cols, tolerance);
        if (-z[cols] > tolerance * std::max<double>(1.0, static_cast<double>(tab.rows()))) {
            return {LpStatus::Infeasible, {}, 0.0};
        }
        // Pivot remaining zero-level artificials out, dropping redundant rows.
        for (std::size_t r = 0; r < tab.rows();) {
            if (tab.basic(r) < art0) {
                ++r;
                continue;
            }
            std::size_t col = art0;
            for (std::size_t j = 0; j < art0; ++j) {
                if (std::fabs(tab.at(r, j)) > tolerance) {
                    col = j;
                    break;
                }
            }
            if (col == art0) {
                tab.drop_row(r);
            } else {
                tab.pivot(r, col, z);
                ++r;
            }
        }
    }

    // Phase 2 over the non-artificial columns.
    std::vector<double> cost(cols, 0.0);
    for (std::size_t j = 0; j < n; ++j) cost[j] = lp.objective[j];
    auto z = tab.reduced_costs(cost);
    if (!tab.optimize(z, art0, tolerance)) return {LpStatus::Unbounded, {}, 0.0};

    LpSolution sol;
    sol.status = LpStatus::Optimal;
    sol.x.assign(n, 0.0);
    for (std::size_t r = 0; r < tab.rows(); ++r) {
        if (tab.basic(r) < n) sol.x[tab.basic(r)] = std::max(0.0, tab.rhs(r));
    }
    sol.objective = 0.0;
    for (std::size_t j = 0; j < n; ++j) sol.objective += lp.objective[j] * sol.x[j];
    return sol;
}

}  // namespace panelfair
