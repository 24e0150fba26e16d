#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "panelfair/core.hpp"

namespace panelfair {

/// Desk-scale caps for the randomized checks.
inline constexpr std::size_t kVerifyMaxContexts = 8;
inline constexpr std::size_t kVerifyMaxHypotheses = 16;
inline constexpr std::size_t kVerifyMaxPanel = 7;
inline constexpr std::size_t kVerifyMaxC = 5;

struct CheckResult {
    std::string name;
    std::size_t trials = 0;
    double max_discrepancy = 0.0;
    double tolerance = 0.0;
    /// Whether the max discrepancy must be strictly below the tolerance (true)
    /// or may equal it (false).
    bool strict = true;
    bool pass = false;
    std::string detail;
};

struct VerificationReport {
    std::vector<CheckResult> checks;

    bool all_pass() const;
    /// JSON array of {name, trials, max_discrepancy, tolerance, pass, detail}.
    std::string to_json() const;
    void print_table(std::ostream& out) const;
};

/// Lagrangian difference == augmented error difference == 2 x expected
/// semi-bandit loss difference, on random desk-scale rounds. Tolerance 1e-9.
CheckResult check_reduction_identities(std::size_t trials, std::uint64_t seed);

/// Panel verdict == representative auditor verdict on every ordered pair.
/// The discrepancy is the mismatch count; tolerance 0.
CheckResult check_representative_equivalence(std::size_t trials, std::uint64_t seed);

/// C eps sum Unfair + error regret <= Lagrangian regret against Q_{alpha-eps,gamma}
/// for `grid_points` values of eps in [0, alpha]. Slack 1e-9.
CheckResult check_joint_loss(std::size_t trials, std::uint64_t seed, std::size_t grid_points = 5);

struct GapValues {
    /// E_{h ~ pi} Unfair(point mass on h).
    double realized_unfairness;
    /// Unfair(pi).
    double policy_unfairness;
};

/// Two contexts, two mirror-image hypotheses, one auditor at distance d, gamma = 1.
GapValues gap_example_values(double alpha, double distance, const Policy& policy);

/// The two-context example at alpha = 0.2, d = 0.1, uniform policy must give (1, 0);
/// also checks pi = (0.6, 0.4) gives policy unfairness 0 and alpha = 1 gives realized 0.
CheckResult check_gap_example();

/// For a known policy, R samples per round over T rounds and `replicates`
/// repetitions; the fraction of (round, context) pairs whose empirical marginal
/// misses the true one by more than sqrt(log(2kT/delta) / (2R)) must be at most
/// delta + 3 sigma. Throws ConfigError if R < 10.
CheckResult check_estimation_concentration(std::size_t T, std::size_t R, double delta, std::size_t replicates,
                                           std::uint64_t seed, std::size_t k = 2);

struct VerifyOptions {
    std::uint64_t seed = 1;
    std::size_t identity_trials = 10000;
    std::size_t equivalence_trials = 10000;
    std::size_t joint_loss_trials = 1000;
    std::size_t joint_loss_grid = 5;
    std::size_t concentration_T = 50;
    std::size_t concentration_R = 10000;
    double concentration_delta = 0.05;
    std::size_t concentration_replicates = 20;
    /// Run the checks on separate threads.
    bool parallel = true;
};

/// Every check above; each owns its own substream, so the result does not
/// depend on `parallel`.
VerificationReport run_verification(const VerifyOptions& options);

}  // namespace panelfair
