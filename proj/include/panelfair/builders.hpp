#pragma once

#include <cstddef>
#include <vector>

#include "panelfair/auditing.hpp"
#include "panelfair/core.hpp"
#include "panelfair/rng.hpp"

namespace panelfair {

/// h_c(x) = 1[x >= c] for c = 0..n over contexts ordered by id: n + 1
/// hypotheses, both constants included.
HypothesisClass threshold_class(std::size_t n);

/// All 2^n prediction tables, indexed by their bit pattern (context 0 is bit 0).
/// Throws ConfigError for n > 16.
HypothesisClass all_functions_class(std::size_t n);

/// `size` distinct random tables; index 0 is the all-zeros constant.
/// Throws ConfigError if size exceeds 2^n.
HypothesisClass random_class(std::size_t n, std::size_t size, Rng& rng);

/// d(x, y) = min(1, scale * ||f_x - f_y||_2).
DistanceFunction feature_distance(const ContextUniverse& universe, double scale);

/// Uniform random symmetric metric with entries in [lo, hi], optionally
/// rounded to a grid step (step <= 0 disables rounding).
DistanceFunction random_distance(std::size_t n, double lo, double hi, double step, Rng& rng);

}  // namespace panelfair
