#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace panelfair {

using Rng = std::mt19937_64;

/// Deterministic child stream of a run seed. The same (seed, name, index)
/// triple always yields the same generator state, independent of how many
/// other streams were created before it.
Rng substream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0);

/// Uniform double in [0, 1) built from the top 53 bits. Used instead of
/// std::uniform_real_distribution so draws are identical across standard libraries.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n). Lemire's multiply-shift with rejection.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

/// Zero-mean Laplace variate with the given scale, by inverse CDF.
double laplace(Rng& rng, double scale);

}  // namespace panelfair
