#include "panelfair/rng.hpp"

#include <cmath>

namespace panelfair {

namespace {

__extension__ typedef unsigned __int128 u128;

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

}  // namespace

Rng substream(std::uint64_t seed, std::string_view name, std::uint64_t index) {
    const std::uint64_t tag = fnv1a(name);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
}

std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        const std::uint64_t x = rng();
        const u128 m = static_cast<u128>(x) * n;
        if (static_cast<std::uint64_t>(m) >= threshold) {
            return static_cast<std::uint64_t>(m >> 64);
        }
    }
}

double laplace(Rng& rng, double scale) {
    // u in (-1/2, 1/2); the endpoint u = -1/2 has probability 2^-53 and is remapped.
    double u = uniform01(rng) - 0.5;
    if (u == -0.5) u = 0.0;
    const double magnitude = -scale * std::log1p(-2.0 * std::fabs(u));
    return u < 0 ? -magnitude : magnitude;
}

}  // namespace panelfair
