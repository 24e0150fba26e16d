#include "panelfair/builders.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "panelfair/errors.hpp"

namespace panelfair {

HypothesisClass threshold_class(std::size_t n) {
    if (n == 0) throw ConfigError("threshold class needs at least one context");
    std::vector<Hypothesis> hs;
    for (std::size_t c = 0; c <= n; ++c) {
        std::vector<Bit> table(n);
        for (std::size_t x = 0; x < n; ++x) table[x] = x >= c ? 1 : 0;
        hs.emplace_back(std::move(table));
    }
    return HypothesisClass("thresholds", std::move(hs));
}

HypothesisClass all_functions_class(std::size_t n) {
    if (n == 0 || n > 16) throw ConfigError("all-functions class supports 1..16 contexts");
    std::vector<Hypothesis> hs;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        std::vector<Bit> table(n);
        for (std::size_t x = 0; x < n; ++x) table[x] = static_cast<Bit>((mask >> x) & 1U);
        hs.emplace_back(std::move(table));
    }
    return HypothesisClass("all_functions", std::move(hs));
}

HypothesisClass random_class(std::size_t n, std::size_t size, Rng& rng) {
    if (n == 0 || n > 30) throw ConfigError("random class supports 1..30 contexts");
    if (size == 0 || size > (std::size_t{1} << n)) throw ConfigError("random class size exceeds 2^n");
    std::set<std::uint64_t> seen{0};
    std::vector<Hypothesis> hs{Hypothesis(std::vector<Bit>(n, 0))};
    while (hs.size() < size) {
        const std::uint64_t mask = uniform_index(rng, std::uint64_t{1} << n);
        if (!seen.insert(mask).second) continue;
        std::vector<Bit> table(n);
        for (std::size_t x = 0; x < n; ++x) table[x] = static_cast<Bit>((mask >> x) & 1U);
        hs.emplace_back(std::move(table));
    }
    return HypothesisClass("random", std::move(hs));
}

DistanceFunction feature_distance(const ContextUniverse& universe, double scale) {
    if (!(scale >= 0.0)) throw ConfigError("distance scale must be >= 0");
    const std::size_t n = universe.size();
    std::vector<std::vector<double>> rows(n, std::vector<double>(n, 0.0));
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            const auto& fa = universe[static_cast<ContextId>(a)].features;
            const auto& fb = universe[static_cast<ContextId>(b)].features;
            double sq = 0.0;
            for (std::size_t i = 0; i < fa.size(); ++i) sq += (fa[i] - fb[i]) * (fa[i] - fb[i]);
            rows[a][b] = rows[b][a] = std::min(1.0, scale * std::sqrt(sq));
        }
    }
    return DistanceFunction(std::move(rows));
}

DistanceFunction random_distance(std::size_t n, double lo, double hi, double step, Rng& rng) {
    if (!(lo >= 0.0 && lo <= hi && hi <= 1.0)) throw ConfigError("random distance range must satisfy 0 <= lo <= hi <= 1");
    std::vector<std::vector<double>> rows(n, std::vector<double>(n, 0.0));
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            double v = lo + (hi - lo) * uniform01(rng);
            if (step > 0.0) v = std::clamp(std::round(v / step) * step, lo, hi);
            rows[a][b] = rows[b][a] = v;
        }
    }
    return DistanceFunction(std::move(rows));
}

}  // namespace panelfair
