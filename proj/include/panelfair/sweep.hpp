#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "panelfair/config.hpp"

namespace panelfair {

struct SweepPoint {
    /// "learner.R=1000,T=200"; "base" for an empty grid.
    std::string key;
    Json overrides;
};

/// Cartesian product of a grid document {"dotted.key": [values...], ...}, in
/// key order. Throws ConfigError if a value list is empty or not an array.
std::vector<SweepPoint> expand_grid(const Json& grid);

/// Parses "A..B" (inclusive) or a single seed.
std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text);

struct SweepRun {
    std::string key;
    std::uint64_t seed = 0;
    std::string out_dir;
    Json summary;
};

struct SweepOptions {
    std::string out_root;
    std::size_t workers = 0;  // 0: hardware concurrency
};

/// Runs every (grid point, seed) pair, exporting each run to
/// out_root/<key>/seed-<n>. Results are ordered by (grid point, seed) whatever
/// the worker count. Also writes out_root/sweep.csv and out_root/sweep_means.json.
std::vector<SweepRun> run_sweep(const Json& base, const Json& grid, std::uint64_t seed_lo, std::uint64_t seed_hi,
                                const SweepOptions& options);

}  // namespace panelfair
