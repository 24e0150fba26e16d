#include "panelfair/sweep.hpp"

#include <algorithm>
#include <cctype>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <sstream>
#include <thread>

#include "panelfair/errors.hpp"
#include "panelfair/export.hpp"
#include "panelfair/format.hpp"

namespace panelfair {

namespace fs = std::filesystem;

namespace {

std::string value_text(const Json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

std::string safe_dir_name(const std::string& key) {
    std::string out;
    for (char c : key) {
        out += (std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '.' || c == '-' || c == '_' || c == '=')
                   ? c
                   : '_';
    }
    return out;
}

// {"learner": {"R": [..]}} -> {"learner.R": [..]}, as TOML tables produce.
void flatten(const Json& node, const std::string& prefix, std::map<std::string, Json>& out) {
    for (const auto& [key, value] : node.items()) {
        const std::string path = prefix.empty() ? key : prefix + "." + key;
        if (value.is_object()) {
            flatten(value, path, out);
        } else {
            out[path] = value;
        }
    }
}

constexpr const char* kMetrics[] = {"error_regret", "unfairness_total", "unfairness_regret", "lagrangian_regret",
                                    "lp_benchmark"};

}  // namespace

std::vector<SweepPoint> expand_grid(const Json& grid) {
    std::vector<SweepPoint> points{{"", Json::object()}};
    if (grid.is_null()) {
        points.front().key = "base";
        return points;
    }
    if (!grid.is_object()) throw ConfigError("sweep grid must be an object of value lists");
    std::map<std::string, Json> flat;
    flatten(grid, "", flat);
    for (const auto& [key, values] : flat) {
        if (!values.is_array() || values.empty()) throw ConfigError("grid entry '" + key + "' needs a nonempty list");
        std::vector<SweepPoint> next;
        for (const auto& p : points) {
            for (const auto& v : values) {
                SweepPoint q = p;
                q.key += (q.key.empty() ? "" : ",") + key + "=" + value_text(v);
                q.overrides[key] = v;
                next.push_back(std::move(q));
            }
        }
        points = std::move(next);
    }
    if (points.size() == 1 && points.front().key.empty()) points.front().key = "base";
    return points;
}

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
    try {
        const auto dots = text.find("..");
        if (dots == std::string::npos) {
            const auto s = std::stoull(text);
            return {s, s};
        }
        const auto lo = std::stoull(text.substr(0, dots));
        const auto hi = std::stoull(text.substr(dots + 2));
        if (hi < lo) throw ConfigError("seed range '" + text + "' is empty");
        return {lo, hi};
    } catch (const std::logic_error& e) {
        if (dynamic_cast<const ConfigError*>(&e)) throw;
        throw ConfigError("malformed seed range '" + text + "'");
    }
}

std::vector<SweepRun> run_sweep(const Json& base, const Json& grid, std::uint64_t seed_lo, std::uint64_t seed_hi,
                                const SweepOptions& options) {
    if (seed_hi < seed_lo) throw ConfigError("empty seed range");
    const auto points = expand_grid(grid);

    struct Job {
        const SweepPoint* point;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (const auto& p : points) {
        for (std::uint64_t s = seed_lo; s <= seed_hi; ++s) jobs.push_back({&p, s});
    }
    // Build every config up front so errors surface before any work starts.
    std::vector<RunConfig> configs;
    configs.reserve(jobs.size());
    for (const auto& job : jobs) {
        Json doc = expand_config(base);
        for (const auto& [key, value] : job.point->overrides.items()) set_config_value(doc, key, value);
        doc["seed"] = job.seed;
        configs.push_back(build_run_config(doc));
    }

    std::vector<SweepRun> results(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            const RunRecord record = run_protocol(configs[i]);
            SweepRun& out = results[i];
            out.key = jobs[i].point->key;
            out.seed = jobs[i].seed;
            out.out_dir = (fs::path(options.out_root) / safe_dir_name(out.key) / ("seed-" + std::to_string(out.seed)))
                              .string();
            export_run(record, out.out_dir);
            out.summary = summary_json(record);
        }
    };
    std::size_t workers = options.workers ? options.workers : std::max(1U, std::thread::hardware_concurrency());
    workers = std::min(workers, jobs.size());
    std::vector<std::future<void>> futures;
    for (std::size_t w = 0; w < workers; ++w) futures.push_back(std::async(std::launch::async, worker));
    for (auto& f : futures) f.get();

    std::ostringstream csv;
    csv << "key,seed";
    for (const char* m : kMetrics) csv << ',' << m;
    csv << '\n';
    std::map<std::string, std::map<std::string, double>> sums;
    std::map<std::string, std::size_t> counts;
    for (const auto& r : results) {
        csv << '"' << r.key << "\"," << r.seed;
        for (const char* m : kMetrics) {
            const double v = r.summary.at(m).get<double>();
            csv << ',' << format_number(v);
            sums[r.key][m] += v;
        }
        csv << '\n';
        ++counts[r.key];
    }
    Json means = Json::object();
    for (const auto& [key, metrics] : sums) {
        Json entry;
        entry["runs"] = counts[key];
        for (const auto& [m, total] : metrics) entry[m] = total / static_cast<double>(counts[key]);
        means[key] = entry;
    }

    const fs::path root(options.out_root);
    std::error_code ec;
    fs::create_directories(root, ec);
    {
        std::ofstream out(root / "sweep.csv", std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write", (root / "sweep.csv").string());
        out << csv.str();
    }
    {
        std::ofstream out(root / "sweep_means.json", std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write", (root / "sweep_means.json").string());
        out << means.dump(2) << '\n';
    }
    return results;
}

}  // namespace panelfair
