#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "panelfair/config.hpp"
#include "panelfair/errors.hpp"
#include "panelfair/export.hpp"
#include "panelfair/harness.hpp"
#include "panelfair/sweep.hpp"
#include "panelfair/verify.hpp"

namespace fs = std::filesystem;
using namespace panelfair;

namespace {

std::string output_root() {
    const char* env = std::getenv("PANELFAIR_OUT");
    return env && *env ? env : "runs";
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed, std::string out, bool timing,
            bool plots) {
    Json doc = load_config_document(config_path);
    if (seed) doc["seed"] = *seed;
    const RunConfig config = build_run_config(doc);
    if (out.empty()) {
        out = (fs::path(output_root()) / config.name / ("seed-" + std::to_string(config.seed))).string();
    }
    const RunRecord record = run_protocol(config);
    export_run(record, out, ExportOptions{timing});
    if (plots) emit_plots({plot_series(record)}, out);
    std::cout << "wrote " << out << "\n"
              << "  error_regret      " << record.report.error_regret << "\n"
              << "  unfairness_total  " << record.report.unfairness_total << "\n"
              << "  lagrangian_regret " << record.report.lagrangian_regret << "\n"
              << "  lp_benchmark      " << record.lp_benchmark << "\n";
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& seeds, const std::string& grid_path,
              std::string out, std::size_t workers) {
    const Json base = load_config_document(config_path);
    Json grid;
    if (!grid_path.empty()) {
        std::ifstream in(grid_path, std::ios::binary);
        if (!in) throw IoError("cannot read grid", grid_path);
        std::stringstream buffer;
        buffer << in.rdbuf();
        grid = fs::path(grid_path).extension() == ".toml" ? toml_to_json(buffer.str()) : Json::parse(buffer.str());
    }
    const auto [lo, hi] = parse_seed_range(seeds);
    if (out.empty()) out = (fs::path(output_root()) / "sweep").string();
    const auto runs = run_sweep(base, grid, lo, hi, SweepOptions{out, workers});
    std::cout << "ran " << runs.size() << " runs into " << out << "\n";
    return 0;
}

int cmd_verify(std::uint64_t seed, bool quick, bool serial, const std::string& json_path) {
    VerifyOptions options;
    options.seed = seed;
    options.parallel = !serial;
    if (quick) {
        options.identity_trials = 500;
        options.equivalence_trials = 500;
        options.joint_loss_trials = 50;
        options.concentration_R = 1000;
        options.concentration_replicates = 5;
    }
    const VerificationReport report = run_verification(options);
    report.print_table(std::cout);
    if (!json_path.empty()) {
        std::ofstream out(json_path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write report", json_path);
        out << report.to_json() << '\n';
    }
    return report.all_pass() ? 0 : 1;
}

int cmd_plot(const std::vector<std::string>& inputs, std::string out) {
    std::vector<PlotSeries> series;
    for (const auto& dir : inputs) series.push_back(load_plot_series(dir));
    if (out.empty()) out = inputs.size() == 1 ? inputs.front() : (fs::path(output_root()) / "plots").string();
    for (const auto& path : emit_plots(series, out)) std::cout << "wrote " << path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Individually fair online learning with one-sided feedback: simulate, verify, plot"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run one protocol and export ledger.csv, config.json, summary.json");
    std::string run_config, run_out;
    std::optional<std::uint64_t> run_seed;
    bool run_timing = false, run_plots = false;
    run->add_option("--config", run_config, "JSON or TOML run config")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", run_seed, "Override the config seed");
    run->add_option("--out", run_out, "Output directory (default $PANELFAIR_OUT/<name>/seed-<n>)");
    run->add_flag("--timing", run_timing, "Record wall-clock time in summary.json");
    run->add_flag("--plots", run_plots, "Also write the SVG charts");

    auto* sweep = app.add_subcommand("sweep", "Run a config over a seed range and a parameter grid");
    std::string sweep_config, sweep_seeds = "0", sweep_grid, sweep_out;
    std::size_t sweep_workers = 0;
    sweep->add_option("--config", sweep_config, "Base run config")->required()->check(CLI::ExistingFile);
    sweep->add_option("--seeds", sweep_seeds, "Seed range A..B (inclusive)");
    sweep->add_option("--grid", sweep_grid, "JSON/TOML object of dotted keys to value lists")->check(CLI::ExistingFile);
    sweep->add_option("--out", sweep_out, "Output root (default $PANELFAIR_OUT/sweep)");
    sweep->add_option("--workers", sweep_workers, "Worker threads (0 = all cores)");

    auto* verify = app.add_subcommand("verify", "Run the randomized identity and oracle checks");
    std::uint64_t verify_seed = 1;
    bool verify_quick = false, verify_serial = false;
    std::string verify_json;
    verify->add_option("--seed", verify_seed, "Seed for every check");
    verify->add_flag("--quick", verify_quick, "Fewer trials");
    verify->add_flag("--serial", verify_serial, "Run checks one after another");
    verify->add_option("--json", verify_json, "Also write the report as JSON");

    auto* plot = app.add_subcommand("plot", "Chart one or more exported runs");
    std::vector<std::string> plot_in;
    std::string plot_out;
    plot->add_option("--in", plot_in, "Run directories")->required()->expected(1, -1);
    plot->add_option("--out", plot_out, "Directory for the SVG files");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(run_config, run_seed, run_out, run_timing, run_plots);
        if (*sweep) return cmd_sweep(sweep_config, sweep_seeds, sweep_grid, sweep_out, sweep_workers);
        if (*verify) return cmd_verify(verify_seed, verify_quick, verify_serial, verify_json);
        if (*plot) return cmd_plot(plot_in, plot_out);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
