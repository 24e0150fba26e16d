#include "panelfair/export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "panelfair/errors.hpp"

namespace panelfair {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing", path.string());
    out << contents;
    out.close();
    if (!out) throw IoError("write failed", path.string());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read", path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory", dir.string());
}

Json learner_json(const ResolvedLearner& l) {
    Json j;
    j["algorithm"] = to_string(l.algorithm);
    j["preset"] = l.preset;
    j["C"] = l.C;
    j["eta"] = l.eta;
    j["explore_mix"] = l.explore_mix;
    if (l.algorithm == Algorithm::Ftpl) {
        j["omega"] = l.omega;
        j["L"] = l.L;
        j["R"] = l.R;
        j["estimator_mode"] = to_string(l.estimator_mode);
        j["separator"] = l.separator;
    }
    return j;
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string tick_label(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", std::fabs(v) < 1e-12 ? 0.0 : v);
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Curve {
    std::string label;
    std::vector<double> values;  // values[t - 1] for t = 1..T
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string line_chart(const std::string& title, const std::string& y_label, const std::vector<Curve>& curves) {
    constexpr double W = 720, H = 440, left = 80, right = 180, top = 40, bottom = 60;
    const double pw = W - left - right;
    const double ph = H - top - bottom;

    std::size_t t_max = 1;
    double y_min = 0.0, y_max = 0.0;
    bool first = true;
    for (const auto& c : curves) {
        t_max = std::max(t_max, c.values.size());
        for (double v : c.values) {
            if (!std::isfinite(v)) continue;
            if (first) {
                y_min = y_max = v;
                first = false;
            }
            y_min = std::min(y_min, v);
            y_max = std::max(y_max, v);
        }
    }
    y_min = std::min(y_min, 0.0);
    if (y_max - y_min < 1e-12) y_max = y_min + 1.0;
    const double pad = 0.05 * (y_max - y_min);
    y_max += pad;
    if (y_min < 0.0) y_min -= pad;

    auto sx = [&](double t) { return left + pw * (t_max > 1 ? (t - 1.0) / static_cast<double>(t_max - 1) : 0.5); };
    auto sy = [&](double v) { return top + ph * (1.0 - (v - y_min) / (y_max - y_min)); };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
        << ' ' << H << "\">\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n"
        << "<text x=\"" << left + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
        << escape_xml(title) << "</text>\n";

    for (int i = 0; i <= 5; ++i) {
        const double v = y_min + (y_max - y_min) * i / 5.0;
        const double y = sy(v);
        svg << "<line x1=\"" << left << "\" y1=\"" << fixed(y, 2) << "\" x2=\"" << left + pw << "\" y2=\"" << fixed(y, 2)
            << "\" stroke=\"#e0e0e0\"/>\n"
            << "<text x=\"" << left - 8 << "\" y=\"" << fixed(y + 4, 2)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << tick_label(v) << "</text>\n";
        const double t = 1.0 + (static_cast<double>(t_max) - 1.0) * i / 5.0;
        const double x = sx(t);
        svg << "<text x=\"" << fixed(x, 2) << "\" y=\"" << top + ph + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << tick_label(std::round(t))
            << "</text>\n";
    }
    svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n"
        << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 16
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">round t</text>\n"
        << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(-90 18 " << top + ph / 2 << ")\">" << escape_xml(y_label) << "</text>\n";

    for (std::size_t c = 0; c < curves.size(); ++c) {
        const auto& values = curves[c].values;
        const char* colour = kPalette[c % (sizeof kPalette / sizeof kPalette[0])];
        const std::size_t stride = std::max<std::size_t>(1, values.size() / 800);
        svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < values.size(); i += stride) {
            svg << fixed(sx(static_cast<double>(i + 1)), 2) << ',' << fixed(sy(values[i]), 2) << ' ';
        }
        if (!values.empty() && (values.size() - 1) % stride != 0) {
            svg << fixed(sx(static_cast<double>(values.size())), 2) << ',' << fixed(sy(values.back()), 2);
        }
        svg << "\"/>\n";
        const double ly = top + 14 + 20.0 * static_cast<double>(c);
        svg << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 36 << "\" y2=\"" << ly
            << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << left + pw + 42 << "\" y=\"" << ly + 4
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape_xml(curves[c].label) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace

Json summary_json(const RunRecord& record, const ExportOptions& options) {
    Json j;
    j["name"] = record.name;
    j["T"] = record.T;
    j["k"] = record.k;
    j["seed"] = record.seed;
    j["alpha"] = record.alpha;
    j["gamma"] = record.gamma;
    j["benchmark_epsilon"] = record.benchmark_epsilon;
    j["error_total"] = record.ledger.total_error();
    j["lagrangian_total"] = record.ledger.total_lagrangian();
    j["error_regret"] = record.report.error_regret;
    j["unfairness_total"] = record.report.unfairness_total;
    j["unfairness_regret"] = record.report.unfairness_regret;
    j["lagrangian_regret"] = record.report.lagrangian_regret;
    j["lp_benchmark"] = record.lp_benchmark;
    j["lp_benchmark_lagrangian"] = record.lp_benchmark_lagrangian;
    j["comparator_unfairness"] = record.comparator_unfairness;
    j["comparator_policy"] = record.comparator_policy;
    j["learner"] = learner_json(record.learner);
    j["masked_reads"] = record.masked_reads;
    j["version"] = record.version;
    j["runtime_s"] = options.include_timing ? Json(record.runtime_s) : Json(nullptr);
    return j;
}

Json config_json(const RunRecord& record) {
    Json j = record.config_json.empty() ? Json::object() : Json::parse(record.config_json);
    j["seed"] = record.seed;
    j["resolved_learner"] = learner_json(record.learner);
    return j;
}

void export_run(const RunRecord& record, const std::string& dir, const ExportOptions& options) {
    const fs::path root(dir);
    ensure_dir(root);
    std::ostringstream csv;
    write_ledger_csv(record.ledger, csv);
    write_file(root / "ledger.csv", csv.str());
    write_file(root / "config.json", config_json(record).dump(2) + "\n");
    write_file(root / "summary.json", summary_json(record, options).dump(2) + "\n");
}

PlotSeries plot_series(const RunRecord& record) {
    return {record.name + " seed " + std::to_string(record.seed), record.ledger.rows(), record.lp_benchmark};
}

PlotSeries load_plot_series(const std::string& dir) {
    const fs::path root(dir);
    std::istringstream csv(read_file(root / "ledger.csv"));
    const RegretLedger ledger = read_ledger_csv(csv);
    Json summary;
    try {
        summary = Json::parse(read_file(root / "summary.json"));
    } catch (const Json::parse_error& e) {
        throw IoError(std::string("malformed summary: ") + e.what(), (root / "summary.json").string());
    }
    PlotSeries series;
    series.label = summary.value("name", root.filename().string()) + " seed " +
                   std::to_string(summary.value("seed", std::uint64_t{0}));
    series.rows = ledger.rows();
    series.lp_benchmark = summary.value("lp_benchmark", 0.0);
    return series;
}

std::vector<double> cumulative_error_regret(const PlotSeries& series) {
    const auto T = static_cast<double>(series.rows.size());
    std::vector<double> out;
    out.reserve(series.rows.size());
    double cumulative = 0.0;
    for (std::size_t i = 0; i < series.rows.size(); ++i) {
        cumulative += series.rows[i].error;
        out.push_back(cumulative - static_cast<double>(i + 1) / T * series.lp_benchmark);
    }
    return out;
}

std::vector<std::string> emit_plots(const std::vector<PlotSeries>& series, const std::string& dir) {
    if (series.empty()) throw ConfigError("emit_plots needs at least one run");
    const fs::path root(dir);
    ensure_dir(root);

    std::vector<Curve> regret, unfair, rate;
    for (const auto& s : series) {
        Curve r{s.label, cumulative_error_regret(s)};
        Curve u{s.label, {}};
        Curve q{s.label, {}};
        double count = 0.0;
        for (std::size_t i = 0; i < s.rows.size(); ++i) {
            count += s.rows[i].unfair;
            u.values.push_back(count);
            q.values.push_back(r.values[i] / static_cast<double>(i + 1));
        }
        regret.push_back(std::move(r));
        unfair.push_back(std::move(u));
        rate.push_back(std::move(q));
    }

    const std::vector<std::pair<std::string, std::string>> files{
        {"error_regret.svg", line_chart("Cumulative error regret", "regret", regret)},
        {"unfairness.svg", line_chart("Cumulative unfairness", "violations", unfair)},
        {"regret_rate.svg", line_chart("Error regret per round", "regret / t", rate)},
    };
    std::vector<std::string> paths;
    for (const auto& [name, body] : files) {
        write_file(root / name, body);
        paths.push_back((root / name).string());
    }
    return paths;
}

}  // namespace panelfair
