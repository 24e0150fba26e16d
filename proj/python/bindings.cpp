#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>

#include "panelfair/config.hpp"
#include "panelfair/errors.hpp"
#include "panelfair/export.hpp"
#include "panelfair/harness.hpp"
#include "panelfair/verify.hpp"

namespace py = pybind11;
using namespace panelfair;

namespace {

// Documents cross the boundary as JSON text; the Python wrapper decodes them.
std::string run_text(const std::string& config_json, const std::string& out_dir, bool timing) {
    const RunConfig config = build_run_config(expand_config(Json::parse(config_json)));
    RunRecord record;
    {
        py::gil_scoped_release release;
        record = run_protocol(config);
    }
    const ExportOptions options{timing};
    if (!out_dir.empty()) export_run(record, out_dir, options);
    Json out = summary_json(record, options);
    Json rows = Json::array();
    for (const auto& r : record.ledger.rows()) {
        rows.push_back({{"t", r.t}, {"error", r.error}, {"unfair", r.unfair}, {"lagrangian", r.lagrangian},
                        {"rho1", r.rho1}, {"rho2", r.rho2}, {"hyp_index", r.hyp_index}});
    }
    out["ledger"] = std::move(rows);
    out["masked_reads"] = record.masked_reads;
    return out.dump();
}

std::string verify_text(std::uint64_t seed, bool quick) {
    VerifyOptions options;
    options.seed = seed;
    if (quick) {
        options.identity_trials = 500;
        options.equivalence_trials = 500;
        options.joint_loss_trials = 50;
        options.concentration_R = 1000;
        options.concentration_replicates = 5;
    }
    py::gil_scoped_release release;
    return run_verification(options).to_json();
}

}  // namespace

PYBIND11_MODULE(_panelfair, m) {
    m.doc() = "Native core of the panelfair simulator";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    m.def("version", &version_string);
    m.def("scenario_names", &scenario_names);
    m.def("scenario_json", [](const std::string& name) { return scenario_json(name).dump(); }, py::arg("name"));
    m.def("load_config_json", [](const std::string& path) { return load_config_document(path).dump(); },
          py::arg("path"));
    m.def("toml_to_json", [](const std::string& text) { return toml_to_json(text).dump(); }, py::arg("text"));
    m.def("run_json", &run_text, py::arg("config_json"), py::arg("out_dir") = "", py::arg("timing") = false);
    m.def("verify_json", &verify_text, py::arg("seed") = 1, py::arg("quick") = true);
    m.def(
        "gap_example",
        [](double alpha, double distance, double p) {
            const auto g = gap_example_values(alpha, distance, Policy({p, 1.0 - p}));
            return py::make_tuple(g.realized_unfairness, g.policy_unfairness);
        },
        py::arg("alpha") = 0.2, py::arg("distance") = 0.1, py::arg("p") = 0.5);
}
