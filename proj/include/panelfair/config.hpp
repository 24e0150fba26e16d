#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "panelfair/harness.hpp"

namespace panelfair {

using Json = nlohmann::json;

/// Converts the TOML subset used by run configs to JSON: [table] and
/// [[array.of.tables]] headers, dotted and quoted keys, basic and literal
/// strings, integers, floats, booleans, (multi-line) arrays and inline tables.
/// Throws ConfigError with the line number on anything else.
Json toml_to_json(const std::string& text);

/// Names accepted by the "scenario" key.
std::vector<std::string> scenario_names();

/// The universe/class/environment/panel/learner blocks of a named scenario.
/// Throws ConfigError for an unknown name.
Json scenario_json(const std::string& name);

/// Parses a document (JSON, or TOML when `is_toml`) and expands its scenario:
/// the scenario's blocks are the base and the document is merge-patched over them.
Json expand_config(const Json& document);
Json parse_config_text(const std::string& text, bool is_toml);

/// Reads a .json or .toml file (by extension) and expands it. IoError if unreadable.
Json load_config_document(const std::string& path);

/// Sets a dotted key ("learner.R") in a config document, creating objects as needed.
void set_config_value(Json& document, const std::string& dotted_key, const Json& value);

/// Builds and validates a RunConfig from an expanded document. The canonical
/// dump of the document becomes RunConfig::source_json.
RunConfig build_run_config(const Json& document);

/// Convenience: parse_config_text + build_run_config.
RunConfig run_config_from_text(const std::string& text, bool is_toml = false);

}  // namespace panelfair
