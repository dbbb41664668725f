#pragma once

// Scenario files: JSON documents layered over built-in defaults with
// "extends", typed validation with field paths, and the runner that executes
// the requested analyses in dependency order and assembles one bundle.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "resonant/report.hpp"

namespace resonant {

using report::Json;

/// Every key a scenario may set, with its default.
const Json& default_config();

const std::vector<std::string>& builtin_scenario_names();

/// The fully merged document of a built-in scenario. Throws ConfigError.
Json builtin_scenario(const std::string& name);

/// Reads a scenario file and resolves "extends" (a built-in name or a path
/// relative to the file) on top of the defaults. Throws ConfigError.
Json load_config(const std::filesystem::path& file);

/// Resolves an in-memory document the same way; relative paths use base_dir.
Json resolve_config(const Json& doc, const std::filesystem::path& base_dir);

/// Analyses in the order they would run, dependencies included.
const std::vector<std::string>& analysis_order();

struct ValidationSummary {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<std::string> analyses;
  std::size_t nodes = 0;
};

/// Full typed validation, including building the grid, profiles, operator and
/// nonlinearity. Throws ConfigError with the offending field path.
ValidationSummary validate_scenario(const Json& resolved, const std::filesystem::path& base_dir);

struct RunOutput {
  std::string name;
  Json bundle;
  std::vector<report::Csv> csv;
  /// some requested analysis failed or was skipped
  bool partial = false;
};

/// Throws ConfigError on invalid input. Analysis failures are recorded in the
/// bundle instead of thrown.
RunOutput run_scenario(const Json& resolved, const std::filesystem::path& base_dir);

/// Writes <dir>/<name>.json and <dir>/<name>_<csv>.csv. Throws Error on I/O failure.
void write_outputs(const RunOutput& out, const std::filesystem::path& dir);

/// Stable text table of potentials, nonlinearity families and scenarios.
std::string list_builtins();

}  // namespace resonant
