// resonant: run, validate and list scenarios.
//   resonant run <config.json>       bundle goes to $RESONANT_OUTPUT_DIR (default ./resonant_out)
//   resonant validate <config.json>
//   resonant list-builtins
// Exit: 0 ok or partial, 1 config error, 2 hard failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "resonant/error.hpp"
#include "resonant/scenario.hpp"

namespace fs = std::filesystem;

namespace {

// a bare built-in name is accepted in place of a file
resonant::Json load(const std::string& arg) {
  if (!fs::exists(arg)) {
    const auto& names = resonant::builtin_scenario_names();
    if (std::find(names.begin(), names.end(), arg) != names.end()) return resonant::builtin_scenario(arg);
  }
  return resonant::load_config(arg);
}

fs::path base_of(const std::string& arg) { return fs::exists(arg) ? fs::path(arg).parent_path() : fs::current_path(); }

fs::path output_dir() {
  const char* env = std::getenv("RESONANT_OUTPUT_DIR");
  return env && *env ? fs::path(env) : fs::path("resonant_out");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"resonant: periodic solutions of semilinear parabolic problems at resonance"};
  app.require_subcommand(1);
  std::string config;
  auto* run = app.add_subcommand("run", "run a scenario and write its report bundle");
  run->add_option("config", config, "scenario file or built-in name")->required();
  auto* val = app.add_subcommand("validate", "check a scenario without running it");
  val->add_option("config", config, "scenario file or built-in name")->required();
  app.add_subcommand("list-builtins", "list potentials, nonlinearity families and scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand("list-builtins")) {
      std::cout << resonant::list_builtins();
      return 0;
    }
    const resonant::Json doc = load(config);
    if (app.got_subcommand("validate")) {
      const auto s = resonant::validate_scenario(doc, base_of(config));
      std::cout << "valid: " << s.name << " (seed " << s.seed << ", " << s.nodes << " nodes)\nanalyses:";
      for (const auto& a : s.analyses) std::cout << ' ' << a;
      std::cout << '\n';
      return 0;
    }
    const auto out = resonant::run_scenario(doc, base_of(config));
    const fs::path dir = output_dir();
    resonant::write_outputs(out, dir);
    for (auto it = out.bundle["analyses"].begin(); it != out.bundle["analyses"].end(); ++it) {
      std::cout << it.key() << ": " << it.value()["status"].get<std::string>();
      if (it.value().contains("error")) std::cout << " (" << it.value()["error"].get<std::string>() << ")";
      std::cout << '\n';
    }
    std::cout << "bundle: " << (dir / (out.name + ".json")).string() << (out.partial ? " [partial]" : "") << '\n';
    return 0;
  } catch (const resonant::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 2;
  }
}
