// darkcool: command-line front end.
//
//   darkcool run <config.json> [--set key=value]...
//   darkcool preset <fig3_1|fig3|hg|rb87>
//   darkcool validate <config.json> [--set key=value]...
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "darkcool/error.hpp"
#include "darkcool/run_config.hpp"
#include "darkcool/tasks.hpp"

namespace {

darkcool::RunConfig load(const std::string& path, const std::vector<std::string>& sets) {
  auto doc = darkcool::load_json_file(path);
  for (const auto& s : sets) darkcool::apply_override(doc, s);
  return darkcool::parse_run_config(doc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"darkcool: dark-resonance laser cooling simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", DARKCOOL_VERSION);

  std::string config_path;
  std::vector<std::string> sets;
  auto* run = app.add_subcommand("run", "Run the task described by a config file");
  run->add_option("config", config_path, "JSON config (or a manifest.json from a previous run)")
      ->required();
  run->add_option("--set", sets, "Override a dotted key, e.g. --set drive.delta_p=-4.5");

  std::string preset_name;
  auto* preset = app.add_subcommand("preset", "Print a config fragment for a named preset");
  preset->add_option("name", preset_name, "fig3_1, fig3, hg or rb87")->required();

  auto* validate = app.add_subcommand("validate", "Check a config file without running it");
  validate->add_option("config", config_path, "JSON config")->required();
  validate->add_option("--set", sets, "Override a dotted key");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*preset) {
      std::cout << darkcool::preset_fragment(preset_name).dump(2) << '\n';
      return 0;
    }
    if (*validate) {
      const auto cfg = load(config_path, sets);
      std::cout << "config ok: task " << darkcool::to_string(cfg.task) << '\n';
      return 0;
    }
    const auto cfg = load(config_path, sets);
    const auto outcome = darkcool::run_task(cfg);
    std::cout << outcome.summary;
    for (const auto& f : outcome.files) std::cout << "wrote " << f << '\n';
    return outcome.exit_code;
  } catch (const darkcool::ConfigError& e) {
    std::cerr << "darkcool: config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "darkcool: error: " << e.what() << '\n';
    return 3;
  }
}
