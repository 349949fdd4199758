#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "darkcool/atom_model.hpp"
#include "json.hpp"

namespace darkcool {

enum class Task { spectrum, friction, diffusion, temperature, mcwf, validate };

Task parse_task(std::string_view name);
std::string_view to_string(Task task);

struct ScanBlock {
  double lo = 0.0;
  double hi = 0.0;
  int points = 0;
  std::string grid_kind = "uniform";  // uniform | log_dense (spectrum) | geometric
  std::string unit = "gamma";         // gamma | recoil (E_r / hbar)
};

struct McwfBlock {
  int N = 50;
  int M = 0;
  double t_final = 0.0;  // 1/gamma
  std::uint64_t base_seed = 1;
  int samples = 200;
  double initial_width = 5.0;
  std::string propagator = "spectral";
  std::optional<double> delta_p_recoil;  // overrides drive.delta_p
};

struct OutputBlock {
  std::string directory = "darkcool_out";
  bool csv = true;
  bool manifest = true;
  bool summary = true;
};

struct RunConfig {
  std::optional<AtomSpecies> species;
  DriveConfig drive;
  Task task = Task::spectrum;
  std::optional<ScanBlock> scan;
  std::optional<McwfBlock> mcwf;
  OutputBlock output;
  unsigned threads = 0;
};

/// Parses and validates a config document. Throws ConfigError naming the
/// offending key (e.g. "drive.g42").
RunConfig parse_run_config(const nlohmann::json& doc);

nlohmann::json load_json_file(const std::filesystem::path& path);

/// Applies "a.b.c=value"; value is parsed as JSON when possible, else taken as a string.
void apply_override(nlohmann::json& doc, std::string_view assignment);

/// Fully explicit form of a parsed config (presets expanded).
nlohmann::json to_json(const RunConfig& cfg);

/// Config fragment for fig3_1, fig3, hg or rb87. Throws ConfigError otherwise.
nlohmann::json preset_fragment(std::string_view name);

}  // namespace darkcool
