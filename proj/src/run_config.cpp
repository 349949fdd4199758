#include "darkcool/run_config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "darkcool/error.hpp"

namespace darkcool {

using nlohmann::json;

Task parse_task(std::string_view name) {
  if (name == "spectrum") return Task::spectrum;
  if (name == "friction") return Task::friction;
  if (name == "diffusion") return Task::diffusion;
  if (name == "temperature") return Task::temperature;
  if (name == "mcwf") return Task::mcwf;
  if (name == "validate") return Task::validate;
  throw ConfigError("task: unknown task '" + std::string(name) +
                    "' (expected spectrum, friction, diffusion, temperature, mcwf or validate)");
}

std::string_view to_string(Task task) {
  switch (task) {
    case Task::spectrum: return "spectrum";
    case Task::friction: return "friction";
    case Task::diffusion: return "diffusion";
    case Task::temperature: return "temperature";
    case Task::mcwf: return "mcwf";
    case Task::validate: return "validate";
  }
  return "?";
}

namespace {

const json& block(const json& doc, const std::string& name) {
  if (!doc.contains(name)) throw ConfigError("missing block '" + name + "'");
  const json& b = doc.at(name);
  if (!b.is_object()) throw ConfigError(name + " must be an object");
  return b;
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                const std::string& path) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key '" + (path.empty() ? key : path + "." + key) + "'");
  }
}

double number(const json& obj, const std::string& key, const std::string& path) {
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(path + "." + key + " must be a number");
  return v.get<double>();
}

std::optional<double> opt_number(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) return std::nullopt;
  return number(obj, key, path);
}

double req_number(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) throw ConfigError("missing key " + path + "." + key);
  return number(obj, key, path);
}

std::string string_value(const json& obj, const std::string& key, const std::string& path) {
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(path + "." + key + " must be a string");
  return v.get<std::string>();
}

long long integer(const json& obj, const std::string& key, const std::string& path) {
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(path + "." + key + " must be an integer");
  return v.get<long long>();
}

DriveConfig drive_preset(const std::string& name) {
  if (name == "fig3_1") return presets::fig3_1();
  if (name == "fig3") return presets::fig3();
  throw ConfigError("drive.preset: unknown preset '" + name + "' (expected fig3_1 or fig3)");
}

struct DriveField {
  const char* key;
  double DriveConfig::*member;
};

constexpr DriveField kDriveFields[] = {
    {"g_p", &DriveConfig::g_p},         {"g41", &DriveConfig::g41},
    {"g42", &DriveConfig::g42},         {"delta_p", &DriveConfig::delta_p},
    {"delta41", &DriveConfig::delta41}, {"delta42", &DriveConfig::delta42},
    {"gamma41", &DriveConfig::gamma41}, {"gamma42", &DriveConfig::gamma42},
    {"gamma23", &DriveConfig::gamma23}, {"gamma13", &DriveConfig::gamma13}};

DriveConfig parse_drive(const json& d) {
  check_keys(d, {"preset", "g_p", "g41", "g42", "delta_p", "delta41", "delta42", "gamma41",
                 "gamma42", "gamma23", "gamma13"},
             "drive");
  const bool has_preset = d.contains("preset");
  DriveConfig c = has_preset ? drive_preset(string_value(d, "preset", "drive")) : DriveConfig{};
  for (const auto& f : kDriveFields) {
    if (d.contains(f.key)) {
      c.*f.member = number(d, f.key, "drive");
    } else if (!has_preset) {
      throw ConfigError(std::string("missing key drive.") + f.key);
    }
  }
  c.validate();
  return c;
}

AtomSpecies parse_species(const json& s) {
  check_keys(s, {"preset", "name", "mass_amu", "mass_kg", "lambda_m", "gamma"}, "species");
  std::optional<AtomSpecies> base;
  if (s.contains("preset")) base = species::by_name(string_value(s, "preset", "species"));
  const std::string name = s.contains("name") ? string_value(s, "name", "species")
                           : base             ? base->name()
                                              : "custom";
  if (s.contains("mass_amu") && s.contains("mass_kg"))
    throw ConfigError("species: give only one of mass_amu and mass_kg");
  std::optional<double> mass;
  if (s.contains("mass_amu")) mass = number(s, "mass_amu", "species") * constants::atomic_mass_unit;
  if (s.contains("mass_kg")) mass = number(s, "mass_kg", "species");
  if (!mass && base) mass = base->mass();
  if (!mass) throw ConfigError("missing key species.mass_amu");
  std::optional<double> lambda = opt_number(s, "lambda_m", "species");
  if (!lambda && base) lambda = base->lambda_probe();
  if (!lambda) throw ConfigError("missing key species.lambda_m");
  std::optional<double> gamma = opt_number(s, "gamma", "species");
  if (!gamma && base) gamma = base->gamma();
  if (!gamma) throw ConfigError("missing key species.gamma");
  return AtomSpecies(name, *mass, *lambda, *gamma);
}

ScanBlock parse_scan(const json& s, Task task) {
  check_keys(s, {"lo", "hi", "points", "grid_kind", "unit"}, "scan");
  ScanBlock b;
  b.lo = req_number(s, "lo", "scan");
  b.hi = req_number(s, "hi", "scan");
  if (!s.contains("points")) throw ConfigError("missing key scan.points");
  b.points = static_cast<int>(integer(s, "points", "scan"));
  if (s.contains("grid_kind")) b.grid_kind = string_value(s, "grid_kind", "scan");
  if (s.contains("unit")) b.unit = string_value(s, "unit", "scan");
  if (!(b.lo < b.hi)) throw ConfigError("scan.lo must be smaller than scan.hi");
  if (b.points < 2) throw ConfigError("scan.points must be >= 2");
  if (b.unit != "gamma" && b.unit != "recoil")
    throw ConfigError("scan.unit must be 'gamma' or 'recoil'");
  const bool spectrum = task == Task::spectrum;
  if (b.grid_kind == "log_dense") {
    if (!spectrum) throw ConfigError("scan.grid_kind 'log_dense' applies to the spectrum task only");
  } else if (b.grid_kind == "geometric") {
    if (spectrum) throw ConfigError("scan.grid_kind 'geometric' is not available for spectra");
    if (!(b.lo * b.hi > 0.0)) throw ConfigError("scan.grid_kind 'geometric' needs lo and hi of one sign");
  } else if (b.grid_kind != "uniform") {
    throw ConfigError("scan.grid_kind: unknown value '" + b.grid_kind + "'");
  }
  return b;
}

McwfBlock parse_mcwf(const json& m) {
  check_keys(m, {"N", "M", "t_final", "base_seed", "samples", "initial_width", "propagator",
                 "delta_p_recoil"},
             "mcwf");
  McwfBlock b;
  if (!m.contains("M")) throw ConfigError("missing key mcwf.M");
  b.M = static_cast<int>(integer(m, "M", "mcwf"));
  b.t_final = req_number(m, "t_final", "mcwf");
  if (m.contains("N")) b.N = static_cast<int>(integer(m, "N", "mcwf"));
  if (m.contains("base_seed")) {
    const json& v = m.at("base_seed");
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      throw ConfigError("mcwf.base_seed must be a non-negative integer");
    b.base_seed = v.get<std::uint64_t>();
  }
  if (m.contains("samples")) b.samples = static_cast<int>(integer(m, "samples", "mcwf"));
  if (m.contains("initial_width")) b.initial_width = number(m, "initial_width", "mcwf");
  if (m.contains("propagator")) b.propagator = string_value(m, "propagator", "mcwf");
  b.delta_p_recoil = opt_number(m, "delta_p_recoil", "mcwf");
  if (b.M < 2) throw ConfigError("mcwf.M must be >= 2");
  if (!(b.t_final > 0.0)) throw ConfigError("mcwf.t_final must be > 0");
  if (b.N < 1) throw ConfigError("mcwf.N must be >= 1");
  if (b.samples < 2) throw ConfigError("mcwf.samples must be >= 2");
  if (!(b.initial_width >= 0.0)) throw ConfigError("mcwf.initial_width must be >= 0");
  if (b.propagator != "spectral" && b.propagator != "rk4")
    throw ConfigError("mcwf.propagator must be 'spectral' or 'rk4'");
  return b;
}

OutputBlock parse_output(const json& o) {
  check_keys(o, {"directory", "formats"}, "output");
  OutputBlock b;
  if (o.contains("directory")) b.directory = string_value(o, "directory", "output");
  if (o.contains("formats")) {
    const json& f = o.at("formats");
    if (!f.is_array()) throw ConfigError("output.formats must be an array");
    b.csv = b.manifest = b.summary = false;
    for (const auto& item : f) {
      if (!item.is_string()) throw ConfigError("output.formats entries must be strings");
      const auto s = item.get<std::string>();
      if (s == "csv") b.csv = true;
      else if (s == "manifest") b.manifest = true;
      else if (s == "summary") b.summary = true;
      else throw ConfigError("output.formats: unknown format '" + s + "'");
    }
  }
  return b;
}

}  // namespace

RunConfig parse_run_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  check_keys(doc, {"species", "drive", "task", "scan", "mcwf", "output", "threads", "manifest"}, "");
  RunConfig cfg;
  if (!doc.contains("task")) throw ConfigError("missing key task");
  cfg.task = parse_task(string_value(doc, "task", "config"));
  cfg.drive = parse_drive(block(doc, "drive"));
  if (doc.contains("species")) cfg.species = parse_species(block(doc, "species"));
  if (doc.contains("output")) cfg.output = parse_output(block(doc, "output"));
  if (doc.contains("threads")) {
    const long long t = integer(doc, "threads", "config");
    if (t < 0) throw ConfigError("threads must be >= 0");
    cfg.threads = static_cast<unsigned>(t);
  }

  const bool needs_scan = cfg.task == Task::spectrum || cfg.task == Task::friction ||
                          cfg.task == Task::diffusion || cfg.task == Task::temperature;
  const bool needs_mcwf = cfg.task == Task::mcwf || cfg.task == Task::validate;
  const bool needs_species = cfg.task == Task::friction || cfg.task == Task::diffusion ||
                             cfg.task == Task::temperature || cfg.task == Task::mcwf;
  if (doc.contains("scan")) {
    if (!needs_scan) throw ConfigError("scan block is not used by task " + std::string(to_string(cfg.task)));
    cfg.scan = parse_scan(block(doc, "scan"), cfg.task);
  } else if (needs_scan) {
    throw ConfigError("missing block 'scan'");
  }
  if (doc.contains("mcwf")) {
    if (!needs_mcwf) throw ConfigError("mcwf block is not used by task " + std::string(to_string(cfg.task)));
    cfg.mcwf = parse_mcwf(block(doc, "mcwf"));
  } else if (needs_mcwf) {
    throw ConfigError("missing block 'mcwf'");
  }
  if (needs_species && !cfg.species) throw ConfigError("missing block 'species'");
  if (cfg.scan && cfg.scan->unit == "recoil" && !cfg.species)
    throw ConfigError("scan.unit 'recoil' requires a species block");
  if (cfg.mcwf && cfg.mcwf->delta_p_recoil && !cfg.species)
    throw ConfigError("mcwf.delta_p_recoil requires a species block");
  return cfg;
}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw ConfigError("override '" + std::string(assignment) + "' must have the form key=value");
  const std::string key(assignment.substr(0, eq));
  const std::string value(assignment.substr(eq + 1));
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;
  }
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
    if (!node->is_object()) throw ConfigError("override key '" + key + "' descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = parsed;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

json to_json(const RunConfig& cfg) {
  json doc;
  doc["task"] = std::string(to_string(cfg.task));
  json d;
  for (const auto& f : kDriveFields) d[f.key] = cfg.drive.*f.member;
  doc["drive"] = d;
  if (cfg.species) {
    doc["species"] = {{"name", cfg.species->name()},
                      {"mass_kg", cfg.species->mass()},
                      {"lambda_m", cfg.species->lambda_probe()},
                      {"gamma", cfg.species->gamma()}};
  }
  if (cfg.scan) {
    doc["scan"] = {{"lo", cfg.scan->lo},
                   {"hi", cfg.scan->hi},
                   {"points", cfg.scan->points},
                   {"grid_kind", cfg.scan->grid_kind},
                   {"unit", cfg.scan->unit}};
  }
  if (cfg.mcwf) {
    json m = {{"N", cfg.mcwf->N},
              {"M", cfg.mcwf->M},
              {"t_final", cfg.mcwf->t_final},
              {"base_seed", cfg.mcwf->base_seed},
              {"samples", cfg.mcwf->samples},
              {"initial_width", cfg.mcwf->initial_width},
              {"propagator", cfg.mcwf->propagator}};
    if (cfg.mcwf->delta_p_recoil) m["delta_p_recoil"] = *cfg.mcwf->delta_p_recoil;
    doc["mcwf"] = m;
  }
  json formats = json::array();
  if (cfg.output.csv) formats.push_back("csv");
  if (cfg.output.manifest) formats.push_back("manifest");
  if (cfg.output.summary) formats.push_back("summary");
  doc["output"] = {{"directory", cfg.output.directory}, {"formats", formats}};
  doc["threads"] = cfg.threads;
  return doc;
}

json preset_fragment(std::string_view name) {
  auto drive = [](const DriveConfig& c) {
    json d;
    for (const auto& f : kDriveFields) d[f.key] = c.*f.member;
    return d;
  };
  auto species_json = [](const AtomSpecies& s, double amu) {
    return json{{"name", s.name()}, {"mass_amu", amu}, {"lambda_m", s.lambda_probe()},
                {"gamma", s.gamma()}};
  };
  if (name == "fig3_1") return json{{"drive", drive(presets::fig3_1())}};
  if (name == "fig3") return json{{"drive", drive(presets::fig3())}};
  if (name == "hg") return json{{"species", species_json(species::mercury(), 200.59)}};
  if (name == "rb87")
    return json{{"species", species_json(species::rubidium87(), 86.909)},
                {"drive", drive(presets::fig3())}};
  throw ConfigError("unknown preset '" + std::string(name) + "' (expected fig3_1, fig3, hg or rb87)");
}

}  // namespace darkcool
