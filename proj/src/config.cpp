#include "filament/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace filament {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const std::vector<std::string> kKinds{"profile", "angle-sweep", "nls-validate", "recover",
                                      "rates"};

}  // namespace

const std::map<std::string, std::string>& known_config_keys() {
  static const std::map<std::string, std::string> keys = {
      {"kind", "experiment kind: profile|angle-sweep|nls-validate|recover|rates"},
      {"alpha", "self-similar coupling"},
      {"alphas", "comma list of alphas (angle-sweep)"},
      {"gamma", "filament phase constant in [0, 2pi)"},
      {"seed", "seed for randomized controls"},
      {"out.dir", "output directory"},
      {"curvature.family", "zero|gauss2|bump|badgauss|csv"},
      {"curvature.beta", "family amplitude"},
      {"curvature.radius", "bump support radius"},
      {"curvature.csv", "CSV path with columns x,c[,tau]"},
      {"torsion.family", "zero|csv"},
      {"fd.x_max", "filament-data grid half extent"},
      {"fd.h", "filament-data grid step"},
      {"grid.L", "wave grid periodic extent"},
      {"grid.n", "wave grid size (power of two)"},
      {"profile.x_max", "profile integration half extent"},
      {"profile.h", "profile integration step"},
      {"time.t0", "seeding time t0"},
      {"time.t_min", "smallest time"},
      {"time.per_decade", "ladder points per decade"},
      {"run.x_window", "slice half window in x"},
      {"run.slice_h", "slice grid step"},
      {"run.ds_max", "max s step for the u evolution"},
      {"run.kappa", "geometric s-step factor (ds <= kappa s)"},
      {"run.dt_factor", "time-march step control (dt <= factor * t)"},
      {"run.substep_phase", "max phase per x-substep"},
      {"run.corner_x_eval", "|x| representing the corner 0+- limits"},
      {"fit.chi_lo", "chi-rate fit window lower end"},
      {"fit.chi_hi", "chi-rate fit window upper end"},
      {"fit.rate_lo", "tangent/normal rate fit window lower end"},
      {"fit.rate_hi", "tangent/normal rate fit window upper end"},
      {"fit.rem_lo", "remainder fit window lower end (psi time)"},
      {"fit.rem_hi", "remainder fit window upper end (psi time)"},
      {"nls.n", "validation grid size"},
      {"nls.L", "validation grid extent"},
      {"nls.dt", "validation time step"},
      {"rates.which", "remainder|modulation|both"},
      {"tol.angle_rel", "angle-law relative tolerance"},
      {"tol.corner_dot", "corner dot-product tolerance"},
      {"tol.trace_defect", "trace ODE defect tolerance"},
      {"tol.corner_deg", "corner direction tolerance (degrees)"},
      {"traj.dump", "0|1 dump the u trajectory"},
      {"traj.binary", "0|1 binary slice dump"},
  };
  return keys;
}

double ExperimentConfig::get_double(const std::string& key, double fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw config_error("config key '" + key + "': cannot parse number '" + it->second + "'");
  }
}

long long ExperimentConfig::get_int(const std::string& key, long long fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw config_error("config key '" + key + "': cannot parse integer '" + it->second + "'");
  }
}

std::string ExperimentConfig::get_string(const std::string& key,
                                         const std::string& fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

std::vector<double> ExperimentConfig::get_list(const std::string& key,
                                               const std::vector<double>& fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  std::vector<double> out;
  std::istringstream ss(it->second);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    if (cell.empty()) continue;
    try {
      out.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw config_error("config key '" + key + "': cannot parse list entry '" + cell + "'");
    }
  }
  if (out.empty()) throw config_error("config key '" + key + "': empty list");
  return out;
}

std::string ExperimentConfig::canonical_text() const {
  std::ostringstream out;
  out << "kind=" << kind << "\n";
  for (const auto& [k, v] : values) out << k << "=" << v << "\n";
  return out.str();
}

std::string ExperimentConfig::content_hash() const {
  const std::string text = canonical_text();
  unsigned long long h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", h);
  return buf;
}

ExperimentConfig parse_config(const std::string& text, const std::string& kind_from_cli) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("expected key = value, got '" + line + "'", lineno);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!known_config_keys().count(key))
      throw config_error("unknown config key '" + key + "'", lineno);
    if (cfg.values.count(key)) throw config_error("duplicate config key '" + key + "'", lineno);
    cfg.values[key] = value;
  }

  const std::string kind_in_file = cfg.get_string("kind", "");
  if (!kind_from_cli.empty() && !kind_in_file.empty() && kind_from_cli != kind_in_file)
    throw config_error("config kind '" + kind_in_file + "' conflicts with CLI kind '" +
                       kind_from_cli + "'");
  cfg.kind = !kind_from_cli.empty() ? kind_from_cli : kind_in_file;
  if (cfg.kind.empty()) throw config_error("no experiment kind given");
  if (std::find(kKinds.begin(), kKinds.end(), cfg.kind) == kKinds.end())
    throw config_error("unknown experiment kind '" + cfg.kind + "'");
  cfg.values["kind"] = cfg.kind;

  cfg.out_dir = cfg.get_string("out.dir", "out");
  cfg.seed = static_cast<unsigned long long>(cfg.get_int("seed", 12345));
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path, const std::string& kind_from_cli) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), kind_from_cli);
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw config_error("override must be key=value, got '" + assignment + "'");
  const std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  if (!known_config_keys().count(key)) throw config_error("unknown override key '" + key + "'");
  if (key == "kind") throw config_error("the experiment kind cannot be overridden");
  cfg.values[key] = value;
  if (key == "out.dir") cfg.out_dir = value;
  if (key == "seed") cfg.seed = static_cast<unsigned long long>(cfg.get_int("seed", 12345));
}

double CurvatureFamily::operator()(double x) const {
  if (name == "zero") return 0.0;
  if (name == "gauss2") return beta * x * x * std::exp(-x * x);
  if (name == "badgauss") return beta * std::exp(-x * x);
  if (name == "bump") {
    const double u = x / radius;
    if (std::abs(u) >= 1.0) return 0.0;
    return beta * x * x * std::exp(-1.0 / (1.0 - u * u));
  }
  throw config_error("curvature family '" + name + "' is not evaluable");
}

CurvatureFamily curvature_from_config(const ExperimentConfig& cfg) {
  CurvatureFamily fam;
  fam.name = cfg.get_string("curvature.family", "zero");
  fam.beta = cfg.get_double("curvature.beta", 0.1);
  fam.radius = cfg.get_double("curvature.radius", 5.0);
  fam.csv_path = cfg.get_string("curvature.csv", "");
  const std::vector<std::string> known{"zero", "gauss2", "bump", "badgauss", "csv"};
  if (std::find(known.begin(), known.end(), fam.name) == known.end())
    throw config_error("unknown curvature family '" + fam.name + "'");
  if (fam.name == "csv" && fam.csv_path.empty())
    throw config_error("curvature.family=csv requires curvature.csv");
  return fam;
}

}  // namespace filament
