#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "filament/errors.hpp"

namespace filament {

// Flat key = value configuration with dotted key names. Unknown keys are
// rejected with the offending line number. Values keep their literal text;
// typed accessors parse on demand.
struct ExperimentConfig {
  std::string kind;  // profile | angle-sweep | nls-validate | recover | rates
  std::map<std::string, std::string> values;
  std::string out_dir = "out";
  unsigned long long seed = 12345;

  bool has(const std::string& key) const { return values.count(key) != 0; }
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

  // sorted key=value lines; the reproducibility unit that gets hashed
  std::string canonical_text() const;
  // FNV-1a 64-bit content hash of the canonical text, hex
  std::string content_hash() const;
};

// Parses config text; validates keys against the known-key table.
ExperimentConfig parse_config(const std::string& text, const std::string& kind_from_cli);

ExperimentConfig load_config_file(const std::string& path, const std::string& kind_from_cli);

// Applies "key=value" overrides (validated the same way).
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

// All recognized keys with one-line help.
const std::map<std::string, std::string>& known_config_keys();

// Named curvature families: zero, gauss2 (beta x^2 e^{-x^2}),
// bump (beta x^2 e^{-1/(1-(x/R)^2)} on |x|<R), badgauss (beta e^{-x^2}).
struct CurvatureFamily {
  std::string name = "zero";
  double beta = 0.1;
  double radius = 5.0;
  std::string csv_path;

  double operator()(double x) const;
};

CurvatureFamily curvature_from_config(const ExperimentConfig& cfg);

}  // namespace filament
