#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "filament/config.hpp"

namespace filament {

struct CheckResult {
  enum class Status { pass, warn, fail };

  std::string name;
  double measured = 0.0;
  double target = 0.0;
  std::string cmp = "<=";  // "<=", ">=", "in" (closed interval [target, target2])
  double target2 = 0.0;
  Status status = Status::pass;
  std::string note;
};

struct RunReport {
  ExperimentConfig config;
  std::string hash;
  std::vector<CheckResult> checks;
  std::vector<std::pair<std::string, double>> timings;  // name, seconds

  bool any_failed() const;
  bool any_warned() const;
};

// Runs one experiment, writes its artifacts under cfg.out_dir, returns the
// report. Deterministic for a fixed config; timings go to a separate .txt so
// data files stay byte-identical across reruns.
RunReport run(const ExperimentConfig& cfg);

// Runs the cross product of value lists for the given keys over the base
// config (sub-run k writes under <out_dir>/run_<k>); merges the check tables
// into <out_dir>/sweep.csv with deterministic row order. Sub-run failures are
// recorded and the sweep continues. A lock file rejects concurrent sweeps on
// the same directory.
RunReport sweep(const ExperimentConfig& base,
                const std::vector<std::pair<std::string, std::vector<std::string>>>& grid,
                const std::string& out_dir);

void print_report(std::ostream& os, const RunReport& rep);

}  // namespace filament
