// filament-lab: batch driver for the binormal-flow corner laboratory.
//
// Usage:
//   filament-lab <kind> --config <path> [--out <dir>] [--threads N]
//                [--override key=value ...]
//   filament-lab sweep --config <path> [--grid key=v1,v2 ...] [--out <dir>]
//
// Exit codes: 0 all checks passed, 1 a check failed, 2 config error,
// 3 runtime error.

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "filament/harness.hpp"
#include "filament/kernels.hpp"

namespace {

int thread_count_from_env() {
  const char* env = std::getenv("FILAMENT_LAB_THREADS");
  if (!env) return 0;
  try {
    return std::stoi(env);
  } catch (...) {
    return 0;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"filament-lab: binormal-flow corner formation laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int threads = 0;
  std::vector<std::string> overrides;
  std::vector<std::string> grid_specs;

  const std::vector<std::string> kinds{"profile", "angle-sweep", "nls-validate", "recover",
                                       "rates", "sweep"};
  std::vector<CLI::App*> subs;
  for (const auto& k : kinds) {
    auto* sub = app.add_subcommand(k);
    sub->add_option("--config", config_path, "config file (key = value lines)")->required();
    sub->add_option("--out", out_dir, "output directory (overrides out.dir)");
    sub->add_option("--threads", threads, "OpenMP thread count");
    sub->add_option("--override", overrides, "key=value config override (repeatable)");
    if (k == "sweep")
      sub->add_option("--grid", grid_specs, "key=v1,v2,... sweep axis (repeatable)");
    subs.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);
  const std::string kind = app.get_subcommands().front()->get_name();

  try {
    if (threads == 0) threads = thread_count_from_env();
    if (threads > 0) filament::kernels::set_threads(threads);

    filament::ExperimentConfig cfg =
        filament::load_config_file(config_path, kind == "sweep" ? "" : kind);
    for (const auto& ov : overrides) filament::apply_override(cfg, ov);
    if (!out_dir.empty()) {
      cfg.out_dir = out_dir;
      cfg.values["out.dir"] = out_dir;
    }

    filament::RunReport rep;
    if (kind == "sweep") {
      std::vector<std::pair<std::string, std::vector<std::string>>> grid;
      for (const auto& spec : grid_specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos)
          throw filament::config_error("--grid expects key=v1,v2,... got '" + spec + "'");
        const std::string key = spec.substr(0, eq);
        if (!filament::known_config_keys().count(key))
          throw filament::config_error("unknown sweep key '" + key + "'");
        std::vector<std::string> vals;
        std::istringstream ss(spec.substr(eq + 1));
        std::string cell;
        while (std::getline(ss, cell, ',')) vals.push_back(cell);
        if (vals.empty()) throw filament::config_error("empty value list for '" + key + "'");
        grid.emplace_back(key, vals);
      }
      rep = filament::sweep(cfg, grid, cfg.out_dir);
    } else {
      rep = filament::run(cfg);
    }
    filament::print_report(std::cout, rep);
    return rep.any_failed() ? 1 : 0;
  } catch (const filament::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
