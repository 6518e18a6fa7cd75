#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "filament/harness.hpp"
#include "filament/io.hpp"

using namespace filament;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("filament_test_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

}  // namespace

TEST_CASE("config parsing: keys, comments, duplicates, unknown keys with line numbers") {
  const std::string text =
      "# a comment\n"
      "kind = profile\n"
      "alpha = 0.5\n"
      "profile.x_max = 100   # trailing comment\n";
  const ExperimentConfig cfg = parse_config(text, "");
  CHECK(cfg.kind == "profile");
  CHECK(cfg.get_double("alpha", 0.0) == 0.5);
  CHECK(cfg.get_double("profile.x_max", 0.0) == 100.0);
  CHECK(cfg.get_double("profile.h", 7.0) == 7.0);  // fallback

  CHECK_THROWS_AS(parse_config("kind = profile\nalpa = 0.3\n", ""), config_error);
  try {
    parse_config("kind = profile\nalpa = 0.3\n", "");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("alpa") != std::string::npos);
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_config("kind = profile\nalpha = 1\nalpha = 2\n", ""), config_error);
  CHECK_THROWS_AS(parse_config("alpha = 1\n", ""), config_error);  // no kind
  CHECK_THROWS_AS(parse_config("kind = launch\n", ""), config_error);
  CHECK_THROWS_AS(parse_config("kind = profile\nalpha = abc\n", "").get_double("alpha", 0),
                  config_error);
  // CLI kind conflicts with the file kind
  CHECK_THROWS_AS(parse_config("kind = profile\n", "recover"), config_error);
}

TEST_CASE("config overrides and canonical hashing") {
  ExperimentConfig cfg = parse_config("kind = profile\nalpha = 0.5\n", "");
  const std::string h1 = cfg.content_hash();
  apply_override(cfg, "alpha=0.6");
  CHECK(cfg.get_double("alpha", 0.0) == 0.6);
  CHECK(cfg.content_hash() != h1);
  CHECK_THROWS_AS(apply_override(cfg, "bogus=1"), config_error);
  CHECK_THROWS_AS(apply_override(cfg, "kind=rates"), config_error);
  CHECK_THROWS_AS(apply_override(cfg, "noequals"), config_error);

  // canonical text is sorted and stable
  ExperimentConfig a = parse_config("kind = profile\nalpha = 0.5\ngamma = 0\n", "");
  ExperimentConfig b = parse_config("kind = profile\ngamma = 0\nalpha = 0.5\n", "");
  CHECK(a.canonical_text() == b.canonical_text());
  CHECK(a.content_hash() == b.content_hash());
}

TEST_CASE("curvature families") {
  ExperimentConfig cfg = parse_config(
      "kind = recover\ncurvature.family = gauss2\ncurvature.beta = 0.2\n", "");
  const CurvatureFamily fam = curvature_from_config(cfg);
  CHECK(fam(1.0) == doctest::Approx(0.2 * std::exp(-1.0)));
  CHECK(fam(0.0) == 0.0);

  ExperimentConfig bad = parse_config("kind = recover\ncurvature.family = weird\n", "");
  CHECK_THROWS_AS(curvature_from_config(bad), config_error);

  ExperimentConfig bump = parse_config(
      "kind = recover\ncurvature.family = bump\ncurvature.beta = 1\ncurvature.radius = 2\n", "");
  const CurvatureFamily bf = curvature_from_config(bump);
  CHECK(bf(2.0) == 0.0);
  CHECK(bf(2.5) == 0.0);
  CHECK(bf(1.0) > 0.0);
  // x^2 prefactor keeps x^-2 c bounded at 0
  CHECK(bf(1e-6) / (1e-6 * 1e-6) == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("csv and json emission") {
  TempDir tmp;
  const Grid1D g(0.0, 0.5, 3);
  Curve c(g, {{0, 0, 0}, {0.5, 0, 0}, {1, 0, 0}}, true);
  io::write_curve_csv(tmp.path / "c.csv", c);
  const std::string text = slurp(tmp.path / "c.csv");
  CHECK(text.substr(0, 14) == "x,px,py,pz\n0,0");
  CHECK(text.find("0.5,0.5,0,0\n") != std::string::npos);

  CHECK(io::format_double(0.1) == "0.10000000000000001");
  CHECK(io::format_double(1.0) == "1");
}

TEST_CASE("trajectory directory dump with manifest") {
  TempDir tmp;
  Trajectory traj;
  traj.grid = Grid1D::periodic(4.0, 4);
  traj.times = {1.0, 2.0};
  traj.slices = {{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}, {{2, 0}, {0, 0}, {0, 0}, {0, 0}}};
  io::write_trajectory(tmp.path / "traj", traj, GaugeSpec::critical(0.3), false);
  CHECK(fs::exists(tmp.path / "traj/manifest.json"));
  CHECK(fs::exists(tmp.path / "traj/slice_0000.csv"));
  CHECK(fs::exists(tmp.path / "traj/slice_0001.csv"));
  const auto manifest = nlohmann::json::parse(slurp(tmp.path / "traj/manifest.json"));
  CHECK(manifest["gauge"]["kind"] == "critical");
  CHECK(manifest["times"].size() == 2);

  io::write_trajectory(tmp.path / "bin", traj, GaugeSpec::zero_gauge(), true);
  CHECK(fs::file_size(tmp.path / "bin/slice_0000.bin") == 4 * 2 * sizeof(double));
}

TEST_CASE("profile run emits byte-identical artifacts on rerun") {
  TempDir tmp;
  ExperimentConfig cfg = parse_config("kind = profile\nalpha = 0.3\nprofile.x_max = 60\n"
                                      "profile.h = 1e-3\n",
                                      "");
  cfg.out_dir = (tmp.path / "a").string();
  const RunReport r1 = run(cfg);
  CHECK(!r1.any_failed());
  cfg.out_dir = (tmp.path / "b").string();
  const RunReport r2 = run(cfg);
  CHECK(slurp(tmp.path / "a/profile.json") == slurp(tmp.path / "b/profile.json"));
  CHECK(slurp(tmp.path / "a/profile_frame.csv") == slurp(tmp.path / "b/profile_frame.csv"));
  CHECK(slurp(tmp.path / "a/report.json") == slurp(tmp.path / "b/report.json"));
}

TEST_CASE("sweep: empty grid, lock file, aggregation") {
  TempDir tmp;
  ExperimentConfig base = parse_config("kind = profile\nalpha = 0.3\nprofile.x_max = 60\n"
                                       "profile.h = 1e-3\n",
                                       "");
  {
    const RunReport rep = sweep(base, {}, (tmp.path / "empty").string());
    CHECK(rep.checks.empty());
    const std::string csv = slurp(tmp.path / "empty/sweep.csv");
    CHECK(csv == "run,check,measured,cmp,target,status\n");
    CHECK(!fs::exists(tmp.path / "empty/.filament-lab.lock"));
  }
  {
    // a held lock rejects the sweep
    fs::create_directories(tmp.path / "locked");
    std::ofstream(tmp.path / "locked/.filament-lab.lock") << "held";
    CHECK_THROWS(sweep(base, {}, (tmp.path / "locked").string()));
  }
  {
    const RunReport rep =
        sweep(base, {{"alpha", {"0.2", "0.4"}}}, (tmp.path / "grid").string());
    CHECK(!rep.any_failed());
    const std::string csv = slurp(tmp.path / "grid/sweep.csv");
    CHECK(csv.find("run_000,0.2,") != std::string::npos);
    CHECK(csv.find("run_001,0.4,") != std::string::npos);
    CHECK(fs::exists(tmp.path / "grid/run_000/report.json"));
    CHECK(fs::exists(tmp.path / "grid/run_001/report.json"));
  }
}

TEST_CASE("angle sweep run produces the expected table shape") {
  TempDir tmp;
  ExperimentConfig cfg = parse_config(
      "kind = angle-sweep\nalphas = 0.3,0.5\nprofile.x_max = 60\nprofile.h = 1e-3\n"
      "tol.angle_rel = 0.02\n",
      "");
  cfg.out_dir = tmp.path.string();
  const RunReport rep = run(cfg);
  CHECK(!rep.any_failed());
  const std::string csv = slurp(tmp.path / "angle_sweep.csv");
  CHECK(csv.find("alpha,theta_formula,theta_measured,rel_err\n") == 0);
  CHECK(csv.find("\n0.29999999999999999,") != std::string::npos);
  CHECK(csv.find("\n0.5,") != std::string::npos);
}
