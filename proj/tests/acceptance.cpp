// Acceptance suite: one line per criterion, exit 0 iff all pass.
//
// Every tolerance is pinned here. The runs reuse the same library paths the
// CLI exercises; artifacts go under a scratch directory.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include "filament/harness.hpp"
#include "filament/io.hpp"
#include "filament/kernels.hpp"
#include "filament/reconstruction.hpp"

using namespace filament;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;
using Clock = std::chrono::steady_clock;

void line(const std::string& name, bool pass, double measured, const std::string& target) {
  if (!pass) ++g_failures;
  std::printf("[%s] %-38s measured %-24s target %s\n", pass ? "PASS" : "FAIL", name.c_str(),
              io::format_double(measured).c_str(), target.c_str());
  std::fflush(stdout);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double elapsed(const Clock::time_point& t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

int main() {
  const fs::path scratch = fs::temp_directory_path() / "filament_acceptance";
  fs::remove_all(scratch);
  fs::create_directories(scratch);

  // ---- 1 & 2: angle law ladder and the corner dot identity -----------------
  {
    const auto t0 = Clock::now();
    double worst_rel = 0.0, worst_defect = 0.0;
    bool monotone = true;
    double prev_theta = 4.0;
    double dot_err_05 = 1.0;
    for (double alpha : {0.2, 0.4, 0.5, 0.6, 0.8}) {
      const SelfSimilarProfile p = integrate_profile(alpha, 200.0, 5e-4);
      const double formula = angle_from_alpha(alpha);
      worst_rel = std::max(worst_rel, std::abs(p.corner.theta - formula) / formula);
      worst_defect = std::max(worst_defect, frame_orthonormality_defect(p.profile_frame));
      if (alpha != 0.5) {  // the ladder of criterion 1
        if (p.corner.theta >= prev_theta) monotone = false;
        prev_theta = p.corner.theta;
      } else {
        const double expected = 2.0 * std::exp(-std::numbers::pi * alpha * alpha) - 1.0;
        dot_err_05 = std::abs(dot(p.corner.A_plus, p.corner.A_minus) - expected);
      }
    }
    const double secs = elapsed(t0);
    line("1  angle law rel err (a=0.2..0.8)", worst_rel <= 5e-3, worst_rel, "<= 0.005");
    line("1  angle ladder runtime [s]", secs <= 60.0, secs, "<= 60");
    line("1  theta strictly decreasing", monotone, monotone ? 1.0 : 0.0, "monotone");
    line("2  A+.A- vs 2e^{ -pi a^2 }-1 (a=0.5)", dot_err_05 <= 5e-3, dot_err_05, "<= 0.005");
    line("10 profile frame defect", worst_defect <= 1e-10, worst_defect, "<= 1e-10");
  }

  // ---- 3, 4, 8, 9 (perturbed): flagship recover ---------------------------
  {
    const auto t0 = Clock::now();
    RecoverConfig cfg;
    cfg.alpha = 0.3;
    cfg.curvature = [](double x) { return 0.1 * x * x * std::exp(-x * x); };
    cfg.torsion = [](double) { return 0.0; };
    const RecoverReport rep = recover_initial_curve(cfg);
    const double secs = elapsed(t0);

    line("3  chi rate exponent (gauss2 a=0.3)",
         rep.chi_rate.exponent >= 0.4 && rep.chi_rate.exponent <= 0.6, rep.chi_rate.exponent,
         "in [0.4, 0.6]");
    line("3  recover runtime [s]", secs <= 900.0, secs, "<= 900");
    double worst_tangent = 1e9;
    for (const auto& f : rep.tangent_rates) worst_tangent = std::min(worst_tangent, f.exponent);
    line("4  tangent rate at x in {0.5,1,2}", worst_tangent >= 0.2, worst_tangent, ">= 0.2");
    line("8  trace ODE defect (|x| in [0.2,2])", rep.trace.defect <= 5e-2, rep.trace.defect,
         "<= 0.05");
    const double delta_rel =
        std::abs(rep.trace.delta - rep.trace.expected_delta) / rep.trace.expected_delta;
    line("8  trace phase delta vs a^2 log 2", delta_rel <= 0.10, delta_rel, "rel err <= 0.10");
    const double corner_deg = std::max(rep.corners.angle_plus_deg, rep.corners.angle_minus_deg);
    line("9  corner directions, perturbed [deg]", corner_deg <= 2.0, corner_deg, "<= 2");
    const double angle_rel = std::abs(rep.corners.corner_angle_measured -
                                      rep.corners.corner_angle_formula) /
                             rep.corners.corner_angle_formula;
    line("9  corner angle vs law", angle_rel <= 0.01, angle_rel, "rel err <= 0.01");
    line("10 frame defect (t-evolution + slices)", rep.frame_defect <= 1e-9, rep.frame_defect,
         "<= 1e-9");
    line("10 curvature bound sqrt(t)|psi|",
         rep.curvature_bound <= rep.curvature_bound_rhs + 1e-12,
         rep.curvature_bound - rep.curvature_bound_rhs, "<= alpha + 2 sup|u|");
  }

  // ---- 9 (pure): self-similar recover --------------------------------------
  {
    RecoverConfig cfg;
    cfg.alpha = 0.4;
    cfg.curvature = [](double) { return 0.0; };
    cfg.torsion = [](double) { return 0.0; };
    cfg.fd_x_max = 10.0;
    cfg.fd_h = 5e-3;
    cfg.u_extent = 200.0;
    cfg.u_n = 1u << 11;
    cfg.x_window = 2.0;
    cfg.slice_opt = SliceOptions{0.02, 0.03};
    cfg.rate_fit_hi = 2e-2;
    cfg.tangent_probes = {0.5, 1.0, 1.8};
    cfg.corner_x_eval = 0.75;
    const RecoverReport rep = recover_initial_curve(cfg);
    const double corner_deg = std::max(rep.corners.angle_plus_deg, rep.corners.angle_minus_deg);
    line("9  corner directions, pure [deg]", corner_deg <= 0.1, corner_deg, "<= 0.1");
  }

  // ---- 5 & 6: remainder decay and the cancellation -------------------------
  {
    ExperimentConfig cfg = parse_config(
        "kind = rates\nrates.which = remainder\nalpha = 0.25\ncurvature.family = gauss2\n"
        "curvature.beta = 0.1\nfd.x_max = 20\nfd.h = 2e-3\ngrid.L = 10000\ngrid.n = 32768\n"
        "time.t0 = 0.5\ntime.t_min = 1e-3\ntime.per_decade = 16\nrun.x_window = 2.0\n",
        "");
    cfg.out_dir = (scratch / "rates_rem").string();
    const RunReport rep = run(cfg);
    auto get = [&](const std::string& name) -> const CheckResult* {
      for (const auto& c : rep.checks)
        if (c.name == name) return &c;
      return nullptr;
    };
    line("5  ||r||_L2 decay slope", get("r_l2_slope")->measured >= 0.4,
         get("r_l2_slope")->measured, ">= 0.4 (target 0.5)");
    line("5  ||grad r||_L2 decay slope",
         std::min(get("r_h1_slope")->measured, get("r_h2_slope")->measured) >= 0.8,
         std::min(get("r_h1_slope")->measured, get("r_h2_slope")->measured),
         ">= 0.8 (target 1)");
    line("6  cancellation gap over |d_x u|", get("cancellation_gap")->measured >= 0.3,
         get("cancellation_gap")->measured, ">= 0.3");
    line("5  sup|u(1/t,x/t)| exponent", get("pointwise_u_slope")->measured >= 0.4,
         get("pointwise_u_slope")->measured, ">= 0.4 (target 0.5)");
  }

  // ---- 7: modulation necessity ---------------------------------------------
  {
    ExperimentConfig cfg = parse_config(
        "kind = rates\nrates.which = modulation\nalpha = 0.4\ntime.t0 = 0.5\n"
        "time.t_min = 1e-4\ntime.per_decade = 12\nrun.x_window = 2.5\nrun.slice_h = 5e-3\n"
        "run.substep_phase = 0.03\nprofile.x_max = 200\nprofile.h = 5e-4\n"
        "fit.rate_lo = 8e-4\nfit.rate_hi = 2e-2\n",
        "");
    cfg.out_dir = (scratch / "rates_mod").string();
    const RunReport rep = run(cfg);
    double gap = -1.0, theta_dist = 1.0;
    for (const auto& c : rep.checks) {
      if (c.name == "modulation_gap") gap = c.measured;
      if (c.name == "theta_identity_dist") theta_dist = c.measured;
    }
    line("7  modulation necessity gap (a=0.4)", gap >= 0.15, gap, ">= 0.15");
    line("10 Theta = identity on psi_alpha", theta_dist <= 1e-6, theta_dist, "<= 1e-6");
  }

  // ---- 10: solver property battery -----------------------------------------
  {
    ExperimentConfig cfg = parse_config(
        "kind = nls-validate\nnls.n = 8192\nnls.L = 80\nnls.dt = 1e-3\nseed = 12345\n", "");
    cfg.out_dir = (scratch / "nls").string();
    const RunReport rep = run(cfg);
    for (const auto& c : rep.checks) {
      const bool pass = c.status != CheckResult::Status::fail;
      line("10 " + c.name, pass, c.measured,
           (c.cmp == ">=" ? ">= " : "<= ") + io::format_double(c.target));
    }
  }

  // ---- 10: Hasimoto round trip at O(h^2) ------------------------------------
  {
    auto g_fun = [](double x) {
      return std::polar(1.0 + 0.4 * std::sin(x), 0.5 * x + 0.2 * std::sin(x));
    };
    auto roundtrip_err = [&](double h) {
      const std::size_t n = static_cast<std::size_t>(std::llround(6.0 / h)) + 1;
      const Grid1D grid(0.0, h, n);
      const FrameField ref_frame =
          integrate_parallel_frame_x(grid, g_fun, FrameVec{}, FrameVec{}, 16);
      const Curve ref = curve_from_tangent(grid, ref_frame.T, {0, 0, 0}, 0);
      const FrenetData fd = frenet_data(ref);
      const FilamentFunction ff = filament_function(fd);
      const FrameVec seed = curve_frame_at(ref, 0);
      const FrameField back = integrate_parallel_frame_x(ff, seed, seed);
      const Curve rec = curve_from_tangent(grid, back.T, ref.points[0], 0);
      const RigidFit fit = fit_rigid_motion(rec.points, ref.points);
      double worst = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        worst = std::max(worst, norm(ref.points[j] - (fit.R.apply(rec.points[j]) + fit.t)));
      return worst;
    };
    const double e1 = roundtrip_err(0.02), e2 = roundtrip_err(0.01);
    line("10 Hasimoto round trip error (h=0.01)", e2 <= 1e-3, e2, "<= C h^2");
    line("10 Hasimoto round trip order", e1 / e2 >= 3.0, std::log2(e1 / e2), "order ~ 2");
  }

  // ---- 10: byte-identical reruns --------------------------------------------
  {
    ExperimentConfig cfg = parse_config(
        "kind = profile\nalpha = 0.3\nprofile.x_max = 60\nprofile.h = 1e-3\n", "");
    cfg.out_dir = (scratch / "rerun_a").string();
    run(cfg);
    cfg.out_dir = (scratch / "rerun_b").string();
    run(cfg);
    const bool same =
        slurp(scratch / "rerun_a/report.json") == slurp(scratch / "rerun_b/report.json") &&
        slurp(scratch / "rerun_a/profile.json") == slurp(scratch / "rerun_b/profile.json") &&
        slurp(scratch / "rerun_a/profile_frame.csv") ==
            slurp(scratch / "rerun_b/profile_frame.csv");
    line("10 byte-identical reruns", same, same ? 1.0 : 0.0, "identical bytes");
  }

  std::printf("\nacceptance: %s (%d failures)\n", g_failures == 0 ? "ALL PASS" : "FAILED",
              g_failures);
  return g_failures == 0 ? 0 : 1;
}
