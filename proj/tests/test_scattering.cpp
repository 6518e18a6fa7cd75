#include "doctest.h"

#include <algorithm>
#include <random>

#include "filament/kernels.hpp"
#include "filament/scattering.hpp"
#include "filament/selfsimilar.hpp"
#include "oracles.hpp"

using namespace filament;

namespace {

FrenetData make_fd(const Grid1D& g, const std::function<double(double)>& c,
                   const std::function<double(double)>& tau, double gamma = 0.0) {
  FrenetData fd;
  fd.grid = g;
  fd.gamma = gamma;
  fd.c.resize(g.n);
  fd.tau.resize(g.n);
  for (std::size_t j = 0; j < g.n; ++j) {
    fd.c[j] = c(g.node(j));
    fd.tau[j] = tau(g.node(j));
  }
  return fd;
}

double quad_trapezoid(const std::function<double(double)>& f, double a, double b, int n) {
  double s = 0.5 * (f(a) + f(b));
  const double h = (b - a) / n;
  for (int i = 1; i < n; ++i) s += f(a + i * h);
  return s * h;
}

}  // namespace

TEST_CASE("hypothesis_norms: zero data, smooth data, cross-checked quadrature") {
  const Grid1D g = Grid1D::symmetric(16.0, 4e-3);
  {
    const auto rep = hypothesis_norms(make_fd(g, [](double) { return 0.0; },
                                              [](double) { return 0.0; }));
    for (const auto& e : rep.entries) {
      CHECK(e.value == 0.0);
      CHECK(!e.suspect);
    }
  }
  {
    // c = x^2 e^{-x^2}: all hypothesis norms finite, none suspect
    auto c = [](double x) { return x * x * std::exp(-x * x); };
    const auto rep = hypothesis_norms(make_fd(g, c, [](double) { return 0.0; }));
    CHECK(!rep.any_suspect());
    CHECK(rep.node_at_zero_excluded);

    // independent quadrature for two entries
    const double w2c = std::sqrt(quad_trapezoid(
        [&](double x) { const double v = (1 + x * x) * c(x); return v * v; }, -16.0, 16.0,
        400000));
    CHECK(rep.find("w2c_L2")->value == doctest::Approx(w2c).epsilon(1e-6));
    const double invx2 = std::sqrt(quad_trapezoid(
        [&](double x) { const double v = std::exp(-x * x); return v * v; }, -16.0, 16.0,
        400000));
    CHECK(rep.find("invx2c_L2")->value == doctest::Approx(invx2).epsilon(1e-2));
  }
}

TEST_CASE("hypothesis_norms flags the x^-2 divergence of e^{-x^2}") {
  const Grid1D g = Grid1D::symmetric(16.0, 4e-3);
  const auto rep = hypothesis_norms(make_fd(g, [](double x) { return std::exp(-x * x); },
                                            [](double) { return 0.0; }));
  CHECK(rep.find("invx2c_L2")->suspect);  // x^-2 e^{-x^2} not in L^2 near 0
  CHECK(!rep.find("c_W31")->suspect);
  CHECK(!rep.find("c_H2")->suspect);
}

TEST_CASE("build_uplus: zero curvature, linearity, spectral round-trip lock") {
  const Grid1D fdg = Grid1D::symmetric(16.0, 4e-3);
  const Grid1D ug = Grid1D::periodic(256.0, 4096);
  {
    const auto sd = build_uplus(make_fd(fdg, [](double) { return 0.0; },
                                        [](double) { return 0.0; }),
                                0.3, ug);
    CHECK(kernels::max_abs(sd.u_plus) == 0.0);
  }
  auto c = [](double x) { return 0.2 * x * x * std::exp(-x * x); };
  const FrenetData fd = make_fd(fdg, c, [](double) { return 0.0; });
  const double alpha = 0.3;
  const auto sd = build_uplus(fd, alpha, ug);

  SUBCASE("linearity in g") {
    auto c2 = [&](double x) { return 3.0 * c(x); };
    const auto sd3 = build_uplus(make_fd(fdg, c2, [](double) { return 0.0; }), alpha, ug);
    const double scale = 3.0 * kernels::max_abs(sd.u_plus);
    double worst = 0.0;
    for (std::size_t j = 0; j < ug.n; ++j)
      worst = std::max(worst, std::abs(sd3.u_plus[j] - 3.0 * sd.u_plus[j]) / scale);
    CHECK(worst <= 1e-13);
  }

  SUBCASE("fourier_forward(u_+) returns sqrt(i) g(2 xi) e^{i a^2 log|xi|} on the grid") {
    const SpectralField hat = fourier_forward(sd.field());
    const complexd sqrt_i = std::polar(1.0, 0.25 * std::numbers::pi);
    double worst = 0.0;
    for (std::size_t k = 0; k < ug.n; ++k) {
      const double xi = hat.xi(k);
      if (xi == 0.0) {
        worst = std::max(worst, std::abs(hat.coeffs[k]));
        continue;
      }
      if (std::abs(2.0 * xi) > 15.9) continue;  // outside the g support window
      const complexd expect =
          sqrt_i * std::polar(1.0, alpha * alpha * std::log(std::abs(xi))) * c(2.0 * xi);
      worst = std::max(worst, std::abs(hat.coeffs[k] - expect));
    }
    CHECK(worst < 1e-10);
  }

  SUBCASE("alpha = 0 matches direct inverse-Fourier quadrature") {
    const auto sd0 = build_uplus(fd, 0.0, ug);
    for (double probe : {0.0, 0.7, -2.3}) {
      const std::size_t j = ug.nearest(probe);
      const double x = ug.node(j);
      const complexd sqrt_i = std::polar(1.0, 0.25 * std::numbers::pi);
      const complexd direct = oracles::inverse_fourier_quadrature(
          [&](double xi) { return sqrt_i * complexd{c(2.0 * xi), 0.0}; }, x, 8.0, 200000);
      CHECK(std::abs(sd0.u_plus[j] - direct) < 1e-8);
    }
  }
}

TEST_CASE("weighted_sup_bounds") {
  const Grid1D ug = Grid1D::periodic(64.0, 1024);
  {
    ScatteringDatum sd{ug, std::vector<complexd>(ug.n, complexd{}), 0.3, ""};
    const auto [a, b] = weighted_sup_bounds(sd);
    CHECK(a == 0.0);
    CHECK(b == 0.0);
  }
  {
    ScatteringDatum sd{ug, std::vector<complexd>(ug.n), 0.3, ""};
    for (std::size_t j = 0; j < ug.n; ++j) {
      const double x = ug.node(j);
      sd.u_plus[j] = 1.0 / (1.0 + x * x);
    }
    const auto [a, b] = weighted_sup_bounds(sd);
    CHECK(a == doctest::Approx(1.0));
  }
}

TEST_CASE("assemble_psi / extract_u are exact inverses; u = 0 recovers psi_alpha") {
  const Grid1D ug = Grid1D::periodic(64.0, 512);
  const double alpha = 0.35, t = 0.4;
  {
    const WaveField zero = WaveField::zero(ug, 1.0 / t);
    const WaveField psi = assemble_psi(alpha, zero, t);
    double worst = 0.0;
    for (std::size_t j = 0; j < psi.grid.n; ++j)
      worst = std::max(worst, std::abs(psi.values[j] - psi_alpha(alpha, t, psi.grid.node(j))));
    CHECK(worst < 1e-14);
  }
  {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> dist;
    std::vector<complexd> v(ug.n);
    for (auto& c : v) c = complexd(dist(rng), dist(rng));
    const WaveField u(ug, v, 1.0 / t);
    const WaveField psi = assemble_psi(alpha, u, t);
    const WaveField back = extract_u(psi, alpha, t);
    double worst = 0.0;
    for (std::size_t j = 0; j < ug.n; ++j) {
      worst = std::max(worst, std::abs(back.values[j] - u.values[j]));
      // modulus relation |psi| sqrt(t) = |alpha + conj(u)|
      CHECK(std::abs(std::abs(psi.values[j]) * std::sqrt(t) -
                     std::abs(alpha + std::conj(u.values[j]))) < 1e-12);
    }
    CHECK(worst <= 1e-12);
  }
  CHECK_THROWS_AS(assemble_psi(0.3, WaveField::zero(ug), 0.0), domain_error);
}

namespace {

struct MiniRun {
  ScatteringDatum sd;
  Trajectory traj;
};

// backward wave-operator realization on a small grid, t in [t_min, 0.5]
MiniRun mini_backward_run(double alpha, double t_min) {
  const Grid1D fdg = Grid1D::symmetric(16.0, 4e-3);
  FrenetData fd;
  fd.grid = fdg;
  fd.gamma = 0.0;
  fd.c.resize(fdg.n);
  fd.tau.assign(fdg.n, 0.0);
  for (std::size_t j = 0; j < fdg.n; ++j) {
    const double x = fdg.node(j);
    fd.c[j] = 0.1 * x * x * std::exp(-x * x);
  }
  const Grid1D ug = Grid1D::periodic(5000.0, 16384);
  MiniRun run{build_uplus(fd, alpha, ug), {}};
  std::vector<double> s;
  for (int k = 0;; ++k) {
    const double t = 0.5 * std::pow(10.0, -k / 12.0);
    if (t <= t_min * (1 + 1e-9)) break;
    s.push_back(1.0 / t);
  }
  s.push_back(1.0 / t_min);
  std::sort(s.begin(), s.end(), std::greater<double>());
  WaveField uf = free_propagate(run.sd.field(), s.front());
  uf.time = s.front();
  run.traj = split_step_u(uf, alpha, s.front(), s.back(), 1e9, s, 0.002);
  return run;
}

}  // namespace

TEST_CASE("remainder diagnostics on the wave-operator realization") {
  const double alpha = 0.25;
  const MiniRun run = mini_backward_run(alpha, 4e-3);
  const auto rem = remainder_diagnostics(run.traj, run.sd);

  // r vanishes at the imposition end and decays toward it
  CHECK(rem.r_l2.front() < 1e-12);
  CHECK(rem.fit("r_l2")->exponent >= 0.4);
  CHECK(rem.fit("r_h1")->exponent >= 0.8);
  CHECK(rem.fit("r_h2")->exponent >= 0.8);

  // the long-range winding rate is alpha^2/2
  CHECK(std::abs(rem.winding_rate - 0.5 * alpha * alpha) < 0.15 * 0.5 * alpha * alpha);

  // gauged columns decay at least as fast as the plain ones
  CHECK(rem.fit("r_l2_gauged")->exponent >= rem.fit("r_l2")->exponent - 0.2);
}

TEST_CASE("pointwise bounds and the cancellation gap") {
  const double alpha = 0.25;
  const MiniRun run = mini_backward_run(alpha, 4e-3);
  const auto pw = pointwise_bounds_check(run.traj, run.sd, 2.0);
  CHECK(pw.fit("pointwise_u")->exponent >= 0.4);
  // |(ix/2t) u - [u]_x| decays while |[u]_x| alone blows up like t^{-1/2}
  CHECK(pw.fit("cancel")->exponent - pw.fit("pointwise_du")->exponent >= 0.3);
}

TEST_CASE("forward tiny-data control: r(s0) = 0 and stays small at alpha = 0") {
  const Grid1D ug = Grid1D::periodic(400.0, 2048);
  ScatteringDatum sd{ug, std::vector<complexd>(ug.n), 0.0, ""};
  for (std::size_t j = 0; j < ug.n; ++j) {
    const double x = ug.node(j);
    sd.u_plus[j] = 1e-5 * std::exp(-x * x / 2.0);
  }
  std::vector<double> s{2.0, 4.0, 8.0, 16.0, 32.0};
  WaveField u0 = free_propagate(sd.field(), s.front());
  u0.time = s.front();
  const Trajectory traj = split_step_u(u0, 0.0, s.front(), s.back(), 1e9, s, 0.002);
  const auto rem = remainder_diagnostics(traj, sd);
  CHECK(rem.r_l2.back() < 1e-13);   // the seeding time (largest t)
  CHECK(rem.r_l2.front() < 1e-11);  // later times stay near the free flow
}

TEST_CASE("negative control: doubled asymptotic state shows no decay") {
  const double alpha = 0.25;
  const MiniRun run = mini_backward_run(alpha, 1e-2);
  ScatteringDatum wrong = run.sd;
  for (auto& v : wrong.u_plus) v *= 2.0;
  const auto rem = remainder_diagnostics(run.traj, wrong);
  const double uplus_l2 = std::sqrt(conserved_mass(run.sd.field()));
  // plateau at O(||u_+||), slope near zero
  CHECK(rem.r_l2.back() > 0.5 * uplus_l2);
  CHECK(std::abs(rem.fit("r_l2")->exponent) < 0.1);
}

TEST_CASE("remainder diagnostics rejects short spans") {
  const Grid1D ug = Grid1D::periodic(64.0, 256);
  ScatteringDatum sd{ug, std::vector<complexd>(ug.n), 0.0, ""};
  Trajectory traj;
  traj.grid = ug;
  traj.times = {2.0, 3.0, 4.0, 5.0, 6.0};
  for (int i = 0; i < 5; ++i) traj.slices.push_back(std::vector<complexd>(ug.n));
  CHECK_THROWS_AS(remainder_diagnostics(traj, sd), fit_error);
}
