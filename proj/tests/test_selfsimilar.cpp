#include "doctest.h"

#include <cmath>

#include "filament/ratefit.hpp"
#include "filament/selfsimilar.hpp"
#include "oracles.hpp"

using namespace filament;

TEST_CASE("angle law and its inverse") {
  CHECK(angle_from_alpha(0.0) == doctest::Approx(std::numbers::pi));
  // alpha = 0.5: theta = 2 asin(exp(-pi/8))
  CHECK(angle_from_alpha(0.5) ==
        doctest::Approx(2.0 * std::asin(std::exp(-std::numbers::pi / 8.0))));
  CHECK(alpha_from_angle(angle_from_alpha(0.3)) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK_THROWS_AS(alpha_from_angle(0.0), domain_error);
  CHECK_THROWS_AS(alpha_from_angle(3.5), domain_error);
}

TEST_CASE("psi_alpha closed form") {
  CHECK(std::abs(psi_alpha(0.7, 1.0, 0.0) - complexd{0.7, 0.0}) < 1e-15);
  for (double x : {-3.0, 0.4, 11.0})
    CHECK(std::abs(psi_alpha(0.3, 0.25, x)) == doctest::Approx(0.3 / 0.5));
  CHECK_THROWS_AS(psi_alpha(0.3, 0.0, 1.0), domain_error);
}

TEST_CASE("oscillatory tail fit recovers the constant") {
  const Grid1D g(0.0, 0.01, 20001);  // [0, 200]
  std::vector<double> y(g.n, 0.0);
  for (std::size_t j = 0; j < g.n; ++j) {
    const double x = g.node(j);
    if (x < 50.0) continue;
    y[j] = 1.25 + (0.4 * std::cos(0.25 * x * x) - 0.7 * std::sin(0.25 * x * x)) / x;
  }
  const TailFit fit = fit_oscillatory_tail(g, y, 100.0, 200.0, +1);
  CHECK(fit.A == doctest::Approx(1.25).epsilon(1e-10));
  CHECK(fit.c_cos == doctest::Approx(0.4).epsilon(1e-6));
  CHECK(fit.c_sin == doctest::Approx(-0.7).epsilon(1e-6));
}

TEST_CASE("small-alpha profile stays near the axis; theta -> pi as 2 alpha sqrt(pi)") {
  const SelfSimilarProfile p = integrate_profile(0.05, 60.0, 1e-3);
  for (std::size_t j = 0; j < p.profile_frame.grid.n; ++j)
    CHECK(norm(p.profile_frame.T[j] - Vec3{1, 0, 0}) < 3.0 * 0.05);
  // the corner closes like pi - theta = 2 alpha sqrt(pi) + O(alpha^3)
  CHECK(std::abs(p.corner.theta - angle_from_alpha(0.05)) < 1e-6);
  CHECK(std::abs((std::numbers::pi - p.corner.theta) - 2.0 * 0.05 * std::sqrt(std::numbers::pi)) <
        1e-3);
}

TEST_CASE("alpha = 0.01: measured angle matches the law to 1e-6") {
  const SelfSimilarProfile p = integrate_profile(0.01, 60.0, 1e-3);
  CHECK(std::abs(p.corner.theta - angle_from_alpha(0.01)) < 1e-6);
}

TEST_CASE("profile at alpha = 0.5: corner data against the angle law") {
  const SelfSimilarProfile p = integrate_profile(0.5, 200.0, 5e-4);

  CHECK(frame_orthonormality_defect(p.profile_frame) <= 1e-10);

  // A+ . A- = 2 e^{-pi alpha^2} - 1, from the angle law and the theta convention
  const double expected = 2.0 * std::exp(-std::numbers::pi * 0.25) - 1.0;
  CHECK(std::abs(dot(p.corner.A_plus, p.corner.A_minus) - expected) < 5e-3);

  // measured angle vs formula
  CHECK(std::abs(p.corner.theta - angle_from_alpha(0.5)) / angle_from_alpha(0.5) < 5e-3);

  // |A| = 1, B orthogonal to A in both parts
  CHECK(std::abs(norm(p.corner.A_plus) - 1.0) < 1e-8);
  CHECK(std::abs(norm(p.corner.A_minus) - 1.0) < 1e-8);
  CHECK(std::abs(dot(p.corner.B_plus.real(), p.corner.A_plus)) < 1e-6);
  CHECK(std::abs(dot(p.corner.B_plus.imag(), p.corner.A_plus)) < 1e-6);
  CHECK(std::abs(dot(p.corner.B_minus.real(), p.corner.A_minus)) < 1e-6);
  CHECK(std::abs(dot(p.corner.B_minus.imag(), p.corner.A_minus)) < 1e-6);

  // parity of the profile system: T(-x) = Q T(x), N(-x) = -Q N(x) with
  // Q = diag(1,-1,-1), hence A- = Q A+ and B- = -Q B+
  const Vec3 QAp{p.corner.A_plus.x, -p.corner.A_plus.y, -p.corner.A_plus.z};
  CHECK(norm(p.corner.A_minus - QAp) < 1e-6);
  const CVec3 QBp(Vec3{-p.corner.B_plus.real().x, p.corner.B_plus.real().y,
                       p.corner.B_plus.real().z},
                  Vec3{-p.corner.B_plus.imag().x, p.corner.B_plus.imag().y,
                       p.corner.B_plus.imag().z});
  CHECK(cnorm(p.corner.B_minus - QBp) < 1e-5);

  // pointwise parity of the frame itself
  const Grid1D& g = p.profile_frame.grid;
  const std::size_t j0 = g.nearest(0.0);
  for (std::size_t off : {100u, 10000u, 200000u}) {
    const Vec3 Tp = p.profile_frame.T[j0 + off];
    const Vec3 Tm = p.profile_frame.T[j0 - off];
    CHECK(norm(Tm - Vec3{Tp.x, -Tp.y, -Tp.z}) < 1e-9);
  }
}

TEST_CASE("profile integration is 4th-order self-consistent in h") {
  const SelfSimilarProfile p1 = integrate_profile(0.5, 60.0, 1e-3);
  const SelfSimilarProfile p2 = integrate_profile(0.5, 60.0, 5e-4);
  // compare T at shared nodes (every node of p1 is every 2nd node of p2)
  double worst = 0.0;
  for (std::size_t j = 0; j < p1.profile_frame.grid.n; ++j)
    worst = std::max(worst, norm(p1.profile_frame.T[j] - p2.profile_frame.T[2 * j]));
  CHECK(worst < 1e-10);  // ~ C h^4 with tiny C at these resolutions
}

TEST_CASE("integrate_profile preconditions") {
  CHECK_THROWS_AS(integrate_profile(0.5, 30.0, 1e-4), contract_error);
  CHECK_THROWS_AS(integrate_profile(0.5, 200.0, 5e-3), resolution_error);
  CHECK_THROWS_AS(integrate_profile(-0.1, 200.0, 5e-4), contract_error);
}

TEST_CASE("extract_asymptotics rejects short windows") {
  SelfSimilarProfile p = integrate_profile(0.3, 60.0, 1e-3);
  p.tail_lo = 50.0;
  p.tail_hi = 51.5;  // ~6 oscillation periods
  CHECK_THROWS_AS(extract_asymptotics(p), fit_error);
}

TEST_CASE("selfsimilar_frame sampling and exact scaling") {
  const SelfSimilarProfile p = integrate_profile(0.4, 60.0, 1e-3);

  // t = 1 reproduces profile nodes
  const FrameVec f = selfsimilar_frame(p, 1.0, 2.0);
  const std::size_t j = p.profile_frame.grid.nearest(2.0);
  CHECK(norm(f.T - p.profile_frame.T[j]) < 1e-12);

  // scaling: (t, x sqrt(t)) with t = 4 hits the same profile point bit-for-bit
  for (double x0 : {0.5, 1.25, 3.0}) {
    const FrameVec a = selfsimilar_frame(p, 4.0, 2.0 * x0);
    const FrameVec b = selfsimilar_frame(p, 1.0, x0);
    CHECK(norm(a.T - b.T) == 0.0);
    CHECK(norm(a.e1 - b.e1) == 0.0);
  }

  // curvature law |psi| = alpha / sqrt(t) from the frame relation |T_x| = |g|
  const double t = 0.7, h = 1e-4;
  for (double x : {-1.0, 0.3, 2.0}) {
    const Vec3 Tp = selfsimilar_frame(p, t, x + h).T;
    const Vec3 Tm = selfsimilar_frame(p, t, x - h).T;
    const double curv = norm((Tp - Tm) / (2.0 * h));
    CHECK(curv == doctest::Approx(0.4 / std::sqrt(t)).epsilon(1e-4));
  }

  CHECK_THROWS_AS(selfsimilar_frame(p, 1e-6, 50.0), range_error);
}

TEST_CASE("selfsimilar_curve approaches the corner trace at rate 1/2") {
  const SelfSimilarProfile p = integrate_profile(0.5, 120.0, 5e-4);
  const Grid1D grid = Grid1D::symmetric(1.0, 0.01);

  auto corner_trace = [&](double x) {
    return x >= 0.0 ? x * p.corner.A_plus : x * p.corner.A_minus;
  };

  std::vector<double> ts, sup;
  for (double t = 1e-1; t > 0.9e-4; t *= 0.5) {
    const Curve c = selfsimilar_curve(p, t, grid);
    // chord defect of the sampled coil follows alpha^2 h^2 / (24 t)
    CHECK(c.arclength_defect() < 2.0 * 0.25 * grid.h * grid.h / (24.0 * t) + 1e-8);
    double worst = 0.0;
    for (std::size_t j = 0; j < grid.n; ++j)
      worst = std::max(worst, norm(c.points[j] - corner_trace(grid.node(j))));
    ts.push_back(t);
    sup.push_back(worst);
  }
  const RateFit fit = fit_loglog("supdist", ts, sup, 0.5);
  CHECK(fit.exponent == doctest::Approx(0.5).epsilon(0.1));

  // small alpha: the curve hugs the straight line
  const SelfSimilarProfile tiny = integrate_profile(0.01, 60.0, 1e-3);
  const Curve c = selfsimilar_curve(tiny, 0.5, grid);
  for (std::size_t j = 0; j < grid.n; ++j)
    CHECK(norm(c.points[j] - Vec3{grid.node(j), 0, 0}) < 0.05);
}

TEST_CASE("selfsimilar_curve is arc length on a resolved grid, with odd symmetry") {
  const SelfSimilarProfile p = integrate_profile(0.5, 60.0, 2.5e-4);
  // chord ratio of the trapezoid-integrated curve is 1 - (alpha h)^2/8
  const Grid1D grid = Grid1D::symmetric(1.0, 4e-4);
  const Curve c = selfsimilar_curve(p, 1.0, grid);
  CHECK(c.arclength_defect() < 1e-8);  // tangent modulus 1 +- 1e-8

  // chi1(-eta) = -Q chi1(eta), Q = diag(1,-1,-1): the corner point 2 alpha e_z
  // fixes the placement
  const std::size_t j0 = p.curve_t1.grid.nearest(0.0);
  CHECK(norm(p.curve_t1.points[j0] - Vec3{0, 0, 1.0}) < 1e-9);  // 2 alpha e_z
  for (std::size_t off : {500u, 20000u}) {
    const Vec3 a = p.curve_t1.points[j0 + off];
    const Vec3 b = p.curve_t1.points[j0 - off];
    CHECK(norm(b - Vec3{-a.x, a.y, a.z}) < 1e-7);
  }
}

TEST_CASE("binormal residual: straight line, translating circle, self-similar family") {
  {
    // straight line, constant in time
    const Grid1D g(-1.0, 0.01, 201);
    std::vector<Curve> curves;
    std::vector<double> times;
    for (int k = 0; k < 3; ++k) {
      std::vector<Vec3> pts(g.n);
      for (std::size_t j = 0; j < g.n; ++j) pts[j] = {g.node(j), 0, 0};
      curves.emplace_back(g, std::move(pts), true);
      times.push_back(0.1 * k);
    }
    CHECK(binormal_residual(times, curves) < 1e-12);
  }
  {
    // circle of radius R translating along its axis at speed 1/R
    const double R = 1.5;
    auto make = [&](double t) {
      const Grid1D g(0.0, 0.01, 501);
      std::vector<Vec3> pts(g.n);
      for (std::size_t j = 0; j < g.n; ++j) {
        pts[j] = oracles::circle_point(R, g.node(j)) + Vec3{0, 0, t / R};
      }
      return Curve(g, std::move(pts), true);
    };
    const std::vector<double> times{0.0, 0.01, 0.02};
    const std::vector<Curve> curves{make(0.0), make(0.01), make(0.02)};
    CHECK(binormal_residual(times, curves) < 1e-3);  // O(h^2)
  }
  {
    // self-similar family: residual refines at order >= 1.9
    const SelfSimilarProfile p = integrate_profile(0.5, 60.0, 1e-3);
    auto residual_at = [&](double h, double dt) {
      const Grid1D g = Grid1D::symmetric(2.0, h);
      std::vector<double> times;
      std::vector<Curve> curves;
      std::vector<FrameField> frames;
      for (int k = -1; k <= 1; ++k) {
        const double t = 1.05 + dt * k;
        times.push_back(t);
        curves.push_back(selfsimilar_curve(p, t, g));
        FrameField ff(g);
        for (std::size_t j = 0; j < g.n; ++j) ff.set(j, selfsimilar_frame(p, t, g.node(j)));
        frames.push_back(std::move(ff));
      }
      return binormal_residual(times, curves, frames);
    };
    const double r1 = residual_at(0.02, 0.02);
    const double r2 = residual_at(0.01, 0.01);
    CHECK(std::log2(r1 / r2) > 1.9);
  }
}

TEST_CASE("binormal residual contract checks") {
  const Grid1D g(-1.0, 0.01, 101);
  std::vector<Vec3> pts(g.n, Vec3{0, 0, 0});
  for (std::size_t j = 0; j < g.n; ++j) pts[j] = {g.node(j), 0, 0};
  const Curve c(g, pts, true);
  CHECK_THROWS_AS(binormal_residual({0.0, 0.1}, {c, c}), contract_error);
  CHECK_THROWS_AS(binormal_residual({0.0, 0.1, 0.3}, {c, c, c}), contract_error);
}
