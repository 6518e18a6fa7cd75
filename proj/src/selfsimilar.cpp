#include "filament/selfsimilar.hpp"

#include <algorithm>
#include <cmath>

namespace filament {

namespace {

constexpr double kMinTailPeriods = 10.0;

std::vector<std::size_t> tail_nodes(const Grid1D& grid, double lo, double hi, int side) {
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < grid.n; ++j) {
    const double x = grid.node(j);
    if (side > 0 && x >= lo && x <= hi) idx.push_back(j);
    if (side < 0 && x <= -lo && x >= -hi) idx.push_back(j);
  }
  return idx;
}

TailFit fit_tail_at(const Grid1D& grid, const std::vector<double>& y,
                    const std::vector<std::size_t>& idx) {
  // normal equations for the 3-parameter model [1, cos(x^2/4)/x, sin(x^2/4)/x]
  double a00 = 0, a01 = 0, a02 = 0, a11 = 0, a12 = 0, a22 = 0;
  double b0 = 0, b1 = 0, b2 = 0;
  for (std::size_t j : idx) {
    const double x = grid.node(j);
    const double ph = 0.25 * x * x;
    const double f1 = std::cos(ph) / x;
    const double f2 = std::sin(ph) / x;
    const double v = y[j];
    a00 += 1.0;   a01 += f1;      a02 += f2;
    a11 += f1 * f1; a12 += f1 * f2; a22 += f2 * f2;
    b0 += v;      b1 += f1 * v;   b2 += f2 * v;
  }
  // solve the symmetric 3x3 system by Cramer
  const double d = a00 * (a11 * a22 - a12 * a12) - a01 * (a01 * a22 - a12 * a02) +
                   a02 * (a01 * a12 - a11 * a02);
  if (std::abs(d) < 1e-300) throw fit_error("fit_oscillatory_tail: singular system");
  const double dA = b0 * (a11 * a22 - a12 * a12) - a01 * (b1 * a22 - a12 * b2) +
                    a02 * (b1 * a12 - a11 * b2);
  const double dC = a00 * (b1 * a22 - b2 * a12) - b0 * (a01 * a22 - a12 * a02) +
                    a02 * (a01 * b2 - b1 * a02);
  const double dS = a00 * (a11 * b2 - b1 * a12) - a01 * (a01 * b2 - b1 * a02) +
                    b0 * (a01 * a12 - a11 * a02);
  return {dA / d, dC / d, dS / d};
}

}  // namespace

TailFit fit_oscillatory_tail(const Grid1D& grid, const std::vector<double>& y, double lo,
                             double hi, int side) {
  const auto idx = tail_nodes(grid, lo, hi, side);
  if (idx.size() < 16) throw fit_error("fit_oscillatory_tail: window too short");
  return fit_tail_at(grid, y, idx);
}

double angle_from_alpha(double alpha) {
  if (alpha < 0.0) throw domain_error("angle_from_alpha: alpha must be >= 0");
  return 2.0 * std::asin(std::exp(-0.5 * std::numbers::pi * alpha * alpha));
}

double alpha_from_angle(double theta) {
  if (!(theta > 0.0) || theta > std::numbers::pi)
    throw domain_error("alpha_from_angle: theta must lie in (0, pi]");
  const double s = std::sin(0.5 * theta);
  return std::sqrt(-2.0 / std::numbers::pi * std::log(s));
}

complexd psi_alpha(double alpha, double t, double x) {
  if (!(t > 0.0)) throw domain_error("psi_alpha: t must be > 0");
  return alpha / std::sqrt(t) * std::polar(1.0, 0.25 * x * x / t);
}

CornerData extract_asymptotics(const SelfSimilarProfile& p) {
  const Grid1D& grid = p.profile_frame.grid;
  const double lo = p.tail_lo, hi = p.tail_hi;
  if (lo < 50.0) throw contract_error("extract_asymptotics: tail window must start at x >= 50");
  const double periods = (hi * hi - lo * lo) / (8.0 * std::numbers::pi);
  if (periods < kMinTailPeriods)
    throw fit_error("extract_asymptotics: tail window shorter than 10 oscillation periods");

  CornerData cd;
  const double a2 = p.alpha * p.alpha;
  for (int side : {+1, -1}) {
    const auto idx = tail_nodes(grid, lo, hi, side);
    if (idx.size() < 16) throw fit_error("extract_asymptotics: tail window too short");

    // tangent components
    std::vector<double> comp(grid.n);
    Vec3 A;
    for (int c = 0; c < 3; ++c) {
      for (std::size_t j = 0; j < grid.n; ++j) {
        const Vec3& v = p.profile_frame.T[j];
        comp[j] = c == 0 ? v.x : (c == 1 ? v.y : v.z);
      }
      const double val = fit_tail_at(grid, comp, idx).A;
      (c == 0 ? A.x : c == 1 ? A.y : A.z) = val;
    }
    A = normalized(A);

    // modulated normal e^{i alpha^2 log|x|} N
    CVec3 B;
    for (int c = 0; c < 3; ++c) {
      std::vector<double> re(grid.n), im(grid.n);
      for (std::size_t j : idx) {
        const CVec3 N = p.profile_frame.N(j);
        const complexd Nc = c == 0 ? N.x : (c == 1 ? N.y : N.z);
        const double x = grid.node(j);
        const complexd m = std::polar(1.0, a2 * std::log(std::abs(x))) * Nc;
        re[j] = m.real();
        im[j] = m.imag();
      }
      const complexd val{fit_tail_at(grid, re, idx).A, fit_tail_at(grid, im, idx).A};
      (c == 0 ? B.x : c == 1 ? B.y : B.z) = val;
    }

    if (side > 0) {
      cd.A_plus = A;
      cd.B_plus = B;
    } else {
      cd.A_minus = A;
      cd.B_minus = B;
    }
  }
  cd.theta = measure_corner_angle(cd.A_plus, cd.A_minus);
  return cd;
}

SelfSimilarProfile integrate_profile(double alpha, double x_max, double h) {
  if (alpha < 0.0) throw contract_error("integrate_profile: alpha must be >= 0");
  if (x_max < 50.0) throw contract_error("integrate_profile: x_max must be >= 50");
  if (h * x_max > 0.5)
    throw resolution_error("integrate_profile: h*x_max > 0.5, oscillation x^2/4 unresolved");

  SelfSimilarProfile p;
  p.alpha = alpha;
  const Grid1D grid = Grid1D::symmetric(x_max, h);
  auto g = [alpha](double x) { return alpha * std::polar(1.0, -0.25 * x * x); };
  const FrameVec seed;  // canonical (T, e1, e2) = (ex, ey, ez)
  p.profile_frame = integrate_parallel_frame_x(grid, g, seed, seed, 1);
  p.tail_lo = std::max(50.0, 0.5 * x_max);
  p.tail_hi = x_max;
  p.corner = extract_asymptotics(p);

  // Placement of the t = 1 curve: the ansatz sqrt(t) chi1(x/sqrt(t)) solves
  // the binormal flow only with chi1(0) = 2 (T ^ T_x)(0) = 2 alpha (T ^ e1)(0).
  // The corner of the t -> 0 trace then sits exactly at the origin and the
  // corner point itself travels as chi(t, 0) = 2 alpha sqrt(t) e_b.
  const std::size_t j0 = grid.nearest(0.0);
  const Vec3 chi1_at_0 = 2.0 * alpha * cross(p.profile_frame.T[j0], p.profile_frame.e1[j0]);
  p.curve_t1 = curve_from_tangent(grid, p.profile_frame.T, chi1_at_0, j0);
  return p;
}

FrameVec selfsimilar_frame(const SelfSimilarProfile& p, double t, double x) {
  if (!(t > 0.0)) throw domain_error("selfsimilar_frame: t must be > 0");
  const double eta = x / std::sqrt(t);
  const Grid1D& grid = p.profile_frame.grid;
  if (!grid.contains(eta)) throw range_error("selfsimilar_frame: x/sqrt(t) outside profile grid");
  FrameVec f;
  f.T = interp_cubic(grid, p.profile_frame.T, eta);
  f.e1 = interp_cubic(grid, p.profile_frame.e1, eta);
  f.e2 = interp_cubic(grid, p.profile_frame.e2, eta);
  return f;
}

Curve selfsimilar_curve(const SelfSimilarProfile& p, double t, const Grid1D& grid) {
  if (!(t > 0.0)) throw domain_error("selfsimilar_curve: t must be > 0");
  const double rt = std::sqrt(t);
  const Grid1D& pg = p.curve_t1.grid;
  if (!pg.contains(grid.x_min / rt) || !pg.contains(grid.x_max() / rt))
    throw range_error("selfsimilar_curve: grid/sqrt(t) outside profile grid");
  std::vector<Vec3> pts(grid.n);
  for (std::size_t j = 0; j < grid.n; ++j)
    pts[j] = rt * interp_cubic(pg, p.curve_t1.points, grid.node(j) / rt);
  return Curve(grid, std::move(pts), true);
}

double binormal_residual(const std::vector<double>& times, const std::vector<Curve>& curves,
                         const std::vector<FrameField>& frames) {
  if (times.size() < 3 || curves.size() != times.size())
    throw contract_error("binormal_residual: need >= 3 aligned time slices");
  if (!frames.empty() && frames.size() != times.size())
    throw contract_error("binormal_residual: frame count mismatch");
  const double dt = times[1] - times[0];
  for (std::size_t k = 1; k + 1 < times.size(); ++k) {
    if (std::abs((times[k + 1] - times[k]) - dt) > 1e-9 * std::abs(dt))
      throw contract_error("binormal_residual: non-uniform dt");
  }
  const Grid1D& grid = curves.front().grid;
  for (const auto& c : curves)
    if (!c.grid.same_as(grid)) throw contract_error("binormal_residual: mismatched grids");
  for (const auto& f : frames)
    if (!f.grid.same_as(grid)) throw contract_error("binormal_residual: mismatched frame grids");

  const double h = grid.h;
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < times.size(); ++k) {
    for (std::size_t j = 1; j + 1 < grid.n; ++j) {
      const Vec3 chi_t = (curves[k + 1].points[j] - curves[k - 1].points[j]) / (2.0 * dt);
      Vec3 rhs;
      if (!frames.empty()) {
        const Vec3 Tx = (frames[k].T[j + 1] - frames[k].T[j - 1]) / (2.0 * h);
        rhs = cross(frames[k].T[j], Tx);
      } else {
        const Vec3 chi_x = (curves[k].points[j + 1] - curves[k].points[j - 1]) / (2.0 * h);
        const Vec3 chi_xx =
            (curves[k].points[j + 1] - 2.0 * curves[k].points[j] + curves[k].points[j - 1]) /
            (h * h);
        rhs = cross(chi_x, chi_xx);
      }
      worst = std::max(worst, norm(chi_t - rhs));
    }
  }
  return worst;
}

}  // namespace filament
