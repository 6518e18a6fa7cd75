#include "filament/scattering.hpp"

#include <algorithm>
#include <cmath>

#include "filament/kernels.hpp"

namespace filament {

namespace {

double trapezoid_l1(const std::vector<double>& f, double h) {
  if (f.size() < 2) return 0.0;
  double s = 0.0;
  for (double v : f) s += std::abs(v);
  s -= 0.5 * (std::abs(f.front()) + std::abs(f.back()));
  return s * h;
}

double trapezoid_l2(const std::vector<double>& f, double h) {
  if (f.size() < 2) return 0.0;
  double s = 0.0;
  for (double v : f) s += v * v;
  s -= 0.5 * (f.front() * f.front() + f.back() * f.back());
  return std::sqrt(std::max(0.0, s * h));
}

double norm_wk1(const std::vector<double>& f, double h, int k) {
  double s = trapezoid_l1(f, h);
  for (int m = 1; m <= k; ++m) s += trapezoid_l1(fd_derivative(f, h, m), h);
  return s;
}

double norm_hk(const std::vector<double>& f, double h, int k) {
  double s = trapezoid_l2(f, h);
  s *= s;
  for (int m = 1; m <= k; ++m) {
    const double d = trapezoid_l2(fd_derivative(f, h, m), h);
    s += d * d;
  }
  return std::sqrt(s);
}

std::vector<double> inner_half(const Grid1D& grid, const std::vector<double>& f) {
  const double half = 0.5 * std::max(std::abs(grid.x_min), std::abs(grid.x_max()));
  std::vector<double> out;
  for (std::size_t j = 0; j < grid.n; ++j)
    if (std::abs(grid.node(j)) <= half) out.push_back(f[j]);
  return out;
}

std::vector<double> every_other(const std::vector<double>& f) {
  std::vector<double> out;
  for (std::size_t j = 0; j < f.size(); j += 2) out.push_back(f[j]);
  return out;
}

NormEntry audit(const std::string& name, const Grid1D& grid, const std::vector<double>& field,
                double (*nrm)(const std::vector<double>&, double, int), int k) {
  NormEntry e;
  e.name = name;
  e.value = nrm(field, grid.h, k);
  const double on_inner = nrm(inner_half(grid, field), grid.h, k);
  const double on_coarse = nrm(every_other(field), 2.0 * grid.h, k);
  const double tiny = 1e-14 * std::max(1.0, e.value);
  if (!std::isfinite(e.value)) e.suspect = true;
  // growth under extent doubling (inner-half -> full) or under refinement (2h -> h)
  if (on_inner > tiny && e.value > 2.0 * on_inner) e.suspect = true;
  if (on_coarse > tiny && e.value > 2.0 * on_coarse) e.suspect = true;
  return e;
}

}  // namespace

HypothesisReport hypothesis_norms(const FrenetData& fd) {
  const Grid1D& grid = fd.grid;
  const std::size_t n = grid.n;

  HypothesisReport rep;
  std::vector<double> c_over_x(n, 0.0), x2c(n, 0.0), w2c(n, 0.0), invx2c(n, 0.0), tau2(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double x = grid.node(j);
    if (std::abs(x) < 0.5 * grid.h) {
      rep.node_at_zero_excluded = true;  // weighted samples at x = 0 dropped
    } else {
      c_over_x[j] = fd.c[j] / x;
      invx2c[j] = fd.c[j] / (x * x);
    }
    x2c[j] = x * x * fd.c[j];
    w2c[j] = (1.0 + x * x) * fd.c[j];
    tau2[j] = fd.tau[j] * fd.tau[j];
  }

  auto l2only = [](const std::vector<double>& f, double h, int) { return trapezoid_l2(f, h); };

  rep.entries.push_back(audit("c_W31", grid, fd.c, norm_wk1, 3));
  rep.entries.push_back(audit("c_H2", grid, fd.c, norm_hk, 2));
  rep.entries.push_back(audit("c_over_x_W21", grid, c_over_x, norm_wk1, 2));
  rep.entries.push_back(audit("c_over_x_H2", grid, c_over_x, norm_hk, 2));
  rep.entries.push_back(audit("x2c_W31", grid, x2c, norm_wk1, 3));
  rep.entries.push_back(audit("x2c_H2", grid, x2c, norm_hk, 2));
  rep.entries.push_back(audit("w2c_L2", grid, w2c, l2only, 0));
  rep.entries.push_back(audit("invx2c_L2", grid, invx2c, l2only, 0));
  rep.entries.push_back(audit("tau_H2", grid, fd.tau, norm_hk, 2));
  rep.entries.push_back(audit("tau2_H1", grid, tau2, norm_hk, 1));
  return rep;
}

ScatteringDatum build_uplus(const FrenetData& fd, double alpha, const Grid1D& out_grid) {
  if (alpha < 0.0) throw contract_error("build_uplus: alpha must be >= 0");
  const FilamentFunction g = filament_function(fd);

  SpectralField hat;
  hat.grid = out_grid;
  hat.coeffs.assign(out_grid.n, complexd{0.0, 0.0});
  const complexd sqrt_i = std::polar(1.0, 0.25 * std::numbers::pi);
  for (std::size_t k = 0; k < out_grid.n; ++k) {
    const double xi = hat.xi(k);
    if (xi == 0.0) continue;  // the log phase has no limit at xi = 0
    const double x2 = 2.0 * xi;
    if (!g.grid.contains(x2)) continue;  // zero extension beyond the data window
    const complexd gval = interp_cubic(g.grid, g.g, x2);
    hat.coeffs[k] = sqrt_i * std::polar(1.0, alpha * alpha * std::log(std::abs(xi))) * gval;
  }
  const WaveField u = fourier_inverse(hat);

  ScatteringDatum sd;
  sd.grid = out_grid;
  sd.u_plus = u.values;
  sd.alpha = alpha;
  sd.provenance = "filament_function(gamma=" + std::to_string(fd.gamma) + ")";
  return sd;
}

ScatteringDatum build_uplus(const FrenetData& fd, double alpha) {
  std::size_t n = 2;
  while (n < 2 * fd.grid.n) n <<= 1;
  const double span = fd.grid.x_max() - fd.grid.x_min;
  return build_uplus(fd, alpha, Grid1D::periodic(2.0 * span, n));
}

std::pair<double, double> weighted_sup_bounds(const ScatteringDatum& sd) {
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t j = 0; j < sd.grid.n; ++j) {
    const double x = sd.grid.node(j);
    const double w = 1.0 + x * x;
    const double a = std::abs(sd.u_plus[j]);
    s1 = std::max(s1, w * a);
    s2 = std::max(s2, w * std::abs(x) * a);
  }
  return {s1, s2};
}

WaveField assemble_psi(double alpha, const WaveField& u, double t) {
  if (!(t > 0.0)) throw domain_error("assemble_psi: t must be > 0");
  const Grid1D ug = u.grid;
  const Grid1D pg(ug.x_min * t, ug.h * t, ug.n);
  std::vector<complexd> psi(ug.n);
  const double inv_rt = 1.0 / std::sqrt(t);
  for (std::size_t j = 0; j < ug.n; ++j) {
    const double x = pg.node(j);
    psi[j] = std::polar(inv_rt, 0.25 * x * x / t) * (alpha + std::conj(u.values[j]));
  }
  return WaveField(pg, std::move(psi), t);
}

WaveField extract_u(const WaveField& psi, double alpha, double t) {
  if (!(t > 0.0)) throw domain_error("extract_u: t must be > 0");
  const Grid1D pg = psi.grid;
  const Grid1D ug(pg.x_min / t, pg.h / t, pg.n);
  std::vector<complexd> u(pg.n);
  const double rt = std::sqrt(t);
  for (std::size_t j = 0; j < pg.n; ++j) {
    const double x = pg.node(j);
    u[j] = std::conj(std::polar(rt, -0.25 * x * x / t) * psi.values[j] - alpha);
  }
  return WaveField(ug, std::move(u), 1.0 / t);
}

namespace {

struct SpectralTables {
  std::vector<double> xi;
  std::vector<complexd> uplus_hat_raw;  // raw DFT of u_+

  SpectralTables(const Trajectory& traj, const ScatteringDatum& sd) {
    if (!traj.grid.same_as(sd.grid))
      throw contract_error("remainder diagnostics: trajectory and datum grids differ");
    const std::size_t n = traj.grid.n;
    xi.resize(n);
    const double dxi = 2.0 * std::numbers::pi / traj.grid.extent();
    for (std::size_t k = 0; k < n; ++k) {
      const long long kk = k < n / 2 ? static_cast<long long>(k)
                                     : static_cast<long long>(k) - static_cast<long long>(n);
      xi[k] = dxi * static_cast<double>(kk);
    }
    uplus_hat_raw = sd.u_plus;
    kernels::fft_radix2(uplus_hat_raw, -1);
  }

  // raw DFT of r(s) = u(s) - e^{i s d^2} u_+
  std::vector<complexd> r_hat(const Trajectory& traj, std::size_t k) const {
    std::vector<complexd> rh = traj.slices[k];
    kernels::fft_radix2(rh, -1);
    const double s = traj.times[k];
    for (std::size_t j = 0; j < rh.size(); ++j)
      rh[j] -= uplus_hat_raw[j] * std::polar(1.0, -s * xi[j] * xi[j]);
    return rh;
  }
};

// slice indices ordered by decreasing s (i.e. ascending psi-time t = 1/s)
std::vector<std::size_t> by_descending_s(const Trajectory& traj) {
  std::vector<std::size_t> idx(traj.times.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return traj.times[a] > traj.times[b]; });
  return idx;
}

void check_span(const Trajectory& traj) {
  if (traj.times.size() < 5) throw fit_error("u-trajectory has too few slices");
  const auto [lo, hi] = std::minmax_element(traj.times.begin(), traj.times.end());
  if (*hi < 10.0 * *lo) throw fit_error("u-trajectory must span at least one decade in s");
}

std::pair<std::vector<double>, std::vector<double>> window(const std::vector<double>& t,
                                                           const std::vector<double>& v,
                                                           double lo, double hi) {
  if (lo == 0.0 && hi == 0.0) return {t, v};
  std::vector<double> tw, vw;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= lo && t[i] <= hi) {
      tw.push_back(t[i]);
      vw.push_back(v[i]);
    }
  return {tw, vw};
}

RateFit windowed_fit(const std::string& name, const std::vector<double>& t,
                     const std::vector<double>& v, double target, double lo, double hi) {
  auto [tw, vw] = window(t, v, lo, hi);
  return fit_loglog(name, tw, vw, target);
}

}  // namespace

RemainderDiagnostics remainder_diagnostics(const Trajectory& u_traj, const ScatteringDatum& sd,
                                           double t_fit_lo, double t_fit_hi) {
  check_span(u_traj);
  const SpectralTables tab(u_traj, sd);
  const std::size_t n = u_traj.grid.n;
  const double parseval = u_traj.grid.h / static_cast<double>(n);

  RemainderDiagnostics diag;
  for (std::size_t k : by_descending_s(u_traj)) {
    const double s = u_traj.times[k];
    std::vector<complexd> uh = u_traj.slices[k];
    kernels::fft_radix2(uh, -1);
    complexd inner{0.0, 0.0};
    for (std::size_t j = 0; j < n; ++j) {
      const complexd fh = tab.uplus_hat_raw[j] * std::polar(1.0, -s * tab.xi[j] * tab.xi[j]);
      inner += std::conj(fh) * uh[j];
      uh[j] -= fh;  // plain remainder in spectral space
    }
    const double phi = std::abs(inner) > 0.0 ? std::arg(inner) : 0.0;
    const complexd gauge = std::polar(1.0, phi);

    double l2 = 0, h1 = 0, h2 = 0, gl2 = 0, gh1 = 0, gh2 = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const double x2 = tab.xi[j] * tab.xi[j];
      const double p = std::norm(uh[j]);
      l2 += p;
      h1 += x2 * p;
      h2 += x2 * x2 * p;
      // gauged remainder: r_g = u_hat - e^{i phi} free_hat = r + (1 - e^{i phi}) free_hat
      const complexd fh = tab.uplus_hat_raw[j] * std::polar(1.0, -s * tab.xi[j] * tab.xi[j]);
      const double q = std::norm(uh[j] + (complexd{1.0, 0.0} - gauge) * fh);
      gl2 += q;
      gh1 += x2 * q;
      gh2 += x2 * x2 * q;
    }
    diag.times.push_back(1.0 / s);
    diag.winding_phase.push_back(phi);
    diag.r_l2.push_back(std::sqrt(l2 * parseval));
    diag.r_h1.push_back(std::sqrt(h1 * parseval));
    diag.r_h2.push_back(std::sqrt(h2 * parseval));
    diag.r_l2_gauged.push_back(std::sqrt(gl2 * parseval));
    diag.r_h1_gauged.push_back(std::sqrt(gh1 * parseval));
    diag.r_h2_gauged.push_back(std::sqrt(gh2 * parseval));
  }

  // winding rate: OLS slope of phi against ln s = -ln t
  {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto m = static_cast<double>(diag.times.size());
    for (std::size_t i = 0; i < diag.times.size(); ++i) {
      const double x = -std::log(diag.times[i]);
      sx += x;
      sy += diag.winding_phase[i];
      sxx += x * x;
      sxy += x * diag.winding_phase[i];
    }
    const double denom = m * sxx - sx * sx;
    diag.winding_rate = denom > 0 ? (m * sxy - sx * sy) / denom : 0.0;
  }

  diag.fits.push_back(windowed_fit("r_l2", diag.times, diag.r_l2, 0.5, t_fit_lo, t_fit_hi));
  diag.fits.push_back(windowed_fit("r_h1", diag.times, diag.r_h1, 1.0, t_fit_lo, t_fit_hi));
  diag.fits.push_back(windowed_fit("r_h2", diag.times, diag.r_h2, 1.0, t_fit_lo, t_fit_hi));
  diag.fits.push_back(
      windowed_fit("r_l2_gauged", diag.times, diag.r_l2_gauged, 0.5, t_fit_lo, t_fit_hi));
  diag.fits.push_back(
      windowed_fit("r_h1_gauged", diag.times, diag.r_h1_gauged, 1.0, t_fit_lo, t_fit_hi));
  diag.fits.push_back(
      windowed_fit("r_h2_gauged", diag.times, diag.r_h2_gauged, 1.0, t_fit_lo, t_fit_hi));
  return diag;
}

RemainderDiagnostics pointwise_bounds_check(const Trajectory& u_traj, const ScatteringDatum& sd,
                                            double x_window, double t_fit_lo, double t_fit_hi) {
  check_span(u_traj);
  if (!(x_window > 0.0)) throw contract_error("pointwise_bounds_check: bad window");
  const SpectralTables tab(u_traj, sd);
  const std::size_t n = u_traj.grid.n;

  RemainderDiagnostics diag;
  for (std::size_t k : by_descending_s(u_traj)) {
    const double s = u_traj.times[k];
    const double t = 1.0 / s;

    // spectral derivative u_y and remainder on this slice
    std::vector<complexd> uy = u_traj.slices[k];
    kernels::fft_radix2(uy, -1);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) uy[j] *= complexd(0.0, tab.xi[j]) * inv_n;
    kernels::fft_radix2(uy, +1);

    std::vector<complexd> r = tab.r_hat(u_traj, k);
    for (auto& v : r) v *= inv_n;
    kernels::fft_radix2(r, +1);

    double su = 0.0, sr = 0.0, sdu = 0.0, sc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double y = u_traj.grid.node(j);
      if (std::abs(y) * t > x_window) continue;
      const complexd u = u_traj.slices[k][j];
      su = std::max(su, std::abs(u));
      sr = std::max(sr, std::abs(r[j]));
      sdu = std::max(sdu, s * std::abs(uy[j]));
      sc = std::max(sc, std::abs(complexd(0.0, 0.5 * y) * u - s * uy[j]));
    }
    diag.times.push_back(t);
    diag.pointwise_u.push_back(su);
    diag.pointwise_r.push_back(sr);
    diag.pointwise_du.push_back(sdu);
    diag.cancel_bound.push_back(sc);
  }

  diag.fits.push_back(
      windowed_fit("pointwise_u", diag.times, diag.pointwise_u, 0.5, t_fit_lo, t_fit_hi));
  diag.fits.push_back(
      windowed_fit("pointwise_r", diag.times, diag.pointwise_r, 0.75, t_fit_lo, t_fit_hi));
  diag.fits.push_back(
      windowed_fit("pointwise_du", diag.times, diag.pointwise_du, -0.5, t_fit_lo, t_fit_hi));
  diag.fits.push_back(
      windowed_fit("cancel", diag.times, diag.cancel_bound, 0.5, t_fit_lo, t_fit_hi));
  return diag;
}

}  // namespace filament
