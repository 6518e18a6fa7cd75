#include "filament/nls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "filament/kernels.hpp"

namespace filament {

namespace {

// Spectral free step: values <- IDFT( e^{-i tau xi^2} DFT(values) ) / n.
// The 1/n normalization is folded into the multiplier.
struct DriftOperator {
  std::vector<double> xi2;
  std::vector<complexd> mult;
  double tau = std::numeric_limits<double>::quiet_NaN();

  explicit DriftOperator(const Grid1D& grid) {
    const std::size_t n = grid.n;
    xi2.resize(n);
    mult.resize(n);
    const double dxi = 2.0 * std::numbers::pi / grid.extent();
    for (std::size_t k = 0; k < n; ++k) {
      const long long kk = k < n / 2 ? static_cast<long long>(k)
                                     : static_cast<long long>(k) - static_cast<long long>(n);
      const double xi = dxi * static_cast<double>(kk);
      xi2[k] = xi * xi;
    }
  }

  void prepare(double tau_new) {
    if (tau_new == tau) return;
    tau = tau_new;
    const double inv_n = 1.0 / static_cast<double>(mult.size());
    const long long n = static_cast<long long>(mult.size());
#ifdef _OPENMP
#pragma omp parallel for if (mult.size() >= 16384) schedule(static)
#endif
    for (long long k = 0; k < n; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      mult[ku] = std::polar(inv_n, -tau * xi2[ku]);
    }
  }

  void apply(std::vector<complexd>& v) {
    kernels::fft_radix2(v, -1);
    kernels::apply_multiplier(v, mult);
    kernels::fft_radix2(v, +1);
  }
};

std::vector<double> checked_outputs(const std::vector<double>& outs, double lo, double hi,
                                    const char* who) {
  if (outs.empty()) throw contract_error(std::string(who) + ": no output times requested");
  const double a = std::min(lo, hi), b = std::max(lo, hi);
  const double dir = hi > lo ? 1.0 : -1.0;
  for (std::size_t i = 0; i < outs.size(); ++i) {
    if (outs[i] < a - 1e-12 || outs[i] > b + 1e-9 * b)
      throw contract_error(std::string(who) + ": output time outside the evolution span");
    if (i > 0 && dir * (outs[i] - outs[i - 1]) <= 0.0)
      throw contract_error(std::string(who) + ": output times must be ordered with the march");
  }
  return outs;
}

}  // namespace

Trajectory split_step_psi(const WaveField& psi0, const GaugeSpec& gauge, double t0, double t1,
                          double dt, const std::vector<double>& output_times, const StepTap& tap) {
  if (gauge.kind == GaugeSpec::Kind::critical && t0 <= 0.0)
    throw domain_error("split_step_psi: critical gauge requires t0 > 0");
  if (!(t1 > t0)) throw contract_error("split_step_psi: need t1 > t0");
  if (!(dt > 0.0)) throw contract_error("split_step_psi: dt must be > 0");
  const auto outs = checked_outputs(output_times, t0, t1, "split_step_psi");

  Trajectory traj;
  traj.grid = psi0.grid;
  traj.times = outs;

  DriftOperator drift(psi0.grid);
  std::vector<complexd> v = psi0.values;
  double t = t0;

  for (double t_out : outs) {
    const double span = t_out - t;
    if (span > 1e-14) {
      const double amp2 = [&] {
        const double m = kernels::max_abs(v);
        return m * m;
      }();
      const double dt_eff = std::min(dt, 0.1 / std::max(amp2, 1e-30));
      const auto m = static_cast<std::size_t>(std::ceil(span / dt_eff - 1e-12));
      const double tau = span / static_cast<double>(m);
      drift.prepare(tau);
      for (std::size_t step = 0; step < m; ++step) {
        kernels::phase_kick(v, 0.25 * tau, gauge.a(t + 0.25 * tau));
        drift.apply(v);
        kernels::phase_kick(v, 0.25 * tau, gauge.a(t + 0.75 * tau));
        t += tau;
        if (tap) tap(t, v);
      }
      t = t_out;  // absorb round-off drift in the clock
    }
    traj.slices.push_back(v);
  }
  return traj;
}

Trajectory split_step_u(const WaveField& u0, double alpha, double s0, double s1, double ds_max,
                        const std::vector<double>& output_s, double kappa, const StepTap& tap) {
  if (std::min(s0, s1) < 1.0) throw domain_error("split_step_u: need s >= 1 over the span");
  if (s1 == s0) throw contract_error("split_step_u: empty span");
  if (!(ds_max > 0.0)) throw contract_error("split_step_u: ds must be > 0");
  const double dir = s1 > s0 ? 1.0 : -1.0;  // the scheme is time-reversible
  const auto outs = checked_outputs(output_s, s0, s1, "split_step_u");

  Trajectory traj;
  traj.grid = u0.grid;
  traj.times = outs;

  DriftOperator drift(u0.grid);
  std::vector<complexd> v = u0.values;
  double s = s0;

  // phase per kick stays below 0.1: |ds| <= 0.2 s / max|w|^2. The amplitude
  // drifts slowly; refresh the scan every few steps.
  double mu_cache = kernels::max_abs(v) + std::abs(alpha);
  int since_scan = 0;
  auto stable_ds = [&](double at_s) {
    if (++since_scan >= 8) {
      mu_cache = kernels::max_abs(v) + std::abs(alpha);
      since_scan = 0;
    }
    return 0.2 * at_s / std::max(mu_cache * mu_cache, 1e-30);
  };

  for (double s_out : outs) {
    while (dir * (s_out - s) > 1e-12 * std::max(1.0, s_out)) {
      double mag = ds_max;
      if (kappa > 0.0) mag = std::min(mag, kappa * s);
      mag = std::min(mag, stable_ds(s));
      mag = std::min(mag, dir * (s_out - s));
      const double tau = dir * mag;
      drift.prepare(tau);
      kernels::ansatz_phase_kick(v, alpha, 0.25 * tau / (s + 0.25 * tau));
      drift.apply(v);
      kernels::ansatz_phase_kick(v, alpha, 0.25 * tau / (s + 0.75 * tau));
      s += tau;
      if (tap) tap(s, v);
    }
    s = s_out;
    traj.slices.push_back(v);
  }
  return traj;
}

double nls_residual(const Trajectory& traj, const GaugeSpec& gauge, double interior_frac) {
  if (traj.times.size() < 3) throw contract_error("nls_residual: need >= 3 time slices");
  const double dt = traj.times[1] - traj.times[0];
  for (std::size_t k = 1; k + 1 < traj.times.size(); ++k)
    if (std::abs((traj.times[k + 1] - traj.times[k]) - dt) > 1e-9 * std::abs(dt))
      throw contract_error("nls_residual: slices not uniformly spaced");

  const std::size_t n = traj.grid.n;
  const auto margin = static_cast<std::size_t>(0.5 * (1.0 - interior_frac) * static_cast<double>(n));
  DriftOperator drift(traj.grid);  // reuse its xi^2 table

  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < traj.times.size(); ++k) {
    // spectral second derivative of slice k
    std::vector<complexd> lap = traj.slices[k];
    kernels::fft_radix2(lap, -1);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) lap[j] *= -drift.xi2[j] * inv_n;
    kernels::fft_radix2(lap, +1);

    const double a = gauge.a(traj.times[k]);
    for (std::size_t j = margin; j + margin < n; ++j) {
      const complexd dpsi_dt =
          (traj.slices[k + 1][j] - traj.slices[k - 1][j]) / complexd(2.0 * dt, 0.0);
      const complexd psi = traj.slices[k][j];
      const complexd res =
          complexd(0.0, 1.0) * dpsi_dt + lap[j] + 0.5 * (std::norm(psi) - a) * psi;
      worst = std::max(worst, std::abs(res));
    }
  }
  return worst;
}

}  // namespace filament
