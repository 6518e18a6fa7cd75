#pragma once

#include <functional>
#include <vector>

#include "filament/wavefield.hpp"

namespace filament {

// Stored evolution: field slices at requested output times (psi-time t for the
// direct solver, scattering time s = 1/t for the pseudo-conformal solver).
struct Trajectory {
  Grid1D grid;
  std::vector<double> times;
  std::vector<std::vector<complexd>> slices;

  WaveField field(std::size_t k) const { return WaveField(grid, slices[k], times[k]); }
};

// Observer invoked after every internal step (used to tabulate center-line
// values along the march).
using StepTap = std::function<void(double time, const std::vector<complexd>& values)>;

// Strang split-step for i psi_t + psi_xx + 1/2 (|psi|^2 - a(t)) psi = 0.
// The linear substep is the exact spectral free flow; each half nonlinear kick
// evaluates a(t) at the midpoint of its own half interval. dt is capped at
// 0.1 / max|psi|^2 so the phase per step stays small.
Trajectory split_step_psi(const WaveField& psi0, const GaugeSpec& gauge, double t0, double t1,
                          double dt, const std::vector<double>& output_times,
                          const StepTap& tap = nullptr);

// Pseudo-conformal evolution of the perturbation u(s, y), s = 1/t:
//   i u_s + u_yy + (1/2s)(|u+alpha|^2 - alpha^2)(u+alpha) = 0.
// The nonlinear kick acts on w = u + alpha by a pure phase. kappa > 0 grows the
// step geometrically, ds = min(ds_max, kappa * s), which matches the 1/s decay
// of the nonlinear coefficient.
Trajectory split_step_u(const WaveField& u0, double alpha, double s0, double s1, double ds_max,
                        const std::vector<double>& output_s, double kappa = 0.0,
                        const StepTap& tap = nullptr);

// Max-norm discrete residual of the psi equation over interior times; spatial
// Laplacian is spectral, the time derivative centered. interior_frac restricts
// the spatial scan to the centered fraction of the grid (periodic wrap mask).
double nls_residual(const Trajectory& traj, const GaugeSpec& gauge, double interior_frac = 0.6);

}  // namespace filament
