#pragma once

#include <string>
#include <vector>

#include "filament/frame.hpp"
#include "filament/nls.hpp"
#include "filament/ratefit.hpp"
#include "filament/wavefield.hpp"

namespace filament {

// Asymptotic state u_+ built from filament data, on a periodic grid.
struct ScatteringDatum {
  Grid1D grid;
  std::vector<complexd> u_plus;
  double alpha = 0.0;
  std::string provenance;

  WaveField field(double time = 0.0) const { return WaveField(grid, u_plus, time); }
};

// One audited norm. "suspect" marks growth under the extent / refinement
// probes (a sampled-data proxy for non-membership, not a proof).
struct NormEntry {
  std::string name;
  double value = 0.0;
  bool suspect = false;
};

struct HypothesisReport {
  std::vector<NormEntry> entries;
  bool node_at_zero_excluded = false;

  bool any_suspect() const {
    for (const auto& e : entries)
      if (e.suspect) return true;
    return false;
  }
  const NormEntry* find(const std::string& name) const {
    for (const auto& e : entries)
      if (e.name == name) return &e;
    return nullptr;
  }
};

struct RemainderDiagnostics {
  std::vector<double> times;  // psi-time t = 1/s, ascending
  std::vector<double> r_l2, r_h1, r_h2;
  // Long-range gauge: the background alpha winds every mode by the global
  // phase (alpha^2/2) ln s (the phase the snap times t_n remove). The gauged
  // columns compare u(s) with e^{i phi(s)} e^{is d^2} u_+ at the L2-optimal
  // global phase phi(s); winding_phase records phi, winding_rate its fitted
  // slope against ln s (expected alpha^2/2).
  std::vector<double> r_l2_gauged, r_h1_gauged, r_h2_gauged;
  std::vector<double> winding_phase;
  double winding_rate = 0.0;
  std::vector<double> pointwise_u, pointwise_r, pointwise_du, cancel_bound;
  std::vector<RateFit> fits;

  const RateFit* fit(const std::string& name) const {
    for (const auto& f : fits)
      if (f.quantity == name) return &f;
    return nullptr;
  }
};

// Audits every norm in the corner-problem hypothesis block:
//   c in W^{3,1} ^ H^2, c/x in W^{2,1} ^ H^2, x^2 c in W^{3,1} ^ H^2,
//   (1+x^2) c in L^2, x^-2 c in L^2, tau in H^2, tau^2 in H^1.
// Weighted fields skip the node at x = 0 (flagged). Never throws; growth of a
// norm by more than 2x under halving the extent->full-extent comparison or
// under grid refinement (2h -> h subsampling) marks it suspect.
HypothesisReport hypothesis_norms(const FrenetData& fd);

// u_+ = F^-1[ sqrt(i) g(2 xi) e^{i alpha^2 log|xi|} ] on out_grid; g is sampled
// at 2 xi by cubic interpolation (zero outside its support) and the xi = 0 mode
// is dropped. sqrt(i) = e^{i pi/4}.
ScatteringDatum build_uplus(const FrenetData& fd, double alpha, const Grid1D& out_grid);

// Overload on the smallest power-of-two periodic grid covering fd's extent.
ScatteringDatum build_uplus(const FrenetData& fd, double alpha);

// sup |(1+x^2) u_+| and sup |(1+x^2) x u_+|.
std::pair<double, double> weighted_sup_bounds(const ScatteringDatum& sd);

// psi(t, x) = e^{i x^2/4t}/sqrt(t) (alpha + conj(u)(1/t, x/t)) sampled on the
// u-grid scaled by t (x_j = t y_j), and its exact nodewise inverse.
WaveField assemble_psi(double alpha, const WaveField& u, double t);
WaveField extract_u(const WaveField& psi, double alpha, double t);

// Remainder r(s) = u(s) - e^{i s d^2} u_+ along a u-trajectory: L2/H1/H2 norms
// tabulated against t = 1/s with log-log rate fits over the fit window
// [t_fit_lo, t_fit_hi] (0,0 = whole range).
RemainderDiagnostics remainder_diagnostics(const Trajectory& u_traj, const ScatteringDatum& sd,
                                           double t_fit_lo = 0.0, double t_fit_hi = 0.0);

// Pointwise bounds of the perturbation on the compact window |x| <= x_window:
// sup|u(1/t, x/t)|, sup|r(1/t, x/t)|, sup|d_x u(1/t, x/t)| and the cancellation
// combination |(ix/2t) u - [u(1/t, x/t)]_x|, with fitted exponents vs t.
RemainderDiagnostics pointwise_bounds_check(const Trajectory& u_traj, const ScatteringDatum& sd,
                                            double x_window, double t_fit_lo = 0.0,
                                            double t_fit_hi = 0.0);

}  // namespace filament
