#pragma once

#include <vector>

#include "filament/frame.hpp"

namespace filament {

// The self-similar family chi_alpha, represented by its t = 1 profile. The
// profile frame solves
//   dT/dx = Re(alpha e^{-i x^2/4} N),   dN/dx = -alpha e^{+i x^2/4} T
// from the canonical seed at x = 0. curve_t1 is the integrated t = 1 curve,
// translated so the t -> 0 polygonal trace has its corner at the origin with
// symmetric placement.
struct SelfSimilarProfile {
  double alpha = 0.0;
  FrameField profile_frame;
  CornerData corner;
  double tail_lo = 0.0, tail_hi = 0.0;
  Curve curve_t1;
};

SelfSimilarProfile integrate_profile(double alpha, double x_max, double h);

// Least-squares tail extraction of A+- and B+- with the oscillatory 1/x ansatz
// y(x) = A + (c1 cos(x^2/4) + c2 sin(x^2/4)) / x over the tail window.
CornerData extract_asymptotics(const SelfSimilarProfile& p);

// Corner angle law: theta = 2 asin(e^{-pi alpha^2 / 2}) and its inverse.
double angle_from_alpha(double alpha);
double alpha_from_angle(double theta);

// Frame and curve of the self-similar solution at time t > 0 (cubic sampling
// of the profile at x / sqrt(t)).
FrameVec selfsimilar_frame(const SelfSimilarProfile& p, double t, double x);
Curve selfsimilar_curve(const SelfSimilarProfile& p, double t, const Grid1D& grid);

// psi_alpha(t,x) = alpha e^{i x^2 / 4t} / sqrt(t).
complexd psi_alpha(double alpha, double t, double x);

// Max-norm discrete residual of chi_t = chi_x ^ chi_xx over interior nodes and
// interior times. Time derivative is centered on the curves; the spatial side
// uses the frames (chi_x = T, chi_xx by centered difference of T) when given,
// otherwise centered differences of the curve points.
double binormal_residual(const std::vector<double>& times, const std::vector<Curve>& curves,
                         const std::vector<FrameField>& frames = {});

// Tail-fit helper shared with tests: fits y = A + (c1 cos(x^2/4) + c2 sin(x^2/4))/x
// over the nodes of grid with lo <= |x| <= hi on the given side (+1 / -1).
struct TailFit {
  double A = 0.0, c_cos = 0.0, c_sin = 0.0;
};
TailFit fit_oscillatory_tail(const Grid1D& grid, const std::vector<double>& y, double lo,
                             double hi, int side);

}  // namespace filament
