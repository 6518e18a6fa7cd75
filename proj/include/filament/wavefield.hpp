#pragma once

#include <cstddef>
#include <vector>

#include "filament/grid.hpp"
#include "filament/vec3.hpp"

namespace filament {

// Complex scalar field on a periodic grid (extent L = n*h), stamped with its time.
struct WaveField {
  Grid1D grid;
  std::vector<complexd> values;
  double time = 0.0;

  WaveField() = default;
  WaveField(Grid1D g, std::vector<complexd> v, double t = 0.0)
      : grid(g), values(std::move(v)), time(t) {
    if (values.size() != grid.n) throw contract_error("WaveField: value count != grid nodes");
    if ((grid.n & (grid.n - 1)) != 0) throw contract_error("WaveField: n must be a power of two");
  }

  static WaveField zero(const Grid1D& g, double t = 0.0) {
    return WaveField(g, std::vector<complexd>(g.n, complexd{0.0, 0.0}), t);
  }
};

// Gauge potential a(t) of the cubic NLS: zero, or the critical a(t) = alpha^2/t.
struct GaugeSpec {
  enum class Kind { zero, critical };
  Kind kind = Kind::zero;
  double alpha = 0.0;

  static GaugeSpec zero_gauge() { return {}; }
  static GaugeSpec critical(double alpha) {
    if (alpha < 0.0) throw contract_error("GaugeSpec: alpha must be >= 0");
    return {Kind::critical, alpha};
  }

  double a(double t) const { return kind == Kind::zero ? 0.0 : alpha * alpha / t; }
};

// Spectral coefficients in natural FFT order; entry k corresponds to the
// frequency xi_k = 2*pi*k'/L with k' = k for k < n/2 and k - n otherwise.
struct SpectralField {
  Grid1D grid;  // the spatial grid the coefficients came from
  std::vector<complexd> coeffs;

  double xi(std::size_t k) const {
    const auto n = grid.n;
    const long long kk = k < n / 2 ? static_cast<long long>(k)
                                   : static_cast<long long>(k) - static_cast<long long>(n);
    return 2.0 * std::numbers::pi * static_cast<double>(kk) / grid.extent();
  }
};

// Transform pair with the fixed convention
//   F f(xi)    = integral e^{-i x xi} f(x) dx
//   F^-1 h(x)  = (1/2pi) integral e^{+i x xi} h(xi) dxi
// discretized on the periodic grid (trapezoid weights h, frequency spacing 2pi/L).
SpectralField fourier_forward(const WaveField& f);
WaveField fourier_inverse(const SpectralField& c, double time = 0.0);

// Exact free Schroedinger flow e^{i t d^2/dx^2}: multiplier e^{-i t xi^2} per mode.
WaveField free_propagate(const WaveField& f, double t);

// h * sum |f_j|^2.
double conserved_mass(const WaveField& f);

// L2 norm of the k-th spectral derivative (k = 0, 1, 2), via Parseval.
double deriv_l2_norm(const WaveField& f, int k);

}  // namespace filament
