#include "filament/wavefield.hpp"

#include <cmath>

#include "filament/kernels.hpp"

namespace filament {

SpectralField fourier_forward(const WaveField& f) {
  SpectralField out;
  out.grid = f.grid;
  out.coeffs = f.values;
  kernels::fft_radix2(out.coeffs, -1);
  // quadrature weight h and the phase shifting the origin to x_min
  const std::size_t n = f.grid.n;
  for (std::size_t k = 0; k < n; ++k) {
    out.coeffs[k] *= f.grid.h * std::polar(1.0, -f.grid.x_min * out.xi(k));
  }
  return out;
}

WaveField fourier_inverse(const SpectralField& c, double time) {
  std::vector<complexd> v = c.coeffs;
  const std::size_t n = c.grid.n;
  const double L = c.grid.extent();
  for (std::size_t k = 0; k < n; ++k) {
    v[k] *= std::polar(1.0, c.grid.x_min * c.xi(k)) / L;
  }
  kernels::fft_radix2(v, +1);
  return WaveField(c.grid, std::move(v), time);
}

WaveField free_propagate(const WaveField& f, double t) {
  if (t == 0.0) return f;
  SpectralField c = fourier_forward(f);
  const std::size_t n = c.grid.n;
  for (std::size_t k = 0; k < n; ++k) {
    const double xi = c.xi(k);
    c.coeffs[k] *= std::polar(1.0, -t * xi * xi);
  }
  WaveField out = fourier_inverse(c, f.time + t);
  return out;
}

double conserved_mass(const WaveField& f) { return f.grid.h * kernels::sum_abs2(f.values); }

double deriv_l2_norm(const WaveField& f, int k) {
  SpectralField c = fourier_forward(f);
  // Parseval for this convention: integral |d^k f|^2 dx = (1/2pi) sum dxi |xi^k c_k|^2
  const double dxi = 2.0 * std::numbers::pi / c.grid.extent();
  double s = 0.0;
  for (std::size_t j = 0; j < c.grid.n; ++j) {
    const double w = std::pow(std::abs(c.xi(j)), k);
    s += std::norm(c.coeffs[j] * w);
  }
  return std::sqrt(s * dxi / (2.0 * std::numbers::pi));
}

}  // namespace filament
