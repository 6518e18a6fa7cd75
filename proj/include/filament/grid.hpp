#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "filament/errors.hpp"

namespace filament {

// Uniform 1-D grid: nodes x_j = x_min + j*h, j = 0..n-1.
// For periodic wave fields the extent is L = n*h and the grid covers [x_min, x_min+L).
struct Grid1D {
  double x_min = 0.0;
  double h = 1.0;
  std::size_t n = 2;

  Grid1D() = default;
  Grid1D(double x_min_, double h_, std::size_t n_) : x_min(x_min_), h(h_), n(n_) {
    if (!(h > 0.0)) throw contract_error("Grid1D: step h must be > 0");
    if (n < 2) throw contract_error("Grid1D: need at least 2 nodes");
  }

  double node(std::size_t j) const { return x_min + static_cast<double>(j) * h; }
  double x_max() const { return node(n - 1); }
  double extent() const { return h * static_cast<double>(n); }  // periodic length

  std::vector<double> nodes() const {
    std::vector<double> xs(n);
    for (std::size_t j = 0; j < n; ++j) xs[j] = node(j);
    return xs;
  }

  // Symmetric grid containing 0 exactly: x_min = -x_max, odd node count.
  static Grid1D symmetric(double x_max, double h) {
    if (!(x_max > 0.0) || !(h > 0.0)) throw contract_error("Grid1D::symmetric: bad extent/step");
    const auto half = static_cast<std::size_t>(std::llround(x_max / h));
    if (half == 0) throw contract_error("Grid1D::symmetric: step too coarse");
    const double hm = x_max / static_cast<double>(half);
    return Grid1D(-x_max, hm, 2 * half + 1);
  }

  // Periodic grid [-L/2, L/2) with power-of-two n; node n/2 sits at x = 0.
  static Grid1D periodic(double length, std::size_t n) {
    if (n < 2 || (n & (n - 1)) != 0) throw contract_error("Grid1D::periodic: n must be a power of two");
    const double h = length / static_cast<double>(n);
    return Grid1D(-0.5 * length, h, n);
  }

  // Index of the node nearest to x (clamped).
  std::size_t nearest(double x) const {
    const double j = std::round((x - x_min) / h);
    if (j <= 0.0) return 0;
    const auto ju = static_cast<std::size_t>(j);
    return ju >= n ? n - 1 : ju;
  }

  bool contains(double x, double tol = 1e-12) const {
    return x >= x_min - tol && x <= x_max() + tol;
  }

  bool same_as(const Grid1D& o, double tol = 1e-12) const {
    return n == o.n && std::abs(x_min - o.x_min) <= tol && std::abs(h - o.h) <= tol;
  }
};

// Cubic (Catmull-Rom style 4-point) interpolation of samples on a uniform grid.
// Falls back to the boundary cells with one-sided stencils. T needs +,-,*double.
template <typename T>
T interp_cubic(const Grid1D& g, const std::vector<T>& f, double x) {
  if (g.n < 4) throw contract_error("interp_cubic: need at least 4 samples");
  double u = (x - g.x_min) / g.h;
  auto i = static_cast<long long>(std::floor(u));
  if (i < 1) i = 1;
  if (i > static_cast<long long>(g.n) - 3) i = static_cast<long long>(g.n) - 3;
  const double t = u - static_cast<double>(i);
  const T& f0 = f[static_cast<std::size_t>(i - 1)];
  const T& f1 = f[static_cast<std::size_t>(i)];
  const T& f2 = f[static_cast<std::size_t>(i + 1)];
  const T& f3 = f[static_cast<std::size_t>(i + 2)];
  // Lagrange cubic through the 4 nodes, evaluated at offset t from node i.
  const double c0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
  const double c1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
  const double c2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
  const double c3 = (t + 1.0) * t * (t - 1.0) / 6.0;
  return f0 * c0 + f1 * c1 + f2 * c2 + f3 * c3;
}

}  // namespace filament
