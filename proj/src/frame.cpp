#include "filament/frame.hpp"

#include <algorithm>
#include <cmath>

namespace filament {

double FrameVec::orthonormality_defect() const {
  double d = std::abs(norm(T) - 1.0);
  d = std::max(d, std::abs(norm(e1) - 1.0));
  d = std::max(d, std::abs(norm(e2) - 1.0));
  d = std::max(d, std::abs(dot(T, e1)));
  d = std::max(d, std::abs(dot(T, e2)));
  d = std::max(d, std::abs(dot(e1, e2)));
  return d;
}

void FrameVec::orthonormalize() {
  T = normalized(T);
  e1 -= dot(e1, T) * T;
  e1 = normalized(e1);
  e2 -= dot(e2, T) * T;
  e2 -= dot(e2, e1) * e1;
  e2 = normalized(e2);
}

std::vector<double> fd_derivative(const std::vector<double>& f, double h, int order) {
  const std::size_t n = f.size();
  std::vector<double> d(n, 0.0);
  if (order < 1 || order > 3) throw contract_error("fd_derivative: order must be 1..3");

  auto at = [&](std::size_t j, long long k) { return f[static_cast<std::size_t>(static_cast<long long>(j) + k)]; };

  for (std::size_t j = 0; j < n; ++j) {
    const long long jl = static_cast<long long>(j);
    const long long nr = static_cast<long long>(n);
    switch (order) {
      case 1:
        if (jl >= 2 && jl + 2 < nr) {
          d[j] = (at(j, -2) - 8.0 * at(j, -1) + 8.0 * at(j, 1) - at(j, 2)) / (12.0 * h);
        } else if (jl >= 1 && jl + 1 < nr) {
          d[j] = (at(j, 1) - at(j, -1)) / (2.0 * h);
        } else if (jl == 0) {
          d[j] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
        } else {
          d[j] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
        }
        break;
      case 2:
        if (jl >= 2 && jl + 2 < nr) {
          d[j] = (-at(j, -2) + 16.0 * at(j, -1) - 30.0 * f[j] + 16.0 * at(j, 1) - at(j, 2)) /
                 (12.0 * h * h);
        } else if (jl >= 1 && jl + 1 < nr) {
          d[j] = (at(j, -1) - 2.0 * f[j] + at(j, 1)) / (h * h);
        } else if (jl == 0) {
          d[j] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (h * h);
        } else {
          d[j] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / (h * h);
        }
        break;
      case 3:
        if (jl >= 3 && jl + 3 < nr) {
          d[j] = (0.125 * at(j, -3) - at(j, -2) + 1.625 * at(j, -1) - 1.625 * at(j, 1) +
                  at(j, 2) - 0.125 * at(j, 3)) /
                 (h * h * h);
        } else if (jl >= 2 && jl + 2 < nr) {
          d[j] = (-at(j, -2) + 2.0 * at(j, -1) - 2.0 * at(j, 1) + at(j, 2)) / (2.0 * h * h * h);
        } else if (jl + 3 < nr) {
          d[j] = (f[j + 3] - 3.0 * f[j + 2] + 3.0 * f[j + 1] - f[j]) / (h * h * h);
        } else {
          d[j] = (f[j] - 3.0 * f[j - 1] + 3.0 * f[j - 2] - f[j - 3]) / (h * h * h);
        }
        break;
    }
  }
  return d;
}

FrenetData frenet_data(const Curve& curve) {
  if (!curve.arclength) throw contract_error("frenet_data: curve is not arc-length parametrized");
  if (curve.grid.n < 5) throw contract_error("frenet_data: need at least 5 nodes");

  const std::size_t n = curve.grid.n;
  const double h = curve.grid.h;
  std::vector<double> px(n), py(n), pz(n);
  for (std::size_t j = 0; j < n; ++j) {
    px[j] = curve.points[j].x;
    py[j] = curve.points[j].y;
    pz[j] = curve.points[j].z;
  }
  const auto dx1 = fd_derivative(px, h, 1), dy1 = fd_derivative(py, h, 1), dz1 = fd_derivative(pz, h, 1);
  const auto dx2 = fd_derivative(px, h, 2), dy2 = fd_derivative(py, h, 2), dz2 = fd_derivative(pz, h, 2);
  const auto dx3 = fd_derivative(px, h, 3), dy3 = fd_derivative(py, h, 3), dz3 = fd_derivative(pz, h, 3);

  FrenetData fd;
  fd.grid = curve.grid;
  fd.gamma = 0.0;
  fd.c.resize(n);
  fd.tau.resize(n);
  double cmax = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    fd.c[j] = norm(Vec3{dx2[j], dy2[j], dz2[j]});
    cmax = std::max(cmax, fd.c[j]);
  }
  const double c_floor = 1e-8 * cmax;
  for (std::size_t j = 0; j < n; ++j) {
    if (fd.c[j] > c_floor) {
      const Vec3 d1{dx1[j], dy1[j], dz1[j]};
      const Vec3 d2{dx2[j], dy2[j], dz2[j]};
      const Vec3 d3{dx3[j], dy3[j], dz3[j]};
      fd.tau[j] = dot(cross(d1, d2), d3) / (fd.c[j] * fd.c[j]);
    } else {
      fd.tau[j] = 0.0;
    }
  }
  return fd;
}

FilamentFunction filament_function(const FrenetData& fd) {
  const std::size_t n = fd.grid.n;
  const std::size_t j0 = fd.grid.nearest(0.0);
  std::vector<double> phase(n, 0.0);
  // int_0^x tau: trapezoid accumulated outward from the node nearest 0
  phase[j0] = fd.tau[j0] * fd.grid.node(j0);
  for (std::size_t j = j0 + 1; j < n; ++j)
    phase[j] = phase[j - 1] + 0.5 * fd.grid.h * (fd.tau[j - 1] + fd.tau[j]);
  for (std::size_t j = j0; j-- > 0;)
    phase[j] = phase[j + 1] - 0.5 * fd.grid.h * (fd.tau[j] + fd.tau[j + 1]);

  FilamentFunction g;
  g.grid = fd.grid;
  g.g.resize(n);
  for (std::size_t j = 0; j < n; ++j) g.g[j] = fd.c[j] * std::polar(1.0, phase[j] + fd.gamma);
  return g;
}

namespace {

struct FrameDeriv {
  Vec3 dT, de1, de2;
};

inline FrameDeriv frame_rhs(const FrameVec& f, complexd g) {
  const double gr = g.real(), gi = g.imag();
  // T' = Re(g N) = gr e1 - gi e2 ; N' = -conj(g) T
  return {gr * f.e1 - gi * f.e2, -gr * f.T, gi * f.T};
}

inline FrameVec frame_add(const FrameVec& f, const FrameDeriv& d, double s) {
  return {f.T + s * d.dT, f.e1 + s * d.de1, f.e2 + s * d.de2};
}

}  // namespace

void rk4_frame_step(FrameVec& f, double x, double dx, const std::function<complexd(double)>& g) {
  const FrameDeriv k1 = frame_rhs(f, g(x));
  const FrameDeriv k2 = frame_rhs(frame_add(f, k1, 0.5 * dx), g(x + 0.5 * dx));
  const FrameDeriv k3 = frame_rhs(frame_add(f, k2, 0.5 * dx), g(x + 0.5 * dx));
  const FrameDeriv k4 = frame_rhs(frame_add(f, k3, dx), g(x + dx));
  f.T += (dx / 6.0) * (k1.dT + 2.0 * k2.dT + 2.0 * k3.dT + k4.dT);
  f.e1 += (dx / 6.0) * (k1.de1 + 2.0 * k2.de1 + 2.0 * k3.de1 + k4.de1);
  f.e2 += (dx / 6.0) * (k1.de2 + 2.0 * k2.de2 + 2.0 * k3.de2 + k4.de2);
}

FrameField integrate_parallel_frame_x(const Grid1D& grid,
                                      const std::function<complexd(double)>& g,
                                      const FrameVec& plus_seed, const FrameVec& minus_seed,
                                      int n_substeps) {
  if (plus_seed.orthonormality_defect() > 1e-8 || minus_seed.orthonormality_defect() > 1e-8)
    throw contract_error("integrate_parallel_frame_x: seed frame is not orthonormal");
  if (n_substeps < 1) throw contract_error("integrate_parallel_frame_x: bad substep count");

  FrameField out(grid);
  const std::size_t j0 = grid.nearest(0.0);
  const double h = grid.h;

  FrameVec f = plus_seed;
  out.set(j0, f);
  for (std::size_t j = j0; j + 1 < grid.n; ++j) {
    const double hs = h / n_substeps;
    for (int s = 0; s < n_substeps; ++s) {
      rk4_frame_step(f, grid.node(j) + s * hs, hs, g);
      f.orthonormalize();
    }
    out.set(j + 1, f);
  }
  f = minus_seed;
  for (std::size_t j = j0; j-- > 0;) {
    const double hs = h / n_substeps;
    for (int s = 0; s < n_substeps; ++s) {
      rk4_frame_step(f, grid.node(j + 1) - s * hs, -hs, g);
      f.orthonormalize();
    }
    out.set(j, f);
  }
  return out;
}

FrameField integrate_parallel_frame_x(const FilamentFunction& g, const FrameVec& plus_seed,
                                      const FrameVec& minus_seed) {
  const Grid1D grid = g.grid;
  auto coeff = [&grid, &g](double x) -> complexd {
    // snap to nodes so RK4 endpoints use the exact samples
    const double u = (x - grid.x_min) / grid.h;
    const double r = std::round(u);
    if (std::abs(u - r) < 1e-9 && r >= 0 && r < static_cast<double>(grid.n))
      return g.g[static_cast<std::size_t>(r)];
    return interp_cubic(grid, g.g, x);
  };
  return integrate_parallel_frame_x(grid, coeff, plus_seed, minus_seed, 1);
}

double frame_orthonormality_defect(const FrameField& f) {
  double worst = 0.0;
  for (std::size_t j = 0; j < f.grid.n; ++j)
    worst = std::max(worst, f.at(j).orthonormality_defect());
  return worst;
}

double measure_corner_angle(const Vec3& T_plus, const Vec3& T_minus) {
  if (std::abs(norm(T_plus) - 1.0) > 1e-8 || std::abs(norm(T_minus) - 1.0) > 1e-8)
    throw contract_error("measure_corner_angle: inputs must be unit vectors");
  const double c = std::clamp(-dot(T_plus, T_minus), -1.0, 1.0);
  return std::acos(c);
}

FrameVec curve_frame_at(const Curve& curve, std::size_t j) {
  const FrenetData fd = frenet_data(curve);
  const std::size_t n = curve.grid.n;
  const double h = curve.grid.h;
  std::vector<double> px(n), py(n), pz(n);
  for (std::size_t k = 0; k < n; ++k) {
    px[k] = curve.points[k].x;
    py[k] = curve.points[k].y;
    pz[k] = curve.points[k].z;
  }
  const auto dx1 = fd_derivative(px, h, 1), dy1 = fd_derivative(py, h, 1), dz1 = fd_derivative(pz, h, 1);
  const auto dx2 = fd_derivative(px, h, 2), dy2 = fd_derivative(py, h, 2), dz2 = fd_derivative(pz, h, 2);

  FrameVec f;
  f.T = normalized(Vec3{dx1[j], dy1[j], dz1[j]});
  const Vec3 d2{dx2[j], dy2[j], dz2[j]};
  if (norm(d2) > 1e-12 * std::max(1.0, fd.c[j])) {
    const Vec3 nf = normalized(d2);
    const Vec3 b = cross(f.T, nf);
    f.e1 = nf;
    f.e2 = -b;  // left-handed pairing, consistent with g = c e^{+i int tau}
  } else {
    // straight segment: any unit normal will do
    Vec3 ref = std::abs(f.T.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    f.e1 = normalized(cross(ref, f.T));
    f.e2 = -cross(f.T, f.e1);
  }
  f.orthonormalize();
  return f;
}

}  // namespace filament
