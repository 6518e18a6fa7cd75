#pragma once

#include <functional>
#include <vector>

#include "filament/curve.hpp"
#include "filament/grid.hpp"
#include "filament/vec3.hpp"

namespace filament {

inline constexpr double kTolFrame = 1e-10;

// One orthonormal triple (T, e1, e2); N = e1 + i e2.
struct FrameVec {
  Vec3 T{1, 0, 0}, e1{0, 1, 0}, e2{0, 0, 1};

  CVec3 N() const { return CVec3(e1, e2); }

  double orthonormality_defect() const;

  // Modified Gram-Schmidt with T first.
  void orthonormalize();
};

struct FrameField {
  Grid1D grid;
  std::vector<Vec3> T, e1, e2;

  FrameField() = default;
  explicit FrameField(const Grid1D& g)
      : grid(g), T(g.n), e1(g.n), e2(g.n) {}

  FrameVec at(std::size_t j) const { return {T[j], e1[j], e2[j]}; }
  void set(std::size_t j, const FrameVec& f) { T[j] = f.T; e1[j] = f.e1; e2[j] = f.e2; }
  CVec3 N(std::size_t j) const { return CVec3(e1[j], e2[j]); }
};

// Curvature/torsion data (c >= 0, gamma in [0, 2pi)).
struct FrenetData {
  Grid1D grid;
  std::vector<double> c;
  std::vector<double> tau;
  double gamma = 0.0;
};

// Complex filament function g = c * exp(i(int tau + gamma)).
struct FilamentFunction {
  Grid1D grid;
  std::vector<complexd> g;
};

// One-sided corner data of a profile: tangent directions and modulated normals.
struct CornerData {
  Vec3 A_plus{1, 0, 0}, A_minus{1, 0, 0};
  CVec3 B_plus, B_minus;
  double theta = std::numbers::pi;
};

// 4th-order centered finite-difference derivative arrays (order 1, 2 or 3) on a
// uniform grid; lower-order one-sided stencils near the boundary.
std::vector<double> fd_derivative(const std::vector<double>& f, double h, int order);

// Curvature and torsion from an arc-length curve; torsion zeroed where the
// curvature is below 1e-8 * max(c).
FrenetData frenet_data(const Curve& curve);

FilamentFunction filament_function(const FrenetData& fd);

// Two-sided integration of the parallel-frame system
//   T_x = Re(g N),  N_x = -conj(g) T
// by RK4 from the node at x = 0: plus_seed marches right, minus_seed left.
// Re-orthonormalizes after every step; the node at 0 stores plus_seed.
FrameField integrate_parallel_frame_x(const FilamentFunction& g, const FrameVec& plus_seed,
                                      const FrameVec& minus_seed);

// Same system with an analytic coefficient g(x); n_substeps subdivides each grid
// cell (1 = plain RK4 at grid resolution).
FrameField integrate_parallel_frame_x(const Grid1D& grid,
                                      const std::function<complexd(double)>& g,
                                      const FrameVec& plus_seed, const FrameVec& minus_seed,
                                      int n_substeps = 1);

// One RK4 step of the parallel-frame x-system with coefficient g(x); building
// block shared with the time-slice integrators. Does not re-orthonormalize.
void rk4_frame_step(FrameVec& f, double x, double dx, const std::function<complexd(double)>& g);

double frame_orthonormality_defect(const FrameField& f);

// theta = arccos(clamp(-T_plus . T_minus)); straight line -> pi, cusp -> 0.
double measure_corner_angle(const Vec3& T_plus, const Vec3& T_minus);

// Extracts the parallel frame of an arc-length curve at node j (left-handed
// pairing e1 x e2 = -T, matching the phase convention of filament_function):
// e1 = Frenet normal, e2 = -binormal at the reference node.
FrameVec curve_frame_at(const Curve& curve, std::size_t j);

}  // namespace filament
