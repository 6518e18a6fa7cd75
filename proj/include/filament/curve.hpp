#pragma once

#include <vector>

#include "filament/grid.hpp"
#include "filament/vec3.hpp"

namespace filament {

// Arc-length tolerance for the arclength flag invariant.
inline constexpr double kTolArclen = 1e-6;

struct Curve {
  Grid1D grid;             // parameter grid (arc length when flagged)
  std::vector<Vec3> points;
  bool arclength = false;

  Curve() = default;
  Curve(Grid1D g, std::vector<Vec3> pts, bool arclen)
      : grid(g), points(std::move(pts)), arclength(arclen) {
    if (points.size() != grid.n) throw contract_error("Curve: point count != grid nodes");
  }

  // Max deviation of |finite-difference tangent| from 1 over interior nodes.
  double arclength_defect() const;
};

// Resample an ordered polyline to uniform arc-length spacing target_h.
// Throws contract_error on duplicate consecutive points, resolution_error when
// target_h is not smaller than the total length.
Curve arclength_resample(const std::vector<Vec3>& points, double target_h);

// Cumulative trapezoid integration of a unit tangent field from base_index.
Curve curve_from_tangent(const Grid1D& grid, const std::vector<Vec3>& T, const Vec3& base_point,
                         std::size_t base_index);

// Rigid alignment q ~ R p + t (Kabsch/Horn). residual is the rms point distance
// after alignment.
struct RigidFit {
  Mat3 R;
  Vec3 t;
  double residual = 0.0;
};
RigidFit fit_rigid_motion(const std::vector<Vec3>& p, const std::vector<Vec3>& q);

// Rotation-only orthogonal Procrustes fit q ~ R p, projected to SO(3).
struct RotationFit {
  Mat3 R;
  double residual = 0.0;
};
RotationFit fit_rotation(const std::vector<Vec3>& p, const std::vector<Vec3>& q);

}  // namespace filament
