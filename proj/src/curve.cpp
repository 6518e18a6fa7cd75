#include "filament/curve.hpp"

#include <algorithm>
#include <cmath>

namespace filament {

namespace {

// Non-uniform 4-point Lagrange interpolation of points against parameter s.
Vec3 lagrange4(const std::vector<double>& s, const std::vector<Vec3>& p, std::size_t i1,
               double x) {
  // nodes i1-1 .. i1+2, clamped by caller
  Vec3 out{0, 0, 0};
  for (std::size_t a = 0; a < 4; ++a) {
    const std::size_t ia = i1 - 1 + a;
    double w = 1.0;
    for (std::size_t b = 0; b < 4; ++b) {
      if (a == b) continue;
      const std::size_t ib = i1 - 1 + b;
      w *= (x - s[ib]) / (s[ia] - s[ib]);
    }
    out += p[ia] * w;
  }
  return out;
}

std::vector<Vec3> interp_at(const std::vector<double>& s, const std::vector<Vec3>& p,
                            const std::vector<double>& targets) {
  std::vector<Vec3> out;
  out.reserve(targets.size());
  std::size_t lo = 1;
  for (double x : targets) {
    while (lo + 2 < s.size() - 1 && s[lo + 1] < x) ++lo;
    lo = std::clamp<std::size_t>(lo, 1, s.size() - 3);
    out.push_back(lagrange4(s, p, lo, x));
  }
  return out;
}

std::vector<double> chord_lengths(const std::vector<Vec3>& pts) {
  std::vector<double> s(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i) s[i] = s[i - 1] + dist(pts[i], pts[i - 1]);
  return s;
}

// Largest-eigenvalue eigenvector of a symmetric 4x4 matrix by cyclic Jacobi.
std::array<double, 4> max_eigvec4(std::array<std::array<double, 4>, 4> A) {
  std::array<std::array<double, 4>, 4> V{};
  for (int i = 0; i < 4; ++i) V[i][i] = 1.0;
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < 3; ++p)
      for (int q = p + 1; q < 4; ++q) off += A[p][q] * A[p][q];
    if (off < 1e-30) break;
    for (int p = 0; p < 3; ++p) {
      for (int q = p + 1; q < 4; ++q) {
        if (std::abs(A[p][q]) < 1e-300) continue;
        const double theta = (A[q][q] - A[p][p]) / (2.0 * A[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < 4; ++k) {
          const double akp = A[k][p], akq = A[k][q];
          A[k][p] = c * akp - s * akq;
          A[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 4; ++k) {
          const double apk = A[p][k], aqk = A[q][k];
          A[p][k] = c * apk - s * aqk;
          A[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < 4; ++k) {
          const double vkp = V[k][p], vkq = V[k][q];
          V[k][p] = c * vkp - s * vkq;
          V[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i < 4; ++i)
    if (A[i][i] > A[best][best]) best = i;
  return {V[0][best], V[1][best], V[2][best], V[3][best]};
}

Mat3 quat_to_mat(const std::array<double, 4>& q) {
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  Mat3 R;
  R(0, 0) = w * w + x * x - y * y - z * z;
  R(0, 1) = 2 * (x * y - w * z);
  R(0, 2) = 2 * (x * z + w * y);
  R(1, 0) = 2 * (x * y + w * z);
  R(1, 1) = w * w - x * x + y * y - z * z;
  R(1, 2) = 2 * (y * z - w * x);
  R(2, 0) = 2 * (x * z - w * y);
  R(2, 1) = 2 * (y * z + w * x);
  R(2, 2) = w * w - x * x - y * y + z * z;
  return R;
}

// Horn's quaternion method: best R in SO(3) minimizing sum |q_i - R p_i|^2.
Mat3 best_rotation(const std::vector<Vec3>& p, const std::vector<Vec3>& q) {
  double Sxx = 0, Sxy = 0, Sxz = 0, Syx = 0, Syy = 0, Syz = 0, Szx = 0, Szy = 0, Szz = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    Sxx += p[i].x * q[i].x; Sxy += p[i].x * q[i].y; Sxz += p[i].x * q[i].z;
    Syx += p[i].y * q[i].x; Syy += p[i].y * q[i].y; Syz += p[i].y * q[i].z;
    Szx += p[i].z * q[i].x; Szy += p[i].z * q[i].y; Szz += p[i].z * q[i].z;
  }
  std::array<std::array<double, 4>, 4> K{};
  K[0] = {Sxx + Syy + Szz, Syz - Szy, Szx - Sxz, Sxy - Syx};
  K[1] = {Syz - Szy, Sxx - Syy - Szz, Sxy + Syx, Szx + Sxz};
  K[2] = {Szx - Sxz, Sxy + Syx, -Sxx + Syy - Szz, Syz + Szy};
  K[3] = {Sxy - Syx, Szx + Sxz, Syz + Szy, -Sxx - Syy + Szz};
  return quat_to_mat(max_eigvec4(K));
}

}  // namespace

double Curve::arclength_defect() const {
  double worst = 0.0;
  for (std::size_t j = 0; j + 1 < points.size(); ++j) {
    const double d = dist(points[j + 1], points[j]) / grid.h;
    worst = std::max(worst, std::abs(d - 1.0));
  }
  return worst;
}

Curve arclength_resample(const std::vector<Vec3>& points, double target_h) {
  if (points.size() < 4) throw contract_error("arclength_resample: need at least 4 points");
  if (!(target_h > 0.0)) throw contract_error("arclength_resample: target_h must be > 0");
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (dist(points[i], points[i - 1]) == 0.0)
      throw contract_error("arclength_resample: degenerate input (duplicate consecutive points)");
  }
  const std::vector<double> s_in = chord_lengths(points);
  if (target_h >= s_in.back())
    throw resolution_error("arclength_resample: target_h >= total length (grid too coarse)");

  // First pass: dense chord-parametrized interpolation. On the dense polyline
  // chord length approximates arc length to (h_dense * curvature)^2 / 24.
  const std::size_t n_dense =
      std::max<std::size_t>(1024, 8 * static_cast<std::size_t>(s_in.back() / target_h) + 1);
  std::vector<double> s_dense(n_dense);
  for (std::size_t i = 0; i < n_dense; ++i)
    s_dense[i] = s_in.back() * static_cast<double>(i) / static_cast<double>(n_dense - 1);
  const std::vector<Vec3> dense = interp_at(s_in, points, s_dense);

  // Second pass: resample the dense polyline at uniform arc length.
  const std::vector<double> s_arc = chord_lengths(dense);
  const double total = s_arc.back();
  const auto n_out = static_cast<std::size_t>(std::floor(total / target_h + 1e-9)) + 1;
  std::vector<double> s_out(n_out);
  for (std::size_t i = 0; i < n_out; ++i) s_out[i] = target_h * static_cast<double>(i);
  std::vector<Vec3> out = interp_at(s_arc, dense, s_out);

  return Curve(Grid1D(0.0, target_h, n_out), std::move(out), true);
}

Curve curve_from_tangent(const Grid1D& grid, const std::vector<Vec3>& T, const Vec3& base_point,
                         std::size_t base_index) {
  if (T.size() != grid.n) throw contract_error("curve_from_tangent: tangent count != grid nodes");
  if (base_index >= grid.n) throw contract_error("curve_from_tangent: base_index out of range");
  for (const auto& v : T) {
    if (std::abs(norm(v) - 1.0) > 1e-8)
      throw contract_error("curve_from_tangent: tangent field is not unit");
  }
  std::vector<Vec3> pts(grid.n);
  pts[base_index] = base_point;
  const double h = grid.h;
  for (std::size_t j = base_index + 1; j < grid.n; ++j)
    pts[j] = pts[j - 1] + (T[j - 1] + T[j]) * (0.5 * h);
  for (std::size_t j = base_index; j-- > 0;)
    pts[j] = pts[j + 1] - (T[j] + T[j + 1]) * (0.5 * h);
  return Curve(grid, std::move(pts), true);
}

RigidFit fit_rigid_motion(const std::vector<Vec3>& p, const std::vector<Vec3>& q) {
  if (p.size() != q.size() || p.size() < 3) throw contract_error("fit_rigid_motion: bad point sets");
  Vec3 pc{0, 0, 0}, qc{0, 0, 0};
  for (std::size_t i = 0; i < p.size(); ++i) {
    pc += p[i];
    qc += q[i];
  }
  pc /= static_cast<double>(p.size());
  qc /= static_cast<double>(q.size());
  std::vector<Vec3> pd(p.size()), qd(q.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    pd[i] = p[i] - pc;
    qd[i] = q[i] - qc;
  }
  RigidFit fit;
  fit.R = best_rotation(pd, qd);
  fit.t = qc - fit.R.apply(pc);
  double ss = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Vec3 d = q[i] - (fit.R.apply(p[i]) + fit.t);
    ss += dot(d, d);
  }
  fit.residual = std::sqrt(ss / static_cast<double>(p.size()));
  return fit;
}

RotationFit fit_rotation(const std::vector<Vec3>& p, const std::vector<Vec3>& q) {
  if (p.size() != q.size() || p.size() < 2) throw contract_error("fit_rotation: bad point sets");
  RotationFit fit;
  fit.R = best_rotation(p, q);
  double ss = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Vec3 d = q[i] - fit.R.apply(p[i]);
    ss += dot(d, d);
  }
  fit.residual = std::sqrt(ss / static_cast<double>(p.size()));
  return fit;
}

}  // namespace filament
