#include "filament/ratefit.hpp"

#include <cmath>

#include "filament/errors.hpp"

namespace filament {

namespace {

// Two-sided 97.5% Student-t quantiles for small dof; 1.96 beyond the table.
double t_quantile_975(std::size_t dof) {
  static const double table[] = {0.0,   12.71, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365,
                                 2.306, 2.262, 2.228, 2.201, 2.179, 2.160, 2.145, 2.131,
                                 2.120, 2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069,
                                 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  if (dof == 0) return 0.0;
  if (dof <= 30) return table[dof];
  return 1.96;
}

// Solves a small dense symmetric system by Gaussian elimination with pivoting.
std::vector<double> solve_dense(std::vector<std::vector<double>> A, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    std::swap(A[col], A[piv]);
    std::swap(b[col], b[piv]);
    if (A[col][col] == 0.0) throw fit_error("singular least-squares system");
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = A[r][col] / A[col][col];
      for (std::size_t c = col; c < n; ++c) A[r][c] -= f * A[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t c = r + 1; c < n; ++c) s -= A[r][c] * x[c];
    x[r] = s / A[r][r];
  }
  return x;
}

}  // namespace

RateFit fit_loglog(const std::string& quantity, const std::vector<double>& t,
                   const std::vector<double>& value, double target, double floor,
                   std::size_t min_points) {
  if (t.size() != value.size()) throw fit_error("fit_loglog: length mismatch");
  RateFit fit;
  fit.quantity = quantity;
  fit.t = t;
  fit.value = value;
  fit.target = target;

  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] > 0.0 && value[i] > floor && std::isfinite(value[i])) {
      lx.push_back(std::log(t[i]));
      ly.push_back(std::log(value[i]));
    }
  }
  if (lx.empty()) {
    // everything at round-off: report as exact
    fit.degenerate = true;
    return fit;
  }
  if (lx.size() < min_points)
    throw fit_error("fit_loglog(" + quantity + "): only " + std::to_string(lx.size()) +
                    " usable points");

  const auto m = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double denom = m * sxx - sx * sx;
  if (denom <= 0.0) throw fit_error("fit_loglog(" + quantity + "): degenerate abscissae");
  fit.exponent = (m * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.exponent * sx) / m;

  if (lx.size() > 2) {
    double ss = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      const double r = ly[i] - (fit.intercept + fit.exponent * lx[i]);
      ss += r * r;
    }
    const double var_slope = ss / (m - 2.0) * m / denom;
    fit.ci95 = t_quantile_975(lx.size() - 2) * std::sqrt(var_slope);
  }
  return fit;
}

std::vector<double> solve_least_squares(const std::vector<std::vector<double>>& rows,
                                        const std::vector<double>& y) {
  if (rows.size() != y.size() || rows.empty()) throw fit_error("solve_least_squares: bad input");
  const std::size_t k = rows.front().size();
  if (rows.size() < k) throw fit_error("solve_least_squares: underdetermined");
  std::vector<std::vector<double>> ata(k, std::vector<double>(k, 0.0));
  std::vector<double> atb(k, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t a = 0; a < k; ++a) {
      atb[a] += rows[i][a] * y[i];
      for (std::size_t b = 0; b < k; ++b) ata[a][b] += rows[i][a] * rows[i][b];
    }
  }
  return solve_dense(std::move(ata), std::move(atb));
}

std::vector<double> fit_quarter_powers(const std::vector<double>& t, const std::vector<double>& y,
                                       int n_terms) {
  if (t.size() != y.size() || t.size() < static_cast<std::size_t>(n_terms))
    throw fit_error("fit_quarter_powers: not enough samples");
  const int k = n_terms;
  std::vector<std::vector<double>> ata(k, std::vector<double>(k, 0.0));
  std::vector<double> atb(k, 0.0);
  std::vector<double> basis(k);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double q = std::pow(t[i], 0.25);
    basis[0] = 1.0;
    for (int a = 1; a < k; ++a) basis[a] = basis[a - 1] * q;
    for (int a = 0; a < k; ++a) {
      atb[a] += basis[a] * y[i];
      for (int b = 0; b < k; ++b) ata[a][b] += basis[a] * basis[b];
    }
  }
  return solve_dense(std::move(ata), std::move(atb));
}

}  // namespace filament
