#pragma once

#include <string>
#include <vector>

namespace filament {

// Power-law fit value ~ C * t^p on log-log axes, with a 95% confidence
// interval on the exponent from the OLS residuals.
struct RateFit {
  std::string quantity;
  std::vector<double> t;
  std::vector<double> value;
  double exponent = 0.0;
  double intercept = 0.0;      // log C
  double ci95 = 0.0;           // half-width of the 95% interval on the exponent
  double target = 0.0;
  bool degenerate = false;     // all values at round-off: rate vacuously exact

  bool has_ci() const { return ci95 > 0.0; }
};

// Fits log(value) vs log(t) over samples with value > floor. Throws fit_error
// when fewer than min_points usable samples remain.
RateFit fit_loglog(const std::string& quantity, const std::vector<double>& t,
                   const std::vector<double>& value, double target, double floor = 0.0,
                   std::size_t min_points = 5);

// Least-squares fit of y(t) = sum_k coef[k] * t^(k/4) (powers of t^{1/4});
// returns the coefficients, lowest order first. Used to extrapolate traces to
// t = 0 across many ladder times, which also averages out phase oscillation.
std::vector<double> fit_quarter_powers(const std::vector<double>& t, const std::vector<double>& y,
                                       int n_terms);

// General linear least squares: rows[i] holds the basis values at sample i.
// Returns the coefficient vector (normal equations, partial pivoting).
std::vector<double> solve_least_squares(const std::vector<std::vector<double>>& rows,
                                        const std::vector<double>& y);

}  // namespace filament
