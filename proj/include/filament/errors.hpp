#pragma once

#include <stdexcept>
#include <string>

namespace filament {

// Precondition / invariant violations on inputs (bad seeds, mismatched grids, ...).
class contract_error : public std::invalid_argument {
public:
  explicit contract_error(const std::string& what) : std::invalid_argument(what) {}
};

// Argument outside the mathematical domain of an operation (t <= 0, theta > pi, ...).
class domain_error : public std::domain_error {
public:
  explicit domain_error(const std::string& what) : std::domain_error(what) {}
};

// Requested evaluation point falls outside the stored data.
class range_error : public std::out_of_range {
public:
  explicit range_error(const std::string& what) : std::out_of_range(what) {}
};

// Discretization cannot resolve the requested computation (oscillation, step size).
class resolution_error : public std::runtime_error {
public:
  explicit resolution_error(const std::string& what) : std::runtime_error(what) {}
};

// Not enough usable data for a stable fit.
class fit_error : public std::runtime_error {
public:
  explicit fit_error(const std::string& what) : std::runtime_error(what) {}
};

// Config file / CLI problems. Carries the offending line when known.
class config_error : public std::runtime_error {
public:
  explicit config_error(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  int line() const { return line_; }

private:
  int line_ = 0;
};

}  // namespace filament
