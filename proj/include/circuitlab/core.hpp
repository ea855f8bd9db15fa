#pragma once

// Shared error types and small numerical helpers.

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace circuitlab {

inline constexpr const char* kVersion = "1.0.0";

/// A state or argument left the domain where the model is defined
/// (e.g. a share on the boundary of the unit interval).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A parameter set failed validation.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Shortest round-trip-safe decimal text for a double.
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  for (int prec = 6; prec < 17; ++prec) {
    char shorter[32];
    std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
    if (std::strtod(shorter, nullptr) == v) return shorter;
  }
  return buf;
}

/// An iterative method did not converge; carries the last residual.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what + " (last residual " + format_number(residual) + ")"),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// An operation is infeasible (ledger shortfall, unsupported configuration).
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double positive_part(double x) noexcept { return x > 0.0 ? x : 0.0; }

/// Standard normal distribution function.
inline double normal_cdf(double x) noexcept {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

inline double normal_pdf(double x) noexcept {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// Pairwise summation. The result depends only on the order of `v`, not on how
/// the values were produced, which keeps parallel aggregations reproducible.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ParameterError(message);
}

inline void require_finite(double x, const std::string& name) {
  if (!std::isfinite(x)) throw DomainError("non-finite value in " + name);
}

}  // namespace circuitlab
