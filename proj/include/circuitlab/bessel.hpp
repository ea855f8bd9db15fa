#pragma once

// Exponentially scaled modified Bessel function e^{-x} I_nu(x) for real nu >= 0.

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "circuitlab/core.hpp"

namespace circuitlab::bessel {

namespace detail {

constexpr int kDebyeTerms = 14;

// Coefficients of the Debye polynomials u_k(t), u_0 = 1.
inline const std::vector<std::vector<double>>& debye_polynomials() {
  static const auto polys = [] {
    std::vector<std::vector<double>> u{{1.0}};
    for (int k = 0; k + 1 < kDebyeTerms; ++k) {
      const auto& p = u.back();
      std::vector<double> q(p.size() + 3, 0.0);
      // ½ t²(1−t²) u'
      for (std::size_t j = 1; j < p.size(); ++j) {
        q[j + 1] += 0.5 * j * p[j];
        q[j + 3] -= 0.5 * j * p[j];
      }
      // ⅛ ∫_0^t (1−5s²) u(s) ds
      for (std::size_t j = 0; j < p.size(); ++j) {
        q[j + 1] += p[j] / (8.0 * (j + 1));
        q[j + 3] -= 5.0 * p[j] / (8.0 * (j + 3));
      }
      u.push_back(std::move(q));
    }
    return u;
  }();
  return polys;
}

inline double series(double nu, double x) {
  const double y = 0.25 * x * x;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 1000; ++k) {
    term *= y / (k * (nu + k));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return std::exp(nu * std::log(0.5 * x) - std::lgamma(nu + 1.0) - x) * sum;
}

inline double debye(double nu, double x) {
  const double z = x / nu;
  const double s = std::sqrt(1.0 + z * z);
  const double t = 1.0 / s;
  const double expo = nu * (1.0 / (s + z) + std::log(z / (1.0 + s)));
  const auto& u = debye_polynomials();
  double sum = 0.0, scale = 1.0;
  for (const auto& p : u) {
    double v = 0.0;
    for (std::size_t j = p.size(); j-- > 0;) v = v * t + p[j];
    sum += v * scale;
    scale /= nu;
  }
  return std::exp(expo) * sum / std::sqrt(2.0 * std::numbers::pi * nu * s);
}

inline double hankel(double nu, double x) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 500; ++k) {
    const double next = -term * (mu - (2.0 * k - 1) * (2.0 * k - 1)) / (8.0 * k * x);
    if (std::abs(next) >= std::abs(term) && k > 1) break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

// Continued fractions for large x with moderate order: CF1 gives I'_nu/I_nu,
// downward recurrence reaches |mu| <= 1/2, Steed's CF2 gives scaled K_mu and
// K_{mu+1}, and the Wronskian closes the system.
inline double steed(double nu, double x) {
  constexpr double eps = 1e-16;
  const int nl = static_cast<int>(nu + 0.5);
  const double xmu = nu - nl;
  const double xi = 1.0 / x, xi2 = 2.0 * xi;

  double h = nu * xi;
  if (h < 1e-300) h = 1e-300;
  double b = xi2 * nu, d = 0.0, c = h;
  int i = 1;
  for (; i < 100000; ++i) {
    b += xi2;
    d = 1.0 / (b + d);
    c = b + 1.0 / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  if (i == 100000) throw ConvergenceError("bessel: CF1 did not converge", h);

  double ril = 1.0, ripl = h * ril;
  const double ril1 = ril;
  double fact = nu * xi;
  for (int l = nl; l >= 1; --l) {
    const double ritemp = fact * ril + ripl;
    fact -= xi;
    ripl = fact * ritemp + ril;
    ril = ritemp;
  }
  const double f = ripl / ril;

  b = 2.0 * (1.0 + x);
  d = 1.0 / b;
  double delh = d;
  h = d;
  double q1 = 0.0, q2 = 1.0;
  const double a1 = 0.25 - xmu * xmu;
  double q = a1;
  c = a1;
  double a = -a1;
  double s = 1.0 + q * delh;
  for (i = 2; i < 100000; ++i) {
    a -= 2 * (i - 1);
    c = -a * c / i;
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < eps) break;
  }
  if (i == 100000) throw ConvergenceError("bessel: CF2 did not converge", s);
  h = a1 * h;
  const double rkmu = std::sqrt(std::numbers::pi / (2.0 * x)) / s;
  const double rk1 = rkmu * (xmu + x + 0.5 - h) * xi;
  const double rkmup = xmu * xi * rkmu - rk1;
  const double rimu = xi / (f * rkmu - rkmup);
  return rimu * ril1 / ril;
}

}  // namespace detail

/// e^{-x} I_nu(x).
inline double scaled_i(double nu, double x) {
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw DomainError("bessel: order must be finite and >= 0");
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("bessel: argument must be finite and >= 0");
  if (x == 0.0) return nu == 0.0 ? 1.0 : 0.0;
  if (nu >= 30.0) return detail::debye(nu, x);
  if (x <= 60.0) return detail::series(nu, x);
  if (x >= 2.0 * nu * nu) return detail::hankel(nu, x);
  return detail::steed(nu, x);
}

}  // namespace circuitlab::bessel
