#pragma once

// Globally adaptive Gauss–Kronrod (7/15) quadrature, plus a nested 2D form.

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

#include "circuitlab/core.hpp"

namespace circuitlab::quadrature {

struct Result {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
  bool converged = true;
};

struct Tolerance {
  double absolute = 1e-10;
  double relative = 1e-10;
  std::size_t max_intervals = 2000;
};

namespace detail {

constexpr std::array<double, 8> kNodes{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrod{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGauss{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Piece {
  double a, b, value, error;
  bool operator<(const Piece& o) const { return error < o.error; }
};

template <class F>
Piece gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double k = fc * kKronrod[7], g = fc * kGauss[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kNodes[j];
    const double s = f(c - dx) + f(c + dx);
    k += kKronrod[j] * s;
    if (j % 2 == 1) g += kGauss[j / 2] * s;
  }
  return {a, b, k * h, std::abs((k - g) * h)};
}

}  // namespace detail

/// ∫_a^b f. Splits the interval with the largest error estimate until the
/// total estimate is within max(absolute, relative·|value|).
template <class F>
Result integrate(F&& f, double a, double b, const Tolerance& tol = {}) {
  Result r;
  if (a == b) return r;
  if (!std::isfinite(a) || !std::isfinite(b)) throw ParameterError("quadrature: limits must be finite");
  std::priority_queue<detail::Piece> heap;
  auto first = detail::gk15(f, a, b);
  r.evaluations = 15;
  heap.push(first);
  double value = first.value, error = first.error;
  while (error > std::max(tol.absolute, tol.relative * std::abs(value))) {
    if (heap.size() >= tol.max_intervals) {
      r.converged = false;
      break;
    }
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const auto left = detail::gk15(f, worst.a, mid);
    const auto right = detail::gk15(f, mid, worst.b);
    r.evaluations += 30;
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // re-sum to shed the drift of the running updates
  value = 0.0;
  error = 0.0;
  std::vector<double> vals, errs;
  while (!heap.empty()) {
    vals.push_back(heap.top().value);
    errs.push_back(heap.top().error);
    heap.pop();
  }
  r.value = pairwise_sum(vals);
  r.error = pairwise_sum(errs);
  return r;
}

/// ∫_{ax}^{bx} ∫_{ay(x)}^{by(x)} f(x, y) dy dx; the inner tolerance is a
/// tenth of the outer one relative to the outer span.
template <class F, class Lo, class Hi>
Result integrate_2d(F&& f, double ax, double bx, Lo&& ay, Hi&& by, const Tolerance& tol = {}) {
  Tolerance inner = tol;
  const double span = std::max(std::abs(bx - ax), 1e-300);
  inner.absolute = 0.1 * tol.absolute / span;
  std::size_t evals = 0;
  bool ok = true;
  double inner_error = 0.0;
  auto outer = [&](double x) {
    const double lo = ay(x), hi = by(x);
    if (!(hi > lo)) return 0.0;
    const auto r = integrate([&](double y) { return f(x, y); }, lo, hi, inner);
    evals += r.evaluations;
    ok = ok && r.converged;
    inner_error = std::max(inner_error, r.error);
    return r.value;
  };
  auto r = integrate(outer, ax, bx, tol);
  r.evaluations = evals;
  r.converged = r.converged && ok;
  r.error += inner_error * span;
  return r;
}

}  // namespace circuitlab::quadrature
