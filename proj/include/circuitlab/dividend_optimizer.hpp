#pragma once

// Optimal dividends for equity following a drifted Brownian motion with two
// compound-Poisson exponential loss sources: stationary barrier from the
// roots of the symbol, and a time-marching solver for the variational
// inequality.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include "circuitlab/core.hpp"

namespace circuitlab::dividend {

struct EquityParams {
  double mu = 0.05;
  double sigma = 0.25;
  double R = 0.10;
  double lambda1 = 0.05, delta1 = 3.0;
  double lambda2 = 0.02, delta2 = 1.0;

  void validate() const {
    for (double v : {mu, sigma, R, lambda1, delta1, lambda2, delta2})
      if (!std::isfinite(v)) throw ParameterError("dividend: parameters must be finite");
    if (!(sigma > 0.0)) throw ParameterError("dividend: sigma must be > 0");
    if (lambda1 < 0.0 || lambda2 < 0.0) throw ParameterError("dividend: jump intensities must be >= 0");
    if (!(delta1 > 0.0) || !(delta2 > 0.0)) throw ParameterError("dividend: jump decay parameters must be > 0");
    if (!(R + lambda1 + lambda2 > 0.0)) throw ParameterError("dividend: R + lambda1 + lambda2 must be > 0");
  }
};

struct SymbolCoefficients {
  double a2, a1, a0;

  static SymbolCoefficients from(const EquityParams& p) {
    return {0.5 * p.sigma * p.sigma, p.mu, -(p.R + p.lambda1 + p.lambda2)};
  }
};

/// Ψ(ξ) = a2 ξ² + a1 ξ + a0 + λ1 δ1/(ξ+δ1) + λ2 δ2/(ξ+δ2).
inline double symbol(double xi, const EquityParams& p) {
  const auto c = SymbolCoefficients::from(p);
  if (xi + p.delta1 == 0.0) throw DomainError("dividend: symbol has a pole at xi = -delta1 = " + format_number(-p.delta1));
  if (xi + p.delta2 == 0.0) throw DomainError("dividend: symbol has a pole at xi = -delta2 = " + format_number(-p.delta2));
  return (c.a2 * xi + c.a1) * xi + c.a0 + p.lambda1 * p.delta1 / (xi + p.delta1) +
         p.lambda2 * p.delta2 / (xi + p.delta2);
}

inline double symbol_derivative(double xi, const EquityParams& p) {
  const auto c = SymbolCoefficients::from(p);
  const double u = xi + p.delta1, v = xi + p.delta2;
  return 2.0 * c.a2 * xi + c.a1 - p.lambda1 * p.delta1 / (u * u) - p.lambda2 * p.delta2 / (v * v);
}

struct JumpSource {
  double lambda, delta;
};

/// Jump sources with nonzero intensity; a zero-intensity source has no pole.
inline std::vector<JumpSource> active_jumps(const EquityParams& p) {
  std::vector<JumpSource> out;
  if (p.lambda1 > 0.0) out.push_back({p.lambda1, p.delta1});
  if (p.lambda2 > 0.0) out.push_back({p.lambda2, p.delta2});
  return out;
}

/// Ψ with denominators cleared: Π(ξ+δ_i)(a2ξ²+a1ξ+a0) + Σ λ_iδ_i Π_{k≠i}(ξ+δ_k),
/// over the active sources, lowest order first.
inline std::vector<double> symbol_polynomial(const EquityParams& p) {
  const auto c = SymbolCoefficients::from(p);
  const auto jumps = active_jumps(p);
  auto times_linear = [](const std::vector<double>& a, double root_shift) {
    std::vector<double> r(a.size() + 1, 0.0);
    for (std::size_t k = 0; k < a.size(); ++k) {
      r[k] += root_shift * a[k];
      r[k + 1] += a[k];
    }
    return r;
  };
  std::vector<double> poly{c.a0, c.a1, c.a2};
  for (const auto& j : jumps) poly = times_linear(poly, j.delta);
  for (std::size_t i = 0; i < jumps.size(); ++i) {
    std::vector<double> term{jumps[i].lambda * jumps[i].delta};
    for (std::size_t k = 0; k < jumps.size(); ++k)
      if (k != i) term = times_linear(term, jumps[k].delta);
    for (std::size_t k = 0; k < term.size(); ++k) poly[k] += term[k];
  }
  return poly;
}

/// The real roots of Ψ, ascending: two plus one per active jump source.
/// Eigenvalues of the companion matrix, polished by Newton on Ψ itself.
inline std::vector<double> symbol_roots(const EquityParams& p) {
  p.validate();
  const auto k = symbol_polynomial(p);
  const int m = static_cast<int>(k.size()) - 1;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(m, m);
  for (int i = 1; i < m; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < m; ++i) companion(i, m - 1) = -k[i] / k[m];
  const Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
  if (es.info() != Eigen::Success) throw ConvergenceError("dividend: companion eigenvalues failed", 0.0);
  const auto ev = es.eigenvalues();
  double scale = 0.0;
  for (int i = 0; i < m; ++i) scale = std::max(scale, std::abs(ev[i]));
  std::ostringstream complex_roots;
  bool all_real = true;
  for (int i = 0; i < m; ++i)
    if (std::abs(ev[i].imag()) > 1e-9 * std::max(1.0, scale)) {
      all_real = false;
      complex_roots << " " << format_number(ev[i].real()) << (ev[i].imag() < 0 ? "-" : "+")
                    << format_number(std::abs(ev[i].imag())) << "i";
    }
  if (!all_real) throw DomainError("dividend: symbol has complex roots:" + complex_roots.str());

  std::vector<double> roots;
  for (int i = 0; i < m; ++i) {
    double x = ev[i].real();
    for (const auto& j : active_jumps(p))
      if (std::abs(x + j.delta) <= 1e-12 * std::max(1.0, j.delta))
        throw DomainError("dividend: root coincides with the pole at " + format_number(-j.delta));
    double f = symbol(x, p);
    for (int it = 0; it < 50 && f != 0.0; ++it) {
      const double next = x - f / symbol_derivative(x, p);
      if (next + p.delta1 == 0.0 || next + p.delta2 == 0.0) break;
      const double fn = symbol(next, p);
      if (!(std::abs(fn) < std::abs(f))) break;
      x = next;
      f = fn;
    }
    roots.push_back(x);
  }
  std::sort(roots.begin(), roots.end());
  for (std::size_t i = 1; i < roots.size(); ++i)
    if (roots[i] - roots[i - 1] <= 1e-10 * std::max(1.0, std::abs(roots[i])))
      throw DomainError("dividend: symbol roots are not simple near " + format_number(roots[i]));
  return roots;
}

struct BarrierSolution {
  std::vector<double> roots;
  std::vector<double> C;
  double E_star;

  /// d^order/dE^order of Σ C_j e^{ξ_j E} (the continuation-region formula).
  double series(double E, int order = 0) const {
    double s = 0.0;
    for (std::size_t j = 0; j < roots.size(); ++j) s += C[j] * std::pow(roots[j], order) * std::exp(roots[j] * E);
    return s;
  }
  double value(double E) const {
    if (E < 0.0) throw DomainError("dividend: equity must be >= 0");
    return E <= E_star ? series(E) : E + series(E_star) - E_star;
  }
  double derivative(double E) const { return E <= E_star ? series(E, 1) : 1.0; }
};

namespace detail {

// Rows: V(0) = 0, one no-pole condition per active jump source, V'(E) = 1.
inline std::vector<double> barrier_coefficients(const std::vector<double>& xi, const EquityParams& p, double E) {
  const auto jumps = active_jumps(p);
  const int m = static_cast<int>(xi.size());
  Eigen::MatrixXd M(m, m);
  for (int j = 0; j < m; ++j) {
    M(0, j) = 1.0;
    for (std::size_t i = 0; i < jumps.size(); ++i) M(1 + i, j) = 1.0 / (xi[j] + jumps[i].delta);
    M(m - 1, j) = xi[j] * std::exp(xi[j] * E);
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (!lu.isInvertible()) throw DomainError("dividend: barrier system is singular at E* = " + format_number(E));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  rhs[m - 1] = 1.0;
  const Eigen::VectorXd c = lu.solve(rhs);
  return {c.data(), c.data() + m};
}

inline double curvature_residual(const std::vector<double>& xi, const EquityParams& p, double E) {
  const auto c = barrier_coefficients(xi, p, E);
  double r = 0.0;
  for (std::size_t j = 0; j < xi.size(); ++j) r += c[j] * xi[j] * xi[j] * std::exp(xi[j] * E);
  return r;
}

}  // namespace detail

/// Solves V(0) = 0, L(V) = 0, V'(E*) = 1, V''(E*) = 0 for the coefficients and E*.
inline BarrierSolution stationary_barrier(const EquityParams& p) {
  const auto xi = symbol_roots(p);
  constexpr int kScan = 400;
  constexpr double lo = 1e-3, hi = 50.0;
  std::vector<std::pair<double, double>> scan;
  double a = lo, fa = detail::curvature_residual(xi, p, lo);
  scan.emplace_back(a, fa);
  for (int k = 1; k <= kScan; ++k) {
    const double b = lo * std::pow(hi / lo, double(k) / kScan);
    const double fb = detail::curvature_residual(xi, p, b);
    scan.emplace_back(b, fb);
    if (fa == 0.0 || (fa < 0.0) != (fb < 0.0)) {
      double E = a;
      if (fa != 0.0) {
        boost::uintmax_t iters = 200;
        const auto tol = [](double x, double y) { return std::abs(x - y) <= 1e-12 * std::max(1.0, std::abs(x)); };
        const auto br = boost::math::tools::toms748_solve(
            [&](double e) { return detail::curvature_residual(xi, p, e); }, a, b, fa, fb, tol, iters);
        E = 0.5 * (br.first + br.second);
      }
      BarrierSolution s{xi, detail::barrier_coefficients(xi, p, E), E};
      if (!(s.E_star > 0.0)) throw DomainError("dividend: barrier must be positive");
      return s;
    }
    a = b;
    fa = fb;
  }
  std::ostringstream os;
  os << "dividend: no sign change of the curvature residual on [" << lo << ", " << hi << "]; samples";
  for (std::size_t k = 0; k < scan.size(); k += 50) os << " (" << format_number(scan[k].first) << ", "
                                                        << format_number(scan[k].second) << ")";
  throw ConvergenceError(os.str(), scan.back().second);
}

/// δ ∫_0^E V(j) e^{−δ(E−j)} dj on a uniform grid, exact for piecewise-linear V.
inline std::vector<double> jump_integral(const std::vector<double>& V, double dE, double delta) {
  std::vector<double> out(V.size(), 0.0);
  const double decay = std::exp(-delta * dE);
  const double w1 = -std::expm1(-delta * dE);  // δ∫_0^h e^{−δ(h−s)} ds
  const double w2 = (dE - w1 / delta) / dE;    // δ∫_0^h (s/h) e^{−δ(h−s)} ds
  for (std::size_t k = 1; k < V.size(); ++k)
    out[k] = decay * out[k - 1] + V[k - 1] * w1 + (V[k] - V[k - 1]) * w2;
  return out;
}

struct SolverGrid {
  std::size_t points = 2000;
  double E_max = 0.0;  // 0: ten times the stationary barrier
  double dt = 0.005;
  double tau_max = 150.0;
  std::vector<double> snapshots;  // τ values to keep besides 0 and tau_max
  double stability_ratio = 1e6;   // warn when dt/dE² exceeds this
};

struct EquityValueGrid {
  std::vector<double> E;
  std::vector<double> taus;                 // snapshot times
  std::vector<std::vector<double>> values;  // V per snapshot
  std::vector<double> boundary;             // free boundary per snapshot
  std::vector<double> step_taus, step_boundary;  // free boundary after every step
  std::vector<double> I1, I2;               // jump integrals of the final slice
  std::vector<std::string> warnings;

  const std::vector<double>& final_values() const { return values.back(); }
};

namespace detail {


}  // namespace detail

/// Marches V_τ = a2 V_EE + a1 V_E + a0 V + λ1 I1 + λ2 I2 from V(0, E) = E with
/// Crank–Nicolson for the local part, explicit jump integrals, and projection
/// onto V_E >= 1 after each step. V(τ, 0) = 0 and V_E = 1 at E_max.
inline EquityValueGrid solve_variational(const EquityParams& p, const SolverGrid& g) {
  p.validate();
  if (g.points < 3) throw ParameterError("dividend: grid needs at least 3 points");
  if (!(g.dt > 0.0) || !(g.tau_max > 0.0)) throw ParameterError("dividend: dt and tau_max must be > 0");
  EquityValueGrid out;
  double E_max = g.E_max;
  if (E_max == 0.0) {
    try {
      E_max = 10.0 * stationary_barrier(p).E_star;
    } catch (const std::exception&) {
      E_max = 10.0;
      out.warnings.push_back("no stationary barrier estimate; E_max set to 10");
    }
  }
  if (!(E_max > 0.0)) throw ParameterError("dividend: E_max must be > 0");
  const std::size_t n = g.points - 1;  // last index
  const double dE = E_max / n;
  if (g.dt / (dE * dE) > g.stability_ratio)
    out.warnings.push_back("dt/dE^2 = " + format_number(g.dt / (dE * dE)) + " exceeds " +
                           format_number(g.stability_ratio));
  const auto c = SymbolCoefficients::from(p);

  out.E.resize(g.points);
  for (std::size_t k = 0; k <= n; ++k) out.E[k] = k * dE;
  std::vector<double> V = out.E;

  // tridiagonal operator A on nodes 1..n; node n uses the ghost V_{n+1} = V_{n-1} + 2dE
  const double lo = c.a2 / (dE * dE) - c.a1 / (2 * dE);
  const double di = -2.0 * c.a2 / (dE * dE) + c.a0;
  const double up = c.a2 / (dE * dE) + c.a1 / (2 * dE);
  const double ghost = up * 2.0 * dE;
  auto apply = [&](const std::vector<double>& v, std::size_t k) {
    if (k == n) return (lo + up) * v[n - 1] + di * v[n] + ghost;
    return lo * v[k - 1] + di * v[k] + up * v[k + 1];
  };
  // (I − dt/2 A) factorized once: sub/diag/super for rows 1..n
  const auto steps = static_cast<std::size_t>(std::ceil(g.tau_max / g.dt - 1e-9));
  const double dt = g.tau_max / steps;
  const double h = 0.5 * dt;
  std::vector<double> cp(n + 1), dp(n + 1), sub(n + 1, -h * lo), diag(n + 1, 1.0 - h * di), sup(n + 1, -h * up);
  sub[n] = -h * (lo + up);
  cp[1] = sup[1] / diag[1];
  for (std::size_t k = 2; k <= n; ++k) cp[k] = sup[k] / (diag[k] - sub[k] * cp[k - 1]);

  std::vector<double> snaps = g.snapshots;
  snaps.erase(std::remove_if(snaps.begin(), snaps.end(), [&](double t) { return !(t > 0.0 && t < g.tau_max); }),
              snaps.end());
  snaps.push_back(g.tau_max);
  std::sort(snaps.begin(), snaps.end());
  snaps.erase(std::unique(snaps.begin(), snaps.end()), snaps.end());
  out.taus.push_back(0.0);
  out.values.push_back(V);
  out.boundary.push_back(0.0);

  std::vector<double> rhs(n + 1), next(n + 1);
  std::size_t snap = 0, reversals = 0;
  long last_move = 0;
  double prev_boundary = 0.0;
  for (std::size_t s = 1; s <= steps; ++s) {
    const auto I1 = jump_integral(V, dE, p.delta1);
    const auto I2 = jump_integral(V, dE, p.delta2);
    for (std::size_t k = 1; k <= n; ++k)
      rhs[k] = V[k] + h * apply(V, k) + (k == n ? h * ghost : 0.0) + dt * (p.lambda1 * I1[k] + p.lambda2 * I2[k]);
    dp[1] = rhs[1] / diag[1];
    for (std::size_t k = 2; k <= n; ++k) dp[k] = (rhs[k] - sub[k] * dp[k - 1]) / (diag[k] - sub[k] * cp[k - 1]);
    next[n] = dp[n];
    for (std::size_t k = n - 1; k >= 1; --k) next[k] = dp[k] - cp[k] * next[k + 1];
    V[0] = 0.0;
    std::size_t exercise = n + 1;  // lowest node of the projected run ending at E_max
    for (std::size_t k = 1; k <= n; ++k) {
      if (next[k] < V[k - 1] + dE) {
        V[k] = V[k - 1] + dE;
        if (exercise > n) exercise = k;
      } else {
        V[k] = next[k];
        exercise = n + 1;
      }
    }
    const double tau = s * dt;

    const double b = exercise > n ? E_max : (exercise - 1) * dE;
    out.step_taus.push_back(tau);
    out.step_boundary.push_back(b);
    const long move = b > prev_boundary ? 1 : (b < prev_boundary ? -1 : 0);
    if (move != 0) {
      if (last_move != 0 && move != last_move) ++reversals;
      last_move = move;
    }
    prev_boundary = b;
    if (reversals > 100 && reversals > s / 4)
      throw ConvergenceError("dividend: free boundary oscillates; refine the grid", double(reversals));
    for (double v : {V[n], V[n / 2]})
      if (!std::isfinite(v)) throw DomainError("dividend: solution became non-finite at tau=" + format_number(tau));
    if (snap < snaps.size() && tau >= snaps[snap] - 1e-9 * dt) {
      out.taus.push_back(tau);
      out.values.push_back(V);
      out.boundary.push_back(b);
      ++snap;
    }
  }
  out.I1 = jump_integral(V, dE, p.delta1);
  out.I2 = jump_integral(V, dE, p.delta2);
  return out;
}

}  // namespace circuitlab::dividend
