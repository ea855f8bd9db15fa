#pragma once

// Two-bank semi-analytic survival probabilities: 1D barrier survival, the
// absorbed Green's function of correlated 2D Brownian motion in a quadrant,
// and quadrature over the terminal settlement domains.

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "circuitlab/bessel.hpp"
#include "circuitlab/core.hpp"
#include "circuitlab/quadrature.hpp"

namespace circuitlab::wedge {

struct SurvivalValue {
  double probability;
  bool at_boundary;
};

/// P(no hit of m_lo on [0,τ] and X(τ) > m_eq) for dX = ξ dt + dW, X(0) = x0.
inline SurvivalValue survival_1d(double x0, double xi, double m_lo, double m_eq, double tau) {
  if (!(tau >= 0.0)) throw ParameterError("wedge: survival horizon must be >= 0");
  if (x0 <= m_lo) return {0.0, true};
  m_eq = std::max(m_eq, m_lo);
  if (tau == 0.0) return {x0 > m_eq ? 1.0 : 0.0, false};
  const double st = std::sqrt(tau);
  const double direct = normal_cdf(-(m_eq - x0 - xi * tau) / st);
  const double image_n = normal_cdf(-(m_eq + x0 - 2.0 * m_lo - xi * tau) / st);
  const double image = image_n == 0.0 ? 0.0 : std::exp(-2.0 * xi * (x0 - m_lo)) * image_n;
  return {std::clamp(direct - image, 0.0, 1.0), false};
}

struct Polar {
  double R, phi;
};

struct WedgeContext {
  double rho = 0.0;
  double rho_bar = 1.0;
  double varpi = std::numbers::pi / 2;
  std::array<double, 2> xi{0.0, 0.0};
  std::array<double, 2> theta{0.0, 0.0};
  double theta_xi = 0.0;

  static WedgeContext make(double rho, std::array<double, 2> xi) {
    if (!(std::abs(rho) < 1.0)) throw ParameterError("wedge: correlation must lie in (-1,1)");
    WedgeContext c;
    c.rho = rho;
    c.rho_bar = std::sqrt(1.0 - rho * rho);
    c.varpi = std::acos(-rho);
    c.xi = xi;
    const double r2 = c.rho_bar * c.rho_bar;
    c.theta = {(xi[0] - rho * xi[1]) / r2, (xi[1] - rho * xi[0]) / r2};
    c.theta_xi = c.theta[0] * xi[0] + c.theta[1] * xi[1];
    return c;
  }

  double nu(std::size_t n) const { return n * std::numbers::pi / varpi; }

  Polar polar(std::array<double, 2> x) const {
    const double u = (x[1] - rho * x[0]) / rho_bar, v = x[0];
    return {std::hypot(u, v), std::atan2(v, u)};
  }

  /// Distance from x to the absorbing rays in whitened coordinates.
  double boundary_distance(std::array<double, 2> x) const {
    const auto p = polar(x);
    auto to_ray = [&](double angle) { return angle < std::numbers::pi / 2 ? p.R * std::sin(angle) : p.R; };
    return std::min(to_ray(p.phi), to_ray(varpi - p.phi));
  }
};

struct SeriesOptions {
  std::size_t n_terms = 20000;
  double tolerance = 1e-15;
};

namespace detail {

// Σ_n e^{-z} I_{ν_n}(z) · weight(ν_n) · phase(n, ν_n), |phase| ≤ 1.
template <class Weight, class Phase>
double bessel_series(double z, const WedgeContext& c, const SeriesOptions& opt, Weight weight, Phase phase) {
  double sum = 0.0, max_bound = 0.0, prev = INFINITY, bound = 0.0;
  for (std::size_t n = 1; n <= opt.n_terms; ++n) {
    const double nu = c.nu(n);
    bound = bessel::scaled_i(nu, z) * weight(nu);
    sum += bound * phase(n, nu);
    max_bound = std::max(max_bound, bound);
    if (bound <= opt.tolerance * max_bound && bound <= prev) return sum;
    if (max_bound == 0.0) return 0.0;
    prev = bound;
  }
  throw ConvergenceError("wedge: Bessel series not converged after " + std::to_string(opt.n_terms) +
                             " terms, last term " + format_number(bound),
                         bound);
}

constexpr double kUnderflow = -745.0;
// Beyond this many e-folds the chance of reaching either ray is negligible
// and the free-space law is used instead of the Bessel series.
constexpr double kFarField = 50.0;

inline bool far_from_rays(double t, std::array<double, 2> x0, const WedgeContext& c) {
  const double d = c.boundary_distance(x0);
  return d * d / (2.0 * t) > kFarField;
}

}  // namespace detail

/// Transition density at X after scaled time t from X0, absorbed on both axes.
inline double wedge_green(double t, std::array<double, 2> x, std::array<double, 2> x0, const WedgeContext& c,
                          const SeriesOptions& opt = {}) {
  if (!(t > 0.0)) throw ParameterError("wedge: time must be > 0");
  if (!(x0[0] > 0.0 && x0[1] > 0.0)) throw DomainError("wedge: start point must be interior");
  if (!(x[0] > 0.0 && x[1] > 0.0)) return 0.0;
  if (detail::far_from_rays(t, x0, c)) {
    const double y1 = x[0] - x0[0] - c.xi[0] * t, y2 = x[1] - x0[1] - c.xi[1] * t;
    const double q = (y1 * y1 - 2.0 * c.rho * y1 * y2 + y2 * y2) / (c.rho_bar * c.rho_bar);
    return std::exp(-q / (2.0 * t)) / (2.0 * std::numbers::pi * c.rho_bar * t);
  }
  const auto p = c.polar(x), p0 = c.polar(x0);
  const double dr = p.R - p0.R;
  const double expo = c.theta[0] * (x[0] - x0[0]) + c.theta[1] * (x[1] - x0[1]) - 0.5 * c.theta_xi * t -
                      dr * dr / (2.0 * t);
  if (expo < detail::kUnderflow) return 0.0;
  const double s = detail::bessel_series(
      p.R * p0.R / t, c, opt, [](double) { return 1.0; },
      [&](std::size_t, double nu) { return std::sin(nu * p.phi) * std::sin(nu * p0.phi); });
  return std::exp(expo) * 2.0 * s / (c.rho_bar * c.varpi * t);
}

/// Outward probability flux density through an absorbing face at scaled time
/// t. face = 1 is {X1 = 0} parametrized by X2 = y; face = 2 is {X2 = 0}
/// parametrized by X1 = y.
inline double boundary_flux(double t, double y, int face, std::array<double, 2> x0, const WedgeContext& c,
                            const SeriesOptions& opt = {}) {
  if (face != 1 && face != 2) throw ParameterError("wedge: face must be 1 or 2");
  if (!(t > 0.0)) throw ParameterError("wedge: time must be > 0");
  if (!(x0[0] > 0.0 && x0[1] > 0.0)) throw DomainError("wedge: start point must be interior");
  if (!(y > 0.0) || detail::far_from_rays(t, x0, c)) return 0.0;
  const auto p0 = c.polar(x0);
  const double R = y / c.rho_bar;
  const double dr = R - p0.R;
  const double tilt = face == 2 ? c.theta[0] * y : c.theta[1] * y;
  const double expo =
      tilt - c.theta[0] * x0[0] - c.theta[1] * x0[1] - 0.5 * c.theta_xi * t - dr * dr / (2.0 * t);
  if (expo < detail::kUnderflow) return 0.0;
  const double s = detail::bessel_series(
      R * p0.R / t, c, opt, [](double nu) { return nu; },
      [&](std::size_t n, double nu) {
        const double sign = face == 1 ? 1.0 : (n % 2 == 1 ? 1.0 : -1.0);
        return sign * std::sin(nu * p0.phi);
      });
  return std::exp(expo) * s / (c.varpi * t * y);
}

struct TwoBankParams {
  std::array<double, 2> L{50.0, 60.0};
  double L12 = 10.0;  // liability of bank 1 to bank 2
  double L21 = 20.0;
  std::array<double, 2> R{0.4, 0.4};
  std::array<double, 2> sigma{0.4, 0.4};
  double rho = 0.0;
};

enum class Domain { D11, D10, D01, D00, Interior };

inline const char* to_string(Domain d) {
  switch (d) {
    case Domain::D11: return "D11";
    case Domain::D10: return "D10";
    case Domain::D01: return "D01";
    case Domain::D00: return "D00";
    case Domain::Interior: return "interior";
  }
  return "?";
}

/// Boundary levels, scalings and settlement domains for two banks whose
/// assets and liabilities grow at the same rate.
class TwoBankTerminalDomains {
 public:
  explicit TwoBankTerminalDomains(const TwoBankParams& p) : p_(p) {
    for (int i = 0; i < 2; ++i) {
      if (!(p.L[i] >= 0.0) || !(p.R[i] >= 0.0 && p.R[i] <= 1.0) || !(p.sigma[i] > 0.0))
        throw ParameterError("wedge: bank " + std::to_string(i + 1) + " needs L >= 0, R in [0,1], sigma > 0");
    }
    if (!(p.L12 >= 0.0 && p.L21 >= 0.0)) throw ParameterError("wedge: mutual liabilities must be >= 0");
    for (int i = 0; i < 2; ++i) {
      const int j = 1 - i;
      const double owes = mutual(i, j), owed = mutual(j, i);
      lambda_lo[i] = p.R[i] * (p.L[i] + owes) - owed;
      lambda_eq[i] = p.L[i] + owes - owed;
      tilde_lo[i] = p.R[i] * (p.L[i] + owes - p.R[j] * owed);
      tilde_eq[i] = p.L[i] + owes - p.R[j] * owed;
    }
    delta = p.L[0] * p.L[1] + p.L[0] * p.L21 + p.L[1] * p.L12;
    Sigma = std::sqrt(p.sigma[0] * p.sigma[1]);
    for (int i = 0; i < 2; ++i) {
      zeta[i] = Sigma / p.sigma[i];
      xi[i] = -p.sigma[i] / (2.0 * Sigma);
      m_eq[i] = to_x(i, lambda_eq[i]);
      tilde_m_lo[i] = to_x(i, tilde_lo[i]);
      tilde_m_eq[i] = to_x(i, tilde_eq[i]);
    }
  }

  const TwoBankParams& params() const { return p_; }
  double mutual(int i, int j) const { return i == 0 && j == 1 ? p_.L12 : (i == 1 && j == 0 ? p_.L21 : 0.0); }

  double to_x(int i, double assets) const {
    return assets > 0.0 ? zeta[i] * std::log(assets / lambda_lo[i]) : -INFINITY;
  }
  double to_assets(int i, double x) const { return lambda_lo[i] * std::exp(x / zeta[i]); }
  double scaled_time(double t) const { return Sigma * Sigma * t; }

  /// Asset level of bank i above which it stays solvent at settlement while
  /// the other bank, holding `other_assets`, defaults.
  double settlement_threshold(int i, double other_assets) const {
    const int j = 1 - i;
    return (delta - mutual(j, i) * other_assets) / (p_.L[j] + mutual(j, i));
  }

  /// Θ_i: the curvilinear boundary of D(δ_i1, δ_i2) in scaled coordinates.
  double theta_curve(int i, double x_other) const {
    return to_x(i, settlement_threshold(i, to_assets(1 - i, x_other)));
  }

  Domain classify(double a1, double a2) const {
    const std::array<double, 2> a{a1, a2};
    if (a1 <= std::max(lambda_lo[0], 0.0) || a2 <= std::max(lambda_lo[1], 0.0)) return Domain::Interior;
    if (a1 >= lambda_eq[0] && a2 >= lambda_eq[1]) return Domain::D11;
    for (int i = 0; i < 2; ++i) {
      const int j = 1 - i;
      if (a[j] < lambda_eq[j] && a[i] >= settlement_threshold(i, a[j])) return i == 0 ? Domain::D10 : Domain::D01;
    }
    return Domain::D00;
  }

  /// Scaled coordinates need positive interior levels.
  void require_positive_levels() const {
    for (int i = 0; i < 2; ++i)
      if (!(lambda_lo[i] > 0.0))
        throw ParameterError("wedge: bank " + std::to_string(i + 1) +
                             " interior default level must be positive, got " + format_number(lambda_lo[i]));
  }

  WedgeContext context() const {
    require_positive_levels();
    return WedgeContext::make(p_.rho, xi);
  }

  std::array<double, 2> lambda_lo{}, lambda_eq{}, tilde_lo{}, tilde_eq{};
  std::array<double, 2> zeta{}, xi{}, m_eq{}, tilde_m_lo{}, tilde_m_eq{};
  double delta = 0.0, Sigma = 0.0;

 private:
  TwoBankParams p_;
};

struct QuadratureSpec {
  double tolerance = 1e-8;  // absolute, per integral
  double width = 12.0;      // truncation in standard deviations
  std::size_t max_intervals = 400;
  SeriesOptions series{};
};

struct Estimate {
  double value;
  double error;
};

namespace detail {

inline void check(const quadrature::Result& r, const char* what) {
  if (!r.converged)
    throw ConvergenceError(std::string("wedge: quadrature for ") + what + " did not converge, error estimate " +
                               format_number(r.error),
                           r.error);
}

inline quadrature::Tolerance tolerance(const QuadratureSpec& q) { return {q.tolerance, 1e-12, q.max_intervals}; }

// ∫_{y_lo}^{y_hi} ∫_{x_lo(y)}^{x_hi} G dX1 dX2 over the reachable window.
template <class Lo>
quadrature::Result green_mass(double t, std::array<double, 2> x0, const WedgeContext& c, double y_lo, double y_hi,
                              Lo x_lo, const QuadratureSpec& q) {
  const double w = q.width * std::sqrt(t);
  const double c1 = x0[0] + c.xi[0] * t, c2 = x0[1] + c.xi[1] * t;
  y_lo = std::max({y_lo, 0.0, c2 - w});
  y_hi = std::min(y_hi, c2 + w);
  if (!(y_hi > y_lo)) return {};
  return quadrature::integrate_2d(
      [&](double y, double x) { return wedge_green(t, {x, y}, x0, c, q.series); }, y_lo, y_hi,
      [&](double y) { return std::max({x_lo(y), 0.0, c1 - w}); }, [&](double) { return c1 + w; },
      tolerance(q));
}

}  // namespace detail

/// Probability of no absorption by scaled time t.
inline Estimate interior_mass(double t, std::array<double, 2> x0, const WedgeContext& c,
                              const QuadratureSpec& q = {}) {
  const auto r = detail::green_mass(t, x0, c, 0.0, INFINITY, [](double) { return 0.0; }, q);
  detail::check(r, "interior mass");
  return {r.value, r.error};
}

/// Probability absorbed through `face` by scaled time t.
inline Estimate cumulative_flux(double t, int face, std::array<double, 2> x0, const WedgeContext& c,
                                const QuadratureSpec& q = {}) {
  const double reach = x0[0] + x0[1] + (std::abs(c.xi[0]) + std::abs(c.xi[1])) * t;
  const auto r = quadrature::integrate_2d(
      [&](double s, double y) { return boundary_flux(s, y, face, x0, c, q.series); }, 0.0, t,
      [](double) { return 0.0; }, [&](double s) { return reach + 2.0 * q.width * std::sqrt(s); },
      detail::tolerance(q));
  detail::check(r, "boundary flux");
  return {r.value, r.error};
}

/// Joint survival: neither bank crosses its interior level before T and both
/// settle in full. `horizon` is in calendar time; x0 in scaled coordinates.
inline Estimate joint_survival_Q(std::array<double, 2> x0, const TwoBankTerminalDomains& d, double horizon,
                                 const QuadratureSpec& q = {}) {
  if (!(x0[0] > 0.0 && x0[1] > 0.0)) return {0.0, 0.0};
  if (!(horizon > 0.0)) throw ParameterError("wedge: horizon must be > 0");
  const auto c = d.context();
  const double t = d.scaled_time(horizon);
  const double m1 = std::max(d.m_eq[0], 0.0);
  const auto r = detail::green_mass(t, x0, c, std::max(d.m_eq[1], 0.0), INFINITY, [&](double) { return m1; }, q);
  detail::check(r, "joint survival");
  return {std::clamp(r.value, 0.0, 1.0), r.error};
}

/// Marginal survival of bank i: settled in full at T, either alongside the
/// other bank or after the other defaults at settlement or in the interior.
inline Estimate marginal_survival_Q(int i, std::array<double, 2> x0, const TwoBankTerminalDomains& d,
                                    double horizon, const QuadratureSpec& q = {}) {
  if (i != 0 && i != 1) throw ParameterError("wedge: bank index must be 0 or 1");
  if (!(x0[0] > 0.0 && x0[1] > 0.0)) return {0.0, 0.0};
  if (!(horizon > 0.0)) throw ParameterError("wedge: horizon must be > 0");
  const int j = 1 - i;
  // Work in coordinates where the bank of interest comes first.
  TwoBankParams sp = d.params();
  if (i == 1) {
    std::swap(sp.L[0], sp.L[1]);
    std::swap(sp.L12, sp.L21);
    std::swap(sp.R[0], sp.R[1]);
    std::swap(sp.sigma[0], sp.sigma[1]);
  }
  const TwoBankTerminalDomains s(sp);
  const std::array<double, 2> y0{x0[i], x0[j]};
  const auto c = s.context();
  const double t = s.scaled_time(horizon);

  const double m_eq1 = std::max(s.m_eq[0], 0.0), m_eq2 = std::max(s.m_eq[1], 0.0);
  auto settled = detail::green_mass(t, y0, c, m_eq2, INFINITY, [&](double) { return m_eq1; }, q);
  detail::check(settled, "marginal survival");
  auto partner_defaults = detail::green_mass(
      t, y0, c, 0.0, m_eq2, [&](double y) { return std::max(s.theta_curve(0, y), 0.0); }, q);
  detail::check(partner_defaults, "marginal survival");

  const double lo = s.tilde_m_lo[0], eq = s.tilde_m_eq[0];
  const double reach = y0[0] + y0[1] + (std::abs(c.xi[0]) + std::abs(c.xi[1])) * t;
  auto flux = quadrature::integrate(
      [&](double u) {
        const double tau = t - u;
        auto inner = [&](double x) {
          return boundary_flux(u, x, 2, y0, c, q.series) * survival_1d(x, c.xi[0], lo, eq, tau).probability;
        };
        const double hi = reach + 2.0 * q.width * std::sqrt(u);
        auto tol = detail::tolerance(q);
        tol.absolute /= 10.0 * t;
        const double split = std::clamp(eq, std::max(lo, 0.0), hi);
        const auto a = quadrature::integrate(inner, std::max(lo, 0.0), split, tol);
        const auto b = quadrature::integrate(inner, split, hi, tol);
        if (!a.converged || !b.converged)
          throw ConvergenceError("wedge: flux quadrature did not converge", a.error + b.error);
        return a.value + b.value;
      },
      0.0, t, detail::tolerance(q));
  detail::check(flux, "post-default survival");
  const double v = settled.value + partner_defaults.value + flux.value;
  return {std::clamp(v, 0.0, 1.0), settled.error + partner_defaults.error + flux.error};
}

/// Standalone survival of bank i ignoring the counterparty's default.
inline double standalone_survival_q(int i, std::array<double, 2> x0, const TwoBankTerminalDomains& d,
                                    double horizon) {
  return survival_1d(x0[i], d.xi[i], 0.0, d.m_eq[i], d.scaled_time(horizon)).probability;
}

}  // namespace circuitlab::wedge
