#pragma once

// Single-bank balance sheet under controls: flows, shareholder cash flow,
// capital and liquidity constraints, and a grid search over constant controls.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "circuitlab/core.hpp"
#include "circuitlab/stochastic_engine.hpp"

namespace circuitlab::balance {

struct FlowParams {
  double lambda = 0.1;  // loan repayment/loss
  double mu = 0.1;      // debt repayment
  double nu = 0.06;     // loan interest
  double xi = 0.03;     // debt interest
  double alpha = 0.05;  // deposit withdrawal
  double beta = 0.01;   // deposit interest
  double r = 0.04;      // investment growth
  double zeta = 0.02;   // investment dividend yield
  double sigma = 0.0;   // investment volatility
  double R = 0.05;      // discount rate
  double T_lag = 5.0;   // loan/debt maturity in the amortization lag

  void validate() const {
    const std::pair<const char*, double> rates[] = {{"lambda", lambda}, {"mu", mu},     {"nu", nu},
                                                    {"xi", xi},         {"alpha", alpha}, {"beta", beta},
                                                    {"r", r},           {"zeta", zeta},   {"sigma", sigma},
                                                    {"R", R}};
    for (const auto& [name, v] : rates)
      if (!(v >= 0.0) || !std::isfinite(v))
        throw ParameterError(std::string("balance: rate ") + name + " must be finite and >= 0");
    if (!(T_lag > 0.0)) throw ParameterError("balance: T_lag must be > 0");
  }
};

struct FlowState {
  double X = 100.0, I = 20.0, C = 10.0, D = 90.0, Y = 25.0, E = 15.0;

  double assets() const { return X + I + C; }
  double residual() const { return X + I + C - D - Y - E; }
};

using Rate = std::function<double(double)>;

inline Rate constant_rate(double v) {
  return [v](double) { return v; };
}

struct ControlPath {
  Rate phi = constant_rate(0.0);    // new loans
  Rate psi = constant_rate(0.0);    // new borrowing
  Rate omega = constant_rate(0.0);  // new investment
  Rate pi = constant_rate(0.0);     // new deposits
  Rate delta = constant_rate(0.0);  // dividends and buybacks

  static ControlPath constant(double phi, double psi, double omega, double pi, double delta) {
    return {constant_rate(phi), constant_rate(psi), constant_rate(omega), constant_rate(pi), constant_rate(delta)};
  }
};

/// New issuance less amortization of what was issued one maturity ago; the
/// history before t = 0 repeats the t = 0 value.
inline double lagged_rate(const Rate& f, double t, double decay, double T_lag) {
  if (std::isinf(T_lag)) return f(t);
  return f(t) - std::exp(-decay * T_lag) * f(std::max(t - T_lag, 0.0));
}

struct RegWeights {
  double rwa = 1.0;
  double kappa = 0.08;
  double rsf_X = 0.0, rsf_I = 0.0;
  double asf_D = 0.0, asf_Y = 0.0;
  double co_D = 0.0, co_Y = 0.0;
  double ci_X = 0.0, ci_I = 0.0;
  double K2 = 0.0, K3 = 0.0, K4 = 0.0;

  void validate() const {
    for (double v : {rwa, rsf_X, rsf_I, asf_D, asf_Y, co_D, co_Y, ci_X, ci_I, K2, K3, K4})
      if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError("balance: regulatory weights must be finite and >= 0");
    if (!(kappa > 0.0 && kappa < 1.0)) throw ParameterError("balance: kappa must be in (0,1)");
  }
};

struct ConstraintReport {
  double rwa = 0.0;
  double required_capital = 0.0;  // K
  double capital_slack = 0.0;     // E − K
  double funding_slack = 0.0;     // ASF − RSF
  double liquidity_slack = 0.0;   // CI − CO
  bool capital_ok = false, funding_ok = false, liquidity_ok = false;

  bool all_ok() const { return capital_ok && funding_ok && liquidity_ok; }
  double min_slack() const { return std::min({capital_slack, funding_slack, liquidity_slack}); }
};

inline ConstraintReport constraints_report(const FlowState& s, const RegWeights& w) {
  w.validate();
  ConstraintReport c;
  c.rwa = w.rwa * s.X;
  c.required_capital = w.kappa * c.rwa + w.K2 + w.K3 + w.K4;
  c.capital_slack = s.E - c.required_capital;
  c.funding_slack = (w.asf_D * s.D + w.asf_Y * s.Y + s.E) - (w.rsf_X * s.X + w.rsf_I * s.I);
  c.liquidity_slack = (w.ci_X * s.X + w.ci_I * s.I + s.C) - (w.co_D * s.D + w.co_Y * s.Y);
  c.capital_ok = c.capital_slack > 0.0;
  c.funding_ok = c.funding_slack > 0.0;
  c.liquidity_ok = c.liquidity_slack > 0.0;
  return c;
}

struct EvolveOptions {
  double horizon = 10.0;
  double dt = 1e-2;
  bool stochastic = false;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::size_t max_records = 2001;
  std::optional<RegWeights> weights;  // sample constraints at every step
};

/// Exact integrals over one step, enough to evaluate the cash-flow objective
/// for any discount rate.
struct StepFlows {
  double t0, h;
  double int_X, int_J, int_D, int_Y;
  double delta;
};

struct Trajectory {
  TrajectorySet data;
  std::vector<StepFlows> flows;
  double horizon = 0.0;
  double max_balance_residual = 0.0;  // |X+I+C−D−Y−E| / assets with E tracked independently
  std::optional<ConstraintReport> worst;  // elementwise minimum slacks over the run
  bool feasible = true;
  FlowState final_state;
};

namespace detail {

// y' = −a y + f over h with f constant: returns {y(h), ∫_0^h y}.
inline std::pair<double, double> linear_step(double y, double a, double f, double h) {
  const double ah = a * h;
  double g1, g2;  // ∫ e^{−as}, ∫ (1 − e^{−as})/a
  if (std::abs(ah) < 1e-5) {
    g1 = h * (1.0 - ah / 2.0 + ah * ah / 6.0);
    g2 = h * h / 2.0 * (1.0 - ah / 3.0 + ah * ah / 12.0);
  } else {
    g1 = -std::expm1(-ah) / a;
    g2 = (h - g1) / a;
  }
  return {y * std::exp(-ah) + f * g1, y * g1 + f * g2};
}

}  // namespace detail

inline Trajectory evolve(const FlowState& initial, const FlowParams& p, const ControlPath& u,
                         const EvolveOptions& opt) {
  p.validate();
  const double scale = std::max(1.0, std::abs(initial.assets()));
  if (std::abs(initial.residual()) > 1e-10 * scale)
    throw ParameterError("balance: initial state violates the balance identity, residual " +
                         format_number(initial.residual()));
  if (opt.stochastic && p.sigma > 0.0 && initial.I < 0.0) throw ParameterError("balance: investments must be >= 0");
  const auto plan = StepPlan::make(opt.horizon, opt.dt, opt.max_records);
  Trajectory tr;
  tr.horizon = opt.horizon;
  tr.data.names = {"X", "I", "C", "D", "Y", "E", "E_tracked", "J", "balance_residual"};
  tr.data.times = plan.record_times();
  tr.data.paths.resize(1);
  auto& row = tr.data.paths[0];
  RngStream rng(opt.seed, opt.stream);

  FlowState s = initial;
  double e_tracked = initial.E, J = initial.I, t = 0.0;
  auto record = [&] {
    const double res = (s.X + s.I + s.C - s.D - s.Y - e_tracked) / std::max(1.0, std::abs(s.assets()));
    tr.max_balance_residual = std::max(tr.max_balance_residual, std::abs(res));
    row.insert(row.end(), {s.X, s.I, s.C, s.D, s.Y, s.E, e_tracked, J, res});
  };
  auto check = [&] {
    if (!opt.weights) return;
    const auto c = constraints_report(s, *opt.weights);
    tr.feasible = tr.feasible && c.all_ok();
    if (!tr.worst) {
      tr.worst = c;
      return;
    }
    auto& w = *tr.worst;
    w.capital_slack = std::min(w.capital_slack, c.capital_slack);
    w.funding_slack = std::min(w.funding_slack, c.funding_slack);
    w.liquidity_slack = std::min(w.liquidity_slack, c.liquidity_slack);
    w.capital_ok = w.capital_ok && c.capital_ok;
    w.funding_ok = w.funding_ok && c.funding_ok;
    w.liquidity_ok = w.liquidity_ok && c.liquidity_ok;
  };
  record();
  check();
  for (std::size_t k = 0; k < plan.steps; ++k) {
    const double t1 = k + 1 == plan.steps ? opt.horizon : (k + 1) * plan.dt;
    const double h = t1 - t;
    const double Phi = lagged_rate(u.phi, t, p.lambda, p.T_lag);
    const double Psi = lagged_rate(u.psi, t, p.mu, p.T_lag);
    const double om = u.omega(t), pi = u.pi(t), de = u.delta(t);
    for (double v : {Phi, Psi, om, pi, de})
      if (!std::isfinite(v)) throw DomainError("balance: non-finite control at t=" + format_number(t));

    const auto [X1, iX] = detail::linear_step(s.X, p.lambda, Phi, h);
    const auto [D1, iD] = detail::linear_step(s.D, p.alpha, pi, h);
    const auto [Y1, iY] = detail::linear_step(s.Y, p.mu, Psi, h);
    const auto [J1, iJ] = detail::linear_step(J, -p.r, om, h);
    double dW = 0.0;
    if (opt.stochastic && p.sigma > 0.0) dW = std::sqrt(h) * rng.normal();
    const double I1 = s.I + ((p.r - p.zeta) * s.I + om) * h + p.sigma * s.I * dW;
    const double iI = s.I * h;  // left-point rule, matching the Itô step

    const double dX = X1 - s.X, dI = I1 - s.I, dD = D1 - s.D, dY = Y1 - s.Y;
    const double common = p.nu * iX + p.zeta * iI - om * h - p.beta * iD - p.xi * iY - de * h;
    s.C += -dX + dD + dY + common;
    e_tracked += dI + common;
    s.X = X1;
    s.I = I1;
    s.D = D1;
    s.Y = Y1;
    s.E = s.X + s.I + s.C - s.D - s.Y;
    J = J1;
    tr.flows.push_back({t, h, iX, iJ, iD, iY, de});
    t = t1;
    for (double v : {s.X, s.I, s.C, s.D, s.Y, s.E})
      if (!std::isfinite(v)) throw DomainError("balance: state became non-finite at t=" + format_number(t));
    check();
    if (plan.record(k + 1)) record();
  }
  tr.final_state = s;
  return tr;
}

/// CF(T) = e^{−RT} ∫ (νX + rJ − βD − ξY + (e^{−R(t−T)} − 1)δ) dt.
inline double cashflow_objective(const Trajectory& tr, const FlowParams& p) {
  const double T = tr.horizon;
  std::vector<double> terms;
  terms.reserve(tr.flows.size());
  for (const auto& f : tr.flows) {
    // ∫_{t0}^{t0+h} (e^{−R(t−T)} − 1) dt
    double kernel;
    if (p.R == 0.0) {
      kernel = 0.0;
    } else {
      kernel = std::exp(-p.R * (f.t0 - T)) * (-std::expm1(-p.R * f.h)) / p.R - f.h;
    }
    terms.push_back(p.nu * f.int_X + p.r * f.int_J - p.beta * f.int_D - p.xi * f.int_Y + kernel * f.delta);
  }
  return std::exp(-p.R * T) * pairwise_sum(terms);
}

struct AxisGrid {
  std::vector<double> values{0.0};

  static AxisGrid linspace(double lo, double hi, std::size_t n) {
    if (n == 0) throw ParameterError("balance: grid axis needs at least one point");
    AxisGrid g;
    g.values.clear();
    for (std::size_t k = 0; k < n; ++k) g.values.push_back(n == 1 ? lo : lo + (hi - lo) * k / double(n - 1));
    return g;
  }
};

struct ControlGrid {
  AxisGrid phi, psi, omega, pi, delta;
};

struct SearchRow {
  std::array<double, 5> controls;  // φ, ψ, ω, π, δ
  double cashflow = 0.0;
  bool feasible = false;
  ConstraintReport worst;
};

struct SearchResult {
  std::vector<SearchRow> table;
  std::optional<std::size_t> best;  // index into table; empty when nothing is feasible
};

inline SearchResult constant_control_search(const FlowState& initial, const FlowParams& p, const RegWeights& w,
                                            double horizon, double dt, const ControlGrid& grid) {
  w.validate();
  SearchResult out;
  for (double a : grid.phi.values)
    for (double b : grid.psi.values)
      for (double c : grid.omega.values)
        for (double d : grid.pi.values)
          for (double e : grid.delta.values) out.table.push_back({{a, b, c, d, e}, 0.0, false, {}});
  EvolveOptions opt;
  opt.horizon = horizon;
  opt.dt = dt;
  opt.weights = w;
  opt.max_records = 2;
  parallel_for(out.table.size(), [&](std::size_t k) {
    auto& row = out.table[k];
    const auto& c = row.controls;
    const auto tr = evolve(initial, p, ControlPath::constant(c[0], c[1], c[2], c[3], c[4]), opt);
    row.cashflow = cashflow_objective(tr, p);
    row.feasible = tr.feasible;
    row.worst = *tr.worst;
  });
  for (std::size_t k = 0; k < out.table.size(); ++k)
    if (out.table[k].feasible && (!out.best || out.table[k].cashflow > out.table[*out.best].cashflow)) out.best = k;
  return out;
}

}  // namespace circuitlab::balance
