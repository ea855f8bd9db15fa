#include <gtest/gtest.h>

#include <cmath>

#include "circuitlab/balance_sheet.hpp"

using namespace circuitlab;
using namespace circuitlab::balance;

namespace {

FlowParams quiet() {
  FlowParams p;
  p.lambda = p.mu = p.nu = p.xi = p.alpha = p.beta = p.r = p.zeta = p.sigma = p.R = 0.0;
  return p;
}

EvolveOptions options(double horizon, double dt) {
  EvolveOptions o;
  o.horizon = horizon;
  o.dt = dt;
  return o;
}

RegWeights worked_weights() {
  RegWeights w;
  w.rwa = 0.8;
  w.kappa = 0.105;
  w.K2 = w.K3 = w.K4 = 1.0;
  return w;
}

}  // namespace

TEST(BalanceFlows, ZeroControlsZeroRatesKeepState) {
  const FlowState s0;
  const auto tr = evolve(s0, quiet(), ControlPath{}, options(5.0, 0.1));
  for (std::size_t k = 0; k < tr.data.rows(0); ++k)
    for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(tr.data.at(0, k, j), tr.data.at(0, 0, j));
}

TEST(BalanceFlows, LoansDecayExponentially) {
  auto p = quiet();
  p.lambda = 0.3;
  const FlowState s0;
  const auto tr = evolve(s0, p, ControlPath{}, options(4.0, 0.25));
  for (std::size_t k = 0; k < tr.data.rows(0); ++k)
    EXPECT_NEAR(tr.data.at(0, k, 0), s0.X * std::exp(-p.lambda * tr.data.times[k]), 1e-12 * s0.X);
}

TEST(BalanceFlows, LaggedIssuanceClosedForm) {
  auto p = quiet();
  p.lambda = 0.2;
  p.T_lag = 3.0;
  const double phi = 4.0;
  const FlowState s0;
  const auto tr = evolve(s0, p, ControlPath::constant(phi, 0, 0, 0, 0), options(6.0, 0.05));
  const double Phi = phi * (1.0 - std::exp(-p.lambda * p.T_lag));
  const auto& t = tr.data.times;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double expected = s0.X * std::exp(-p.lambda * t[k]) + Phi * (1.0 - std::exp(-p.lambda * t[k])) / p.lambda;
    EXPECT_NEAR(tr.data.at(0, k, 0), expected, 1e-11);
  }
}

TEST(BalanceFlows, LaggedRateUsesFlatHistory) {
  const Rate ramp = [](double t) { return 1.0 + t; };
  const double decay = 0.1, lag = 2.0, q = std::exp(-decay * lag);
  EXPECT_DOUBLE_EQ(lagged_rate(ramp, 0.5, decay, lag), 1.5 - q * 1.0);
  EXPECT_DOUBLE_EQ(lagged_rate(ramp, 3.0, decay, lag), 4.0 - q * 2.0);
  EXPECT_DOUBLE_EQ(lagged_rate(ramp, 3.0, decay, INFINITY), 4.0);
}

TEST(BalanceFlows, BalanceIdentityHoldsUnderAllFlows) {
  FlowParams p;
  p.sigma = 0.25;
  const FlowState s0;
  ControlPath u;
  u.phi = [](double t) { return 3.0 + std::sin(t); };
  u.psi = constant_rate(1.5);
  u.omega = [](double t) { return 0.5 * t; };
  u.pi = constant_rate(2.0);
  u.delta = [](double t) { return 0.2 + 0.1 * std::cos(3 * t); };
  for (bool stochastic : {false, true}) {
    auto o = options(10.0, 0.01);
    o.stochastic = stochastic;
    o.seed = 7;
    const auto tr = evolve(s0, p, u, o);
    EXPECT_LT(tr.max_balance_residual, 1e-10);
    const auto e = tr.data.column("E"), et = tr.data.column("E_tracked");
    const auto last = tr.data.rows(0) - 1;
    EXPECT_NEAR(tr.data.at(0, last, e), tr.data.at(0, last, et), 1e-9);
  }
}

TEST(BalanceFlows, StochasticInvestmentMeanFollowsDeterministicPart) {
  auto p = quiet();
  p.r = 0.05;
  p.sigma = 0.3;
  const FlowState s0;
  const auto u = ControlPath::constant(0, 0, 1.0, 0, 0);
  const int n = 4000;
  double sum = 0.0, sq = 0.0, J = 0.0;
  for (int k = 0; k < n; ++k) {
    auto o = options(2.0, 1e-3);
    o.stochastic = true;
    o.seed = 11;
    o.stream = k;
    o.max_records = 2;
    const auto tr = evolve(s0, p, u, o);
    const double I = tr.final_state.I;
    sum += I;
    sq += I * I;
    J = tr.data.at(0, tr.data.rows(0) - 1, tr.data.column("J"));
  }
  const double mean = sum / n, se = std::sqrt((sq / n - mean * mean) / n);
  EXPECT_NEAR(mean, J, 4 * se + 1e-3 * J);
}

TEST(BalanceFlows, RejectsUnbalancedStartAndBadRates) {
  FlowState s0;
  s0.C += 1.0;
  EXPECT_THROW(evolve(s0, FlowParams{}, ControlPath{}, options(1, 0.1)), ParameterError);
  FlowParams p;
  p.lambda = -0.1;
  EXPECT_THROW(evolve(FlowState{}, p, ControlPath{}, options(1, 0.1)), ParameterError);
  ControlPath u;
  u.delta = [](double) { return NAN; };
  EXPECT_THROW(evolve(FlowState{}, FlowParams{}, u, options(1, 0.1)), DomainError);
}

TEST(BalanceCashflow, DividendOnlyClosedForm) {
  auto p = quiet();
  p.R = 0.07;
  const double delta = 0.8, T = 9.0;
  const auto tr = evolve(FlowState{}, p, ControlPath::constant(0, 0, 0, 0, delta), options(T, 0.3));
  const double expected = delta * ((1.0 - std::exp(-p.R * T)) / p.R - T * std::exp(-p.R * T));
  EXPECT_NEAR(cashflow_objective(tr, p), expected, 1e-10);
}

TEST(BalanceCashflow, ClosedFormForLoanInterest) {
  auto p = quiet();
  p.lambda = 0.1;
  p.nu = 0.05;
  p.R = 0.03;
  const double T = 5.0;
  const FlowState s0;
  const auto tr = evolve(s0, p, ControlPath{}, options(T, 0.5));
  const double expected = std::exp(-p.R * T) * p.nu * s0.X * (1.0 - std::exp(-p.lambda * T)) / p.lambda;
  EXPECT_NEAR(cashflow_objective(tr, p), expected, 1e-12);
}

TEST(BalanceCashflow, MonotoneInLoanRateAndDiscount) {
  FlowParams p;
  const auto u = ControlPath::constant(2, 1, 0.5, 1, 0);
  double prev = -INFINITY;
  for (double nu : {0.02, 0.04, 0.06, 0.08}) {
    p.nu = nu;
    const double cf = cashflow_objective(evolve(FlowState{}, p, u, options(10, 0.05)), p);
    EXPECT_GT(cf, prev);
    prev = cf;
  }
  p.beta = p.xi = 0.0;
  const auto tr = evolve(FlowState{}, p, u, options(10, 0.05));
  prev = INFINITY;
  for (double R : {0.0, 0.02, 0.05, 0.1}) {
    p.R = R;
    const double cf = cashflow_objective(tr, p);
    EXPECT_LT(cf, prev);
    prev = cf;
  }
}

TEST(BalanceConstraints, WorkedCapitalExample) {
  const FlowState s{100, 20, 10, 90, 25, 15};
  const auto c = constraints_report(s, worked_weights());
  EXPECT_NEAR(c.rwa, 80.0, 1e-12);
  EXPECT_NEAR(c.required_capital, 11.4, 1e-12);
  EXPECT_NEAR(c.capital_slack, 3.6, 1e-12);
  EXPECT_TRUE(c.capital_ok);
}

TEST(BalanceConstraints, ZeroWeightsReduceToEquityAndCash) {
  RegWeights w;
  w.rwa = 0.0;
  const FlowState s{100, 20, 10, 90, 25, 15};
  const auto c = constraints_report(s, w);
  EXPECT_DOUBLE_EQ(c.capital_slack, 15.0);
  EXPECT_DOUBLE_EQ(c.funding_slack, 15.0);
  EXPECT_DOUBLE_EQ(c.liquidity_slack, 10.0);
  EXPECT_TRUE(c.all_ok());
}

TEST(BalanceConstraints, FundingAndLiquidityWeights) {
  RegWeights w = worked_weights();
  w.asf_D = 0.9;
  w.asf_Y = 1.0;
  w.rsf_X = 0.85;
  w.rsf_I = 0.5;
  w.co_D = 0.1;
  w.co_Y = 0.5;
  w.ci_X = 0.05;
  w.ci_I = 0.8;
  const FlowState s{100, 20, 10, 90, 25, 15};
  const auto c = constraints_report(s, w);
  EXPECT_NEAR(c.funding_slack, 81 + 25 + 15 - 85 - 10, 1e-12);
  EXPECT_NEAR(c.liquidity_slack, 5 + 16 + 10 - 9 - 12.5, 1e-12);
  w.co_Y = 2.0;
  EXPECT_FALSE(constraints_report(s, w).liquidity_ok);
  w.kappa = 1.5;
  EXPECT_THROW(constraints_report(s, w), ParameterError);
}

TEST(BalanceSearch, SinglePointMatchesDirectRun) {
  const FlowParams p;
  ControlGrid g;
  g.phi.values = {3};
  g.delta.values = {0.5};
  const auto res = constant_control_search(FlowState{}, p, worked_weights(), 5.0, 0.05, g);
  ASSERT_EQ(res.table.size(), 1u);
  auto o = options(5.0, 0.05);
  const auto tr = evolve(FlowState{}, p, ControlPath::constant(3, 0, 0, 0, 0.5), o);
  EXPECT_DOUBLE_EQ(res.table[0].cashflow, cashflow_objective(tr, p));
}

TEST(BalanceSearch, InfeasibleEverywhereReportsNoOptimum) {
  RegWeights w = worked_weights();
  w.K2 = 1000;
  ControlGrid g;
  g.delta = AxisGrid::linspace(0, 1, 5);
  const auto res = constant_control_search(FlowState{}, FlowParams{}, w, 2.0, 0.1, g);
  EXPECT_EQ(res.table.size(), 5u);
  EXPECT_FALSE(res.best.has_value());
}

TEST(BalanceSearch, DividendOptimumSitsAtCapitalBoundary) {
  const FlowParams p;
  const auto w = worked_weights();
  const double T = 5.0, dt = 0.05;
  ControlGrid g;
  g.phi.values = {2.0};
  g.delta = AxisGrid::linspace(0.0, 10.0, 101);
  const auto res = constant_control_search(FlowState{}, p, w, T, dt, g);
  ASSERT_TRUE(res.best.has_value());
  const double grid_best = res.table[*res.best].controls[4];
  EXPECT_GT(grid_best, 0.0);
  EXPECT_LT(grid_best, 10.0);

  EvolveOptions o = options(T, dt);
  o.weights = w;
  auto feasible = [&](double d) { return evolve(FlowState{}, p, ControlPath::constant(2, 0, 0, 0, d), o).feasible; };
  double lo = 0.0, hi = 10.0;
  ASSERT_TRUE(feasible(lo));
  ASSERT_FALSE(feasible(hi));
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? lo : hi) = mid;
  }
  EXPECT_LE(grid_best, lo);
  EXPECT_GT(grid_best, lo - 0.1 - 1e-12);
  for (const auto& row : res.table)
    if (row.feasible) {
      EXPECT_LE(row.cashflow, res.table[*res.best].cashflow);
    }
}
