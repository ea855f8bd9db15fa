#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "circuitlab/goodwin.hpp"
#include "circuitlab/keen.hpp"

using namespace circuitlab;
using namespace circuitlab::keen;

namespace {

Params classical() { return Params{}; }

Params regularized() {
  Params p;
  p.omega = 0.005;
  return p;
}

Params stochastic() {
  Params p = regularized();
  p.sigma_s = 0.005;
  p.sigma_lambda = 0.005;
  return p;
}

double column_max(const Run& run, std::size_t col) {
  double m = -1e300;
  const auto& t = run.trajectories;
  for (std::size_t i = 0; i < t.paths.size(); ++i)
    for (std::size_t k = 0; k < t.rows(i); ++k) m = std::max(m, t.at(i, k, col));
  return m;
}

}  // namespace

TEST(KeenProfit, ReferenceValue) { EXPECT_NEAR(profit_function(0.25, classical()), 0.9935, 1e-15); }

TEST(KeenProfit, DegenerateSlope) {
  Params p = classical();
  p.q = 0.0;
  EXPECT_DOUBLE_EQ(profit_function(-3.0, p), p.p + std::exp(p.r));
  EXPECT_DOUBLE_EQ(profit_function(5.0, p), p.p + std::exp(p.r));
}

TEST(KeenProfit, Monotone) {
  const auto p = classical();
  RngStream s(1, 0);
  for (int i = 0; i < 1000; ++i) {
    const double x1 = 2.0 * s.uniform() - 1.0;
    const double x2 = x1 + 1e-3 + s.uniform();
    ASSERT_GT(profit_function(x2, p), profit_function(x1, p));
  }
}

TEST(KeenProfit, ExponentCap) {
  const auto p = classical();
  bool capped = false;
  const double v = profit_function(100.0, p, &capped);
  EXPECT_TRUE(capped);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_DOUBLE_EQ(v, p.p + std::exp(700.0));
}

TEST(KeenDrift, LeverageFreeReduction) {
  Params p = classical();
  for (double rl : {0.0, 0.03, 0.2}) {
    p.r_L = rl;
    const State x{0.7, 0.9, 0.0};
    const auto d = keen_drift(x, p, false);
    EXPECT_NEAR(d[2], p.nu_f * (profit_function(0.3, p) - 0.3), 1e-15);
  }
}

TEST(KeenDrift, ClassicalDirectEvaluation) {
  const auto p = classical();
  const State x{0.75, 0.8, 0.1};
  const auto d = keen_drift(x, p, false);
  const double f = p.p + std::exp(p.q * (0.25 - 0.03 * 0.1 / 0.1) + p.r);
  EXPECT_NEAR(d[0], -(0.225 - 0.2 * 0.8) * 0.75, 1e-15);
  EXPECT_NEAR(d[1], (0.1 * f - 0.075) * 0.8, 1e-15);
  const double dg = (0.03 - 0.1 * f + 0.03) * 0.1 + 0.1 * (f - 0.25);
  EXPECT_NEAR(d[2], dg, 1e-15);
  EXPECT_GT(d[2], 0.0);
}

TEST(KeenDrift, RegularizedZeroOmegaEqualsClassical) {
  const auto p = classical();
  for (double g : {0.0, 0.3, 2.0}) {
    const State x{0.6, 0.85, g};
    const auto a = keen_drift(x, p, false);
    const auto b = keen_drift(x, p, true, true);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(a[i], b[i]);
  }
}

TEST(KeenDrift, NuFactorFlag) {
  const auto p = regularized();
  const State x{0.6, 0.85, 0.2};
  const double f = profit_function(0.4 - 0.03 * 0.2 / 0.1, p);
  EXPECT_NEAR(keen_drift(x, p, true, false)[1], (f - p.c - p.omega / 0.4) * 0.85, 1e-15);
  EXPECT_NEAR(keen_drift(x, p, true, true)[1], (p.nu_f * f - p.c - p.omega / 0.4) * 0.85, 1e-15);
}

TEST(KeenDrift, RegularizedBoundaryThrows) {
  EXPECT_THROW(keen_drift({0.5, 1.0, 0.1}, regularized(), true), DomainError);
}

TEST(KeenDrift, ReducesToGoodwinWithLinearProfit) {
  Params p = classical();
  p.r_L = 0.0;
  goodwin::Params g;
  g.a = p.a;
  g.b = p.b;
  g.c = p.nu_f - p.c;
  g.d = p.nu_f;
  RngStream s(2, 0);
  for (int i = 0; i < 200; ++i) {
    const State x{s.uniform(), s.uniform(), 0.0};
    const auto k = drift_with(x, p, false, true, [](double v) { return v; });
    const auto l = goodwin::classical_drift({x.s_w, x.lambda_w}, g);
    ASSERT_NEAR(k[0], l[0], 1e-15);
    ASSERT_NEAR(k[1], l[1], 1e-15);
  }
}

TEST(KeenSimulate, ClassicalRunExceedsFullEmployment) {
  SimulationOptions opt;
  const auto run = simulate({0.75, 0.95, 0.3}, classical(), opt);
  EXPECT_GT(column_max(run, 1), 1.0);
}

TEST(KeenSimulate, RegularizedConfinedLeverageGrows) {
  SimulationOptions opt;
  for (const State x0 : {State{0.75, 0.8, 0.1}, State{0.75, 0.9, 0.2}, State{0.75, 0.95, 0.3}}) {
    const auto run = simulate(x0, regularized(), opt);
    EXPECT_LT(column_max(run, 1), 1.0);
    EXPECT_GT(column_max(run, 0), 0.0);
    EXPECT_EQ(run.clamp_events, 0u);
    EXPECT_GT(column_max(run, 2), 3.0 * x0.Gamma_f);
  }
}

TEST(KeenSimulate, StochasticConfined) {
  SimulationOptions opt;
  opt.horizon = 30.0;
  opt.paths = 20;
  opt.seed = 5;
  const auto run = simulate({0.75, 0.9, 0.2}, stochastic(), opt);
  EXPECT_LT(run.clamp_rate(), 1e-3);
  for (std::size_t i = 0; i < run.trajectories.paths.size(); ++i)
    for (std::size_t k = 0; k < run.trajectories.rows(i); ++k) {
      ASSERT_GT(run.trajectories.at(i, k, 1), 0.0);
      ASSERT_LT(run.trajectories.at(i, k, 1), 1.0);
    }
  EXPECT_NE(run.trajectories.paths[0].back(), run.trajectories.paths[1].back());
}

TEST(KeenSimulate, MinskyEventStopsPath) {
  SimulationOptions opt;
  opt.with_nu_factor = false;
  opt.minsky_threshold = 1.0;
  const auto run = simulate({0.75, 0.95, 0.3}, regularized(), opt);
  ASSERT_EQ(run.minsky_events.size(), 1u);
  EXPECT_GT(run.minsky_events[0].time, 1.0);
  EXPECT_LT(run.minsky_events[0].time, 100.0);
  EXPECT_LT(run.trajectories.rows(0), run.trajectories.times.size());
  EXPECT_LT(run.step_count, 100000u);
}
