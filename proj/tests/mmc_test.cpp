#include <gtest/gtest.h>

#include <cmath>

#include "circuitlab/mmc.hpp"

using namespace circuitlab;
using namespace circuitlab::mmc;

namespace {

State random_state(RngStream& rng) {
  State x;
  x.C_r = 0.5 + 5 * rng.uniform();
  x.D_r = 50 * rng.uniform();
  x.L_r = 50 * rng.uniform();
  x.D_f = 50 * rng.uniform();
  x.L_f = 50 * rng.uniform();
  x.K_f = 10 + 50 * rng.uniform();
  x.K_b = x.L_r + x.L_f - x.D_r - x.D_f;
  x.s_w = 0.1 + 0.8 * rng.uniform();
  x.lambda_w = 0.1 + 0.8 * rng.uniform();
  return x;
}

}  // namespace

TEST(MmcNetInterest, Arithmetic) {
  Params p;
  EXPECT_EQ(net_interest(0, 0, p), 0.0);
  EXPECT_NEAR(net_interest(30, 20, p), -0.2, 1e-15);
  p.r_D = p.r_L = 0.03;
  EXPECT_NEAR(net_interest(30, 20, p), 0.03 * 10, 1e-15);
}

TEST(MmcUpsilon, LogisticAtZero) { EXPECT_DOUBLE_EQ(logistic(0.0), 0.5); }

TEST(MmcUpsilon, DecoupledEqualsLogisticOfIntercept) {
  Params p;
  p.upsilon1 = p.upsilon2 = p.upsilon3 = 0.0;
  const State x;
  for (auto mode : {UpsilonMode::OneStep, UpsilonMode::FixedPoint, UpsilonMode::Newton})
    EXPECT_NEAR(solve_upsilon(x, p, mode), logistic(p.upsilon0), 1e-15);
}

TEST(MmcUpsilon, ReferenceInitialState) {
  const Params p;
  const State x;
  const double fp = solve_upsilon(x, p, UpsilonMode::FixedPoint);
  const double one = solve_upsilon(x, p, UpsilonMode::OneStep);
  const double nw = solve_upsilon(x, p, UpsilonMode::Newton);
  EXPECT_NEAR(fp, 0.10079, 1e-5);
  EXPECT_NEAR(one, 0.09287, 1e-5);
  EXPECT_NEAR(nw, fp, 1e-11);
  EXPECT_LT(std::abs(one - fp), 1e-2);
  EXPECT_NEAR(fp, logistic(detail::upsilon_argument(x, p, fp)), 5e-12);
}

TEST(MmcUpsilon, NonConvergenceReportsResidual) {
  Params p;
  p.upsilon1 = 50.0;
  State x;
  try {
    solve_upsilon(x, p, UpsilonMode::FixedPoint);
    FAIL();
  } catch (const ConvergenceError& e) {
    EXPECT_GE(e.residual(), 0.0);
  }
}

TEST(MmcDerived, ProductionIdentityOnRandomStates) {
  const Params p;
  RngStream rng(21, 0);
  for (int i = 0; i < 500; ++i) {
    const auto x = random_state(rng);
    const auto d = derived_quantities(x, p, 0.01 + 0.9 * rng.uniform());
    ASSERT_LT(std::abs(d.production_residual(x.C_r)), 1e-12);
  }
}

TEST(MmcDerived, RentierWealthEqualsFirmCapital) {
  const Params p;
  RngStream rng(22, 0);
  for (int i = 0; i < 500; ++i) {
    const auto x = random_state(rng);
    const auto d = derived_quantities(x, p, 0.3);
    ASSERT_NEAR(d.Sigma_r, x.K_f, 1e-12 * x.max_stock());
  }
}

TEST(MmcDerived, FirmProfitSubstitution) {
  const Params p;
  const State x;
  const double u = solve_upsilon(x, p, UpsilonMode::FixedPoint);
  const auto d = derived_quantities(x, p, u);
  EXPECT_NEAR(d.Pi_f, x.C_r / (1.0 - u) + net_interest(x.D_f, x.L_f, p), 1e-13);
  EXPECT_NEAR(d.Pi_f, (1.0 - x.s_w) * d.Y_f + d.ni_f, 1e-13);
  EXPECT_NEAR(d.pi_f, d.Pi_f / x.K_f, 1e-15);
}

TEST(MmcDerived, DegeneratePropensityRejected) {
  EXPECT_THROW(derived_quantities(State{}, Params{}, 1.0), DomainError);
}

TEST(MmcDerived, CapacityFlag) {
  const Params p;
  State x;
  const auto d = derived_quantities(x, p, 0.1);
  EXPECT_EQ(d.capacity_bound, d.Y_f > p.nu_f * x.K_f);
  EXPECT_DOUBLE_EQ(d.Y_f_capped, std::min(d.Y_f, p.nu_f * x.K_f));
}

TEST(MmcDynamics, PositiveRentierCashFlowOnlyAmortizesLoans) {
  Params p;
  State x;
  x.D_r = 200.0;
  x.L_r = 0.0;
  x.K_b = x.L_r + x.L_f - x.D_r - x.D_f;
  const auto dyn = drift_and_diffusion(x, p);
  ASSERT_GT(dyn.derived.CF_r, 0.0);
  EXPECT_DOUBLE_EQ(dyn.drift[kLr], -p.xi_Delta * x.L_r);
  EXPECT_NEAR(dyn.drift[kDr], dyn.derived.CF_r, 1e-12);
}

TEST(MmcDynamics, CapitalIndicator) {
  const Params p;
  State x;
  const auto slack = drift_and_diffusion(x, p);
  EXPECT_FALSE(slack.credit_crunch);
  x.K_b = 1e-3;
  const auto tight = drift_and_diffusion(x, p);
  EXPECT_TRUE(tight.credit_crunch);
  EXPECT_DOUBLE_EQ(tight.drift[kLr], -p.xi_Delta * x.L_r);
  EXPECT_DOUBLE_EQ(tight.drift[kLf], -p.xi_Delta * x.L_f);
  EXPECT_GT(tight.unmet_financing, 0.0);
}

TEST(MmcDynamics, StockFlowDerivativeIdentity) {
  const Params p;
  const State x;
  const auto dyn = drift_and_diffusion(x, p);
  const auto& f = dyn.drift;
  const double lhs = f[kLr] + f[kLf] - f[kDr] - f[kDf];
  EXPECT_NEAR(lhs, f[kKb], 1e-12 * std::abs(f[kKb]) + 1e-15);
  // the bank's retained profit equals −CF_r − CF_f − ξ_Δ L scaled back
  const auto& d = dyn.derived;
  EXPECT_NEAR(-d.CF_r - d.CF_f - p.xi_Delta * (x.L_r + x.L_f), d.Pi_b_u, 1e-12);
}

TEST(MmcDynamics, StockFlowIdentityOnRandomStates) {
  const Params p;
  RngStream rng(23, 0);
  for (int i = 0; i < 500; ++i) {
    auto x = random_state(rng);
    x.K_b = 1e6;  // keep lending unconstrained
    const auto dyn = drift_and_diffusion(x, p, 0.05 + 0.9 * rng.uniform());
    const auto& f = dyn.drift;
    const double lhs = f[kLr] + f[kLf] - f[kDr] - f[kDf];
    ASSERT_NEAR(lhs, f[kKb], 1e-12 * (1.0 + std::abs(f[kKb]) + std::abs(f[kDr]) + std::abs(f[kLr])));
  }
}

TEST(MmcSimulate, RejectsInconsistentInitialState) {
  State x;
  x.K_b = 21.0;
  try {
    simulate(x, Params{}, SimulationOptions{});
    FAIL();
  } catch (const ParameterError& e) {
    EXPECT_NE(std::string(e.what()).find("residual"), std::string::npos);
  }
}

TEST(MmcSimulate, DeterministicReference) {
  const Params p;
  SimulationOptions opt;
  opt.horizon = 10.0;
  const auto run = simulate(State{}, p, opt);
  const auto s = run.summary();
  EXPECT_EQ(s.credit_crunch_steps, 0u);
  EXPECT_LT(s.max_stock_flow_residual, 1e-8);
  EXPECT_LT(s.max_production_residual, 1e-12);
  EXPECT_LT(s.max_upsilon_gap, 0.1);
  const auto& t = run.trajectories;
  const auto kf = t.column("K_f");
  EXPECT_GT(t.at(0, t.rows(0) - 1, kf), t.at(0, 0, kf));
  for (std::size_t k = 0; k < t.rows(0); ++k) {
    EXPECT_TRUE(std::isfinite(t.at(0, k, t.column("P"))));
    ASSERT_GT(t.at(0, k, t.column("s_w")), 0.0);
    ASSERT_LT(t.at(0, k, t.column("lambda_w")), 1.0);
  }
}

TEST(MmcSimulate, OneStepLongHorizonStaysBounded) {
  SimulationOptions opt;
  opt.horizon = 40.0;
  opt.mode = UpsilonMode::OneStep;
  const auto run = simulate(State{}, Params{}, opt);
  EXPECT_LT(run.summary().max_stock_flow_residual, 1e-8);
}

TEST(MmcSimulate, FixedPointLossReportsTime) {
  SimulationOptions opt;
  opt.horizon = 40.0;
  try {
    simulate(State{}, Params{}, opt);
    FAIL() << "the interior propensity root disappears on this horizon";
  } catch (const DomainError& e) {
    const std::string msg = e.what();
    const auto pos = msg.find("t=");
    ASSERT_NE(pos, std::string::npos);
    const double t = std::stod(msg.substr(pos + 2));
    EXPECT_GT(t, 10.0);
    EXPECT_LT(t, 20.0);
  }
}

TEST(MmcSimulate, ConsumptionAtItsMeanStaysPut) {
  Params p;
  p.xi_Delta = 0.0;
  p.delta_rb = 0.0;
  p.delta_bb = 1.0;
  p.delta_rf = 0.0;
  p.delta_ff = 1.0;
  p.r_D = p.r_L = 0.0;
  p.upsilon1 = p.upsilon2 = p.upsilon3 = 0.0;
  State x;
  const double u = logistic(p.upsilon0);
  p.xi_A = u * x.C_r / ((1.0 - u) * x.K_f);
  p.alpha0 = 0.0;
  p.alpha1 = x.C_r / (p.nu_f * x.K_f);
  SimulationOptions opt;
  opt.horizon = 5.0;
  const auto run = simulate(x, p, opt);
  const auto& t = run.trajectories;
  for (std::size_t k = 0; k < t.rows(0); ++k) ASSERT_NEAR(t.at(0, k, 0), x.C_r, 1e-12);
}

TEST(MmcSimulate, StochasticReproducibleAndNonNegative) {
  Params p;
  p.sigma_C = 0.05;
  p.sigma_K = 0.02;
  p.sigma_s = 0.01;
  p.sigma_lambda = 0.01;
  SimulationOptions opt;
  opt.horizon = 5.0;
  opt.paths = 4;
  opt.seed = 77;
  opt.dt = 1e-2;
  worker_count_setting() = 1;
  const auto a = simulate(State{}, p, opt);
  worker_count_setting() = 3;
  const auto b = simulate(State{}, p, opt);
  worker_count_setting() = 0;
  EXPECT_EQ(a.trajectories.paths, b.trajectories.paths);
  for (const auto& path : a.trajectories.paths)
    for (std::size_t j = 0; j < 6; ++j) ASSERT_GE(path[j], 0.0);
}
