#pragma once

// Named verification suites. Each returns report rows; a failure is a row
// with pass = false, never an exception.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "circuitlab/balance_sheet.hpp"
#include "circuitlab/banking_network.hpp"
#include "circuitlab/dividend_optimizer.hpp"
#include "circuitlab/goodwin.hpp"
#include "circuitlab/io/checksum.hpp"
#include "circuitlab/io/scenario.hpp"
#include "circuitlab/keen.hpp"
#include "circuitlab/ledger.hpp"
#include "circuitlab/mmc.hpp"
#include "circuitlab/stochastic_engine.hpp"
#include "circuitlab/wedge_analytics.hpp"

namespace circuitlab::verify {

struct Check {
  int criterion = 0;
  std::string label;
  std::string expected;
  std::string got;
  std::string tolerance;
  bool pass = false;
};

struct Suite {
  std::string name;
  int criterion;
  std::string title;
  std::function<std::vector<Check>()> run;
};

namespace detail {

inline Check near(int c, std::string label, double expected, double got, double tol) {
  return {c, std::move(label), format_number(expected), format_number(got), format_number(tol),
          std::abs(got - expected) <= tol};
}

inline Check below(int c, std::string label, double got, double bound) {
  return {c, std::move(label), "< " + format_number(bound), format_number(got), "", got < bound};
}

inline Check at_least(int c, std::string label, double got, double bound) {
  return {c, std::move(label), ">= " + format_number(bound), format_number(got), "", got >= bound};
}

inline Check holds(int c, std::string label, std::string expected, std::string got, bool pass) {
  return {c, std::move(label), std::move(expected), std::move(got), "exact", pass};
}

/// Runs `body`; an exception becomes one failed row.
inline std::vector<Check> guarded(int c, const std::function<void(std::vector<Check>&)>& body) {
  std::vector<Check> out;
  try {
    body(out);
  } catch (const std::exception& e) {
    out.push_back({c, "completed without error", "no exception", e.what(), "", false});
  }
  return out;
}

inline std::string tuple(const ledger::BankLedger& b) {
  std::string s = "(";
  const auto c = b.columns();
  for (std::size_t j = 0; j < c.size(); ++j) s += (j ? "," : "") + format_number(c[j]);
  return s + ")";
}

inline dividend::EquityParams random_equity(RngStream& rng) {
  dividend::EquityParams p;
  p.mu = 0.1 * rng.uniform();
  p.sigma = 0.1 + 0.4 * rng.uniform();
  p.R = 0.02 + 0.2 * rng.uniform();
  p.lambda1 = 0.1 * rng.uniform();
  p.lambda2 = 0.1 * rng.uniform();
  p.delta1 = 0.5 + 4.0 * rng.uniform();
  p.delta2 = 0.5 + 4.0 * rng.uniform();
  return p;
}

inline network::BankNetwork random_network(RngStream& rng, std::size_t n) {
  std::vector<double> A, L, R, s;
  std::vector<std::vector<double>> M(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    A.push_back(1 + 60 * rng.uniform());
    L.push_back(60 * rng.uniform());
    R.push_back(rng.uniform());
    s.push_back(0.3);
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && rng.uniform() < 0.7) M[i][j] = 40 * rng.uniform();
  }
  return network::BankNetwork::make(A, L, M, R, s, 0.0);
}

// ------------------------------------------------------------------ suites

inline std::vector<Check> symbol_roots() {
  return guarded(1, [](auto& out) {
    const auto r = dividend::symbol_roots(dividend::EquityParams{});
    const double expected[] = {-4.08, -2.06, -0.84, 1.37};
    if (r.size() != 4) {
      out.push_back(holds(1, "root count", "4", std::to_string(r.size()), false));
      return;
    }
    for (int j = 0; j < 4; ++j) out.push_back(near(1, "root " + std::to_string(j + 1), expected[j], r[j], 0.01));
  });
}

inline std::vector<Check> symbol_origin() {
  return guarded(2, [](auto& out) {
    RngStream rng(2, 0);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const auto p = random_equity(rng);
      worst = std::max(worst, std::abs(dividend::symbol(0.0, p) + p.R));
    }
    out.push_back(near(2, "max |Psi(0) + R| over 100 draws", 0.0, worst, 1e-14));
  });
}

inline std::vector<Check> dividend_stationary() {
  return guarded(3, [](auto& out) {
    const dividend::EquityParams p;
    const auto b = dividend::stationary_barrier(p);
    out.push_back(near(3, "V(0)", 0.0, b.series(0.0), 1e-10));
    out.push_back(near(3, "V'(E*)", 1.0, b.series(b.E_star, 1), 1e-10));
    out.push_back(near(3, "V''(E*)", 0.0, b.series(b.E_star, 2), 1e-10));
    const auto s = dividend::solve_variational(p, dividend::SolverGrid{});
    double worst = 0.0;
    for (std::size_t k = 0; k < s.E.size(); ++k) worst = std::max(worst, std::abs(s.final_values()[k] - b.value(s.E[k])));
    out.push_back(near(3, "sup |V(tau=150) - V_stationary| on 2000 points", 0.0, worst, 1e-3));
    out.push_back(near(3, "free boundary at tau=150 vs E*", b.E_star, s.boundary.back(), 0.015));
  });
}

inline std::vector<Check> ledger_table() {
  return guarded(4, [](auto& out) {
    using ledger::BankLedger;
    const BankLedger b1{19, 6, 3, 20, 3, 5}, b2{24, 9, 4, 25, 7, 5};
    const auto r = ledger::two_bank_creation(b1, b2, 2.0);
    const BankLedger want[3][2] = {{b1, b2},
                                   {{21, 6, 1, 20, 3, 5}, {24, 9, 6, 27, 7, 5}},
                                   {{21, 6, 3, 20, 5, 5}, {24, 11, 4, 27, 7, 5}}};
    const char* step[] = {"I", "II", "III"};
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 2; ++i) {
        const auto& got = k < int(r.steps.size()) ? (i == 0 ? r.steps[k].bank1 : r.steps[k].bank2) : BankLedger{};
        out.push_back(holds(4, std::string("two-bank step ") + step[k] + " bank " + std::to_string(i + 1),
                            tuple(want[k][i]), tuple(got), got == want[k][i]));
      }
    BankLedger single;
    single.external_assets = 20;
    single.external_liabilities = 15;
    single.equity = 5;
    const auto issued = ledger::apply({single}, {ledger::EventKind::IssueLoanSingle, 2.0});
    ledger::Event repay{ledger::EventKind::RepayWithInterest, 2.0};
    repay.interest = 0.5;
    const auto repaid = ledger::apply(issued.ledgers, repay);
    const auto lost = ledger::apply(issued.ledgers, {ledger::EventKind::DefaultLoss, 2.0});
    auto ale = [](const BankLedger& b) {
      return "(" + format_number(b.assets()) + "," + format_number(b.liabilities()) + "," + format_number(b.equity) + ")";
    };
    const std::pair<const char*, std::pair<const BankLedger*, const char*>> seq[] = {
        {"single bank: issue", {&issued.ledgers[0], "(22,17,5)"}},
        {"single bank: repay with interest", {&repaid.ledgers[0], "(20.5,15,5.5)"}},
        {"single bank: default", {&lost.ledgers[0], "(20,17,3)"}}};
    for (const auto& [label, v] : seq) out.push_back(holds(4, label, v.second, ale(*v.first), ale(*v.first) == v.second));
  });
}

inline std::vector<Check> unit_square() {
  return guarded(5, [](auto& out) {
    const double dt = 1e-3, horizon = 50.0;
    const std::size_t paths = 1000;
    {
      goodwin::Params reg;
      reg.omega = 0.005;
      goodwin::Params sto = reg;
      sto.sigma_s = 0.015;
      sto.sigma_lambda = 0.005;
      goodwin::SimulationOptions o;
      o.horizon = horizon;
      o.dt = dt;
      const auto det = goodwin::simulate({0.75, 0.9}, reg, o);
      const auto dl = io::detail::column_range(det.trajectories, 1), ds = io::detail::column_range(det.trajectories, 0);
      out.push_back(holds(5, "goodwin regularized: (s_w, lambda_w) in (0,1)^2", "inside",
                          "s_w in [" + format_number(ds.first) + ", " + format_number(ds.second) + "], lambda_w in [" +
                              format_number(dl.first) + ", " + format_number(dl.second) + "]",
                          ds.first > 0 && ds.second < 1 && dl.first > 0 && dl.second < 1));
      o.paths = paths;
      o.seed = 5;
      const auto st = goodwin::simulate({0.75, 0.9}, sto, o);
      const auto sl = io::detail::column_range(st.trajectories, 1), ss = io::detail::column_range(st.trajectories, 0);
      out.push_back(holds(5, "goodwin stochastic, 1000 paths: inside (0,1)^2", "inside",
                          "lambda_w max " + format_number(sl.second),
                          ss.first > 0 && ss.second < 1 && sl.first > 0 && sl.second < 1));
      out.push_back(below(5, "goodwin stochastic clamp rate", st.clamp_rate(), 1e-3));
      goodwin::SimulationOptions c;
      c.horizon = 40.0;
      c.dt = dt;
      const auto cl = goodwin::simulate({0.75, 0.95}, goodwin::Params{}, c);
      out.push_back(holds(5, "goodwin classical exits lambda_w > 1", "max lambda_w > 1",
                          format_number(io::detail::column_range(cl.trajectories, 1).second),
                          io::detail::column_range(cl.trajectories, 1).second > 1.0));
    }
    {
      keen::Params reg;
      reg.omega = 0.005;
      keen::Params sto = reg;
      sto.sigma_s = 0.005;
      sto.sigma_lambda = 0.005;
      keen::SimulationOptions o;
      o.horizon = horizon;
      o.dt = dt;
      const auto det = keen::simulate({0.75, 0.9, 0.2}, reg, o);
      const auto dl = io::detail::column_range(det.trajectories, 1), ds = io::detail::column_range(det.trajectories, 0);
      out.push_back(holds(5, "keen regularized: (s_w, lambda_w) in (0,1)^2", "inside",
                          "lambda_w max " + format_number(dl.second),
                          ds.first > 0 && ds.second < 1 && dl.first > 0 && dl.second < 1));
      o.paths = paths;
      o.seed = 6;
      const auto st = keen::simulate({0.75, 0.9, 0.2}, sto, o);
      const auto sl = io::detail::column_range(st.trajectories, 1), ss = io::detail::column_range(st.trajectories, 0);
      out.push_back(holds(5, "keen stochastic, 1000 paths: inside (0,1)^2", "inside",
                          "lambda_w max " + format_number(sl.second),
                          ss.first > 0 && ss.second < 1 && sl.first > 0 && sl.second < 1));
      out.push_back(below(5, "keen stochastic clamp rate", st.clamp_rate(), 1e-3));
      keen::SimulationOptions c;
      c.dt = dt;
      const auto cl = keen::simulate({0.75, 0.95, 0.3}, keen::Params{}, c);
      out.push_back(holds(5, "keen classical exits lambda_w > 1", "max lambda_w > 1",
                          format_number(io::detail::column_range(cl.trajectories, 1).second),
                          io::detail::column_range(cl.trajectories, 1).second > 1.0));
    }
  });
}

inline std::vector<Check> conservation() {
  return guarded(6, [](auto& out) {
    const goodwin::Params p;
    const goodwin::State x0{0.75, 0.9};
    // one full cycle: s_w starts out falling, so stop when it next falls through its start
    const double dt = 1e-3;
    auto orbit = goodwin::integrate_rk4(x0, p, false, 60.0, dt);
    std::size_t end = orbit.size();
    for (std::size_t k = 2; k < orbit.size(); ++k)
      if (k * dt > 1.0 && orbit[k - 1].s_w > x0.s_w && orbit[k].s_w <= x0.s_w &&
          std::abs(orbit[k].lambda_w - x0.lambda_w) < 0.05) {
        end = k + 1;
        break;
      }
    const double c0 = goodwin::conservation(x0, p, false);
    double worst = 0.0;
    for (std::size_t k = 0; k < end; ++k) worst = std::max(worst, std::abs(goodwin::conservation(orbit[k], p, false) - c0));
    out.push_back(holds(6, "cycle detected", "period < 60", format_number((end - 1) * dt), end < orbit.size()));
    out.push_back(below(6, "classical RK4 relative drift over one cycle", worst / std::abs(c0), 1e-6));
    for (bool reg : {false, true}) {
      goodwin::Params q;
      if (reg) q.omega = 0.005;
      const auto fp = goodwin::fixed_point(q, reg);
      const auto d = reg ? goodwin::regularized_drift(fp, q) : goodwin::classical_drift(fp, q);
      out.push_back(below(6, reg ? "regularized drift at fixed point" : "classical drift at fixed point",
                          std::hypot(d[0], d[1]), 1e-12));
    }
  });
}

inline std::vector<Check> stock_flow() {
  return guarded(7, [](auto& out) {
    mmc::SimulationOptions o;
    o.horizon = 10.0;
    const auto s = mmc::simulate(mmc::State{}, mmc::Params{}, o).summary();
    out.push_back(holds(7, "constraints non-binding", "0 credit-crunch steps", std::to_string(s.credit_crunch_steps),
                        s.credit_crunch_steps == 0));
    out.push_back(below(7, "max |K_b - (L_r+L_f-D_r-D_f)| / max stock", s.max_stock_flow_residual, 1e-8));
    out.push_back(below(7, "max production identity residual", s.max_production_residual, 1e-12));
  });
}

inline std::vector<Check> clearing() {
  return guarded(8, [](auto& out) {
    RngStream rng(8, 0);
    std::size_t failures = 0;
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const auto net = random_network(rng, 2 + k % 4);
      std::vector<double> a;
      for (std::size_t i = 0; i < net.size(); ++i) a.push_back(80 * rng.uniform());
      try {
        const auto cv = network::clearing_vector(net, a);
        for (std::size_t i = 0; i < net.size(); ++i) {
          const double owes = net.total_liabilities(i);
          double in = a[i];
          for (std::size_t j = 0; j < net.size(); ++j) in += net.mutual[j][i] * cv.omega[j];
          worst = std::max(worst, std::abs((owes > 0 ? std::min(in / owes, 1.0) : 1.0) - cv.omega[i]));
        }
      } catch (const DomainError&) {
        ++failures;
      }
    }
    out.push_back(holds(8, "monotone non-increasing iteration, 1000 networks", "0 increases",
                        std::to_string(failures), failures == 0));
    out.push_back(below(8, "max fixed-point residual", worst, 1e-10));

    const int n = 10000;
    const double h = 1.0 / n;
    double grid_gap = 0.0;
    for (int c = 0; c < 20; ++c) {
      const auto net = random_network(rng, 2);
      const double a1 = 80 * rng.uniform(), a2 = 80 * rng.uniform();
      const auto cv = network::clearing_vector(net, std::vector<double>{a1, a2});
      const double o1 = net.total_liabilities(0), o2 = net.total_liabilities(1);
      const double m21 = net.mutual[1][0], m12 = net.mutual[0][1];
      auto f1 = [&](double w2) { return o1 > 0 ? std::min((a1 + m21 * w2) / o1, 1.0) : 1.0; };
      auto f2 = [&](double w1) { return o2 > 0 ? std::min((a2 + m12 * w1) / o2, 1.0) : 1.0; };
      const double t1 = 0.5 * h * (1 + (o1 > 0 ? m21 / o1 : 0)) + 1e-12;
      const double t2 = 0.5 * h * (1 + (o2 > 0 ? m12 / o2 : 0)) + 1e-12;
      double best1 = -1, best2 = -1;
      for (int i = n; i >= 0 && best1 < 0; --i)
        for (int j = n; j >= 0; --j) {
          const double w1 = i * h, w2 = j * h;
          if (std::abs(f1(w2) - w1) <= t1 && std::abs(f2(w1) - w2) <= t2) {
            best1 = w1;
            best2 = w2;
            break;
          }
        }
      grid_gap = std::max({grid_gap, std::abs(cv.omega[0] - best1), std::abs(cv.omega[1] - best2)});
    }
    out.push_back(near(8, "2-bank clearing vs 1e-4 grid search, 20 cases", 0.0, grid_gap, 1e-3));
  });
}

inline std::vector<Check> wedge_vs_mc() {
  return guarded(9, [](auto& out) {
    const wedge::TwoBankParams p;
    const wedge::TwoBankTerminalDomains d(p);
    const double horizon = 12.5;
    const std::size_t paths = 100000;
    const double xs[] = {0.5, 1.25, 2.0, 2.75, 3.5};
    network::SimulationOptions o;
    o.horizon = horizon;
    o.dt = 0.125;
    o.paths = paths;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        const std::array<double, 2> x0{xs[i], xs[j]};
        const double a1 = d.to_assets(0, x0[0]), a2 = d.to_assets(1, x0[1]);
        const auto net = network::BankNetwork::make({a1, a2}, {p.L[0], p.L[1]}, {{0.0, p.L12}, {p.L21, 0.0}},
                                                    {p.R[0], p.R[1]}, {p.sigma[0], p.sigma[1]}, 0.0,
                                                    CorrelationMatrix::pair(p.rho));
        o.seed = 9000 + 5 * i + j;
        const auto mc = network::survival_probabilities(network::simulate_paths(net, o));
        const double Q = wedge::joint_survival_Q(x0, d, horizon).value;
        const double Q1 = wedge::marginal_survival_Q(0, x0, d, horizon).value;
        const double q1 = wedge::standalone_survival_q(0, x0, d, horizon);
        const std::string at = " at X=(" + format_number(x0[0]) + "," + format_number(x0[1]) + ")";
        auto se = [&](double v, double s) { return std::max(s, std::sqrt(v * (1 - v) / paths)); };
        out.push_back(near(9, "Q" + at, Q, mc.joint.value, 3 * se(Q, mc.joint.std_error)));
        out.push_back(near(9, "Q1" + at, Q1, mc.marginal[0].value, 3 * se(Q1, mc.marginal[0].std_error)));
        out.push_back(at_least(9, "q1 - Q1" + at, q1 - Q1, 0.0));
      }
  });
}

inline std::vector<Check> green_conservation() {
  return guarded(10, [](auto& out) {
    const wedge::TwoBankTerminalDomains d(wedge::TwoBankParams{});
    const auto c = d.context();
    const std::array<double, 2> x0{std::log(10.0), std::log(50.0 / 22.0)};
    for (double t : {0.5, 1.0, 5.0}) {
      const double total = wedge::interior_mass(t, x0, c).value + wedge::cumulative_flux(t, 1, x0, c).value +
                           wedge::cumulative_flux(t, 2, x0, c).value;
      out.push_back(near(10, "mass + flux at scaled t=" + format_number(t), 1.0, total, 1e-6));
    }
    const auto cr = wedge::WedgeContext::make(0.5, {-0.5, -0.3});
    const double total = wedge::interior_mass(1.0, {0.8, 1.4}, cr).value +
                         wedge::cumulative_flux(1.0, 1, {0.8, 1.4}, cr).value +
                         wedge::cumulative_flux(1.0, 2, {0.8, 1.4}, cr).value;
    out.push_back(near(10, "mass + flux at rho=0.5", 1.0, total, 1e-6));

    auto absorbed = [](double t, double x, double y0, double xi) {
      auto phi = [&](double y) { return std::exp(-y * y / (2 * t)) / std::sqrt(2 * std::numbers::pi * t); };
      return phi(x - y0 - xi * t) - std::exp(-2 * xi * y0) * phi(x + y0 - xi * t);
    };
    const std::array<double, 2> xi{-0.5, -0.3};
    const auto c0 = wedge::WedgeContext::make(0.0, xi);
    const std::array<double, 2> y0{1.2, 1.7};
    double worst = 0.0;
    for (double t : {0.05, 0.5, 2.0, 7.0})
      for (const std::array<double, 2> x : {std::array<double, 2>{0.3, 1.1}, {2.0, 2.5}, {4.0, 0.2}})
        worst = std::max(worst, std::abs(wedge::wedge_green(t, x, y0, c0) -
                                         absorbed(t, x[0], y0[0], xi[0]) * absorbed(t, x[1], y0[1], xi[1])));
    out.push_back(near(10, "rho=0 Green's function vs image product", 0.0, worst, 1e-8));
  });
}

inline std::vector<Check> balance_identity() {
  return guarded(11, [](auto& out) {
    RngStream rng(11, 0);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      balance::FlowParams p;
      const double a[5] = {5 * rng.uniform(), 3 * rng.uniform(), 2 * rng.uniform(), 3 * rng.uniform(), rng.uniform()};
      const double w = 0.5 + 3 * rng.uniform();
      balance::ControlPath u;
      u.phi = [=](double t) { return a[0] * (1 + std::sin(w * t)); };
      u.psi = balance::constant_rate(a[1]);
      u.omega = [=](double t) { return a[2] * t / 10; };
      u.pi = [=](double t) { return a[3] * std::exp(-t); };
      u.delta = [=](double t) { return a[4] * (1 + std::cos(w * t)); };
      balance::EvolveOptions o;
      o.horizon = 10.0;
      o.dt = 0.01;
      worst = std::max(worst, balance::evolve(balance::FlowState{}, p, u, o).max_balance_residual);
    }
    out.push_back(below(11, "max |X+I+C-D-Y-E| / assets, 20 random-control runs", worst, 1e-10));

    balance::FlowParams q;
    q.lambda = q.mu = q.nu = q.xi = q.alpha = q.beta = q.r = q.zeta = q.sigma = q.R = 0.0;
    q.R = 0.07;
    const double delta = 0.8, T = 9.0;
    balance::EvolveOptions o;
    o.horizon = T;
    o.dt = 0.3;
    const auto tr = balance::evolve(balance::FlowState{}, q, balance::ControlPath::constant(0, 0, 0, 0, delta), o);
    out.push_back(near(11, "CF(T), dividends only", delta * ((1 - std::exp(-q.R * T)) / q.R - T * std::exp(-q.R * T)),
                       balance::cashflow_objective(tr, q), 1e-10));
    q.R = 0.03;
    q.lambda = 0.1;
    q.nu = 0.05;
    o.horizon = 5.0;
    o.dt = 0.5;
    const balance::FlowState s0;
    const auto tl = balance::evolve(s0, q, balance::ControlPath{}, o);
    out.push_back(near(11, "CF(T), loan interest only",
                       std::exp(-q.R * 5.0) * q.nu * s0.X * (1 - std::exp(-q.lambda * 5.0)) / q.lambda,
                       balance::cashflow_objective(tl, q), 1e-10));
  });
}

/// Small stochastic configs for every model with random input.
inline std::vector<std::pair<std::string, io::Json>> determinism_configs() {
  using io::Json;
  return {
      {"goodwin", Json::parse(R"({"model":"goodwin","parameters":{"omega":0.005,"sigma_s":0.015,"sigma_lambda":0.005},
                                  "run":{"horizon":5,"paths":6,"seed":3}})")},
      {"keen", Json::parse(R"({"model":"keen","parameters":{"omega":0.005,"sigma_s":0.005,"sigma_lambda":0.005},
                               "run":{"horizon":5,"paths":6,"seed":4}})")},
      {"mmc", Json::parse(R"({"model":"mmc","parameters":{"sigma_C":0.05,"sigma_K":0.05},
                              "run":{"horizon":2,"paths":5,"seed":5}})")},
      {"network", Json::parse(R"({"model":"network","banks":[
                                    {"assets":80,"liabilities":50,"sigma":0.4,"owes":[0,10,0]},
                                    {"assets":90,"liabilities":60,"sigma":0.3,"owes":[20,0,5]},
                                    {"assets":70,"liabilities":40,"sigma":0.5,"owes":[0,5,0]}],
                                  "jumps":{"decay":[2,2,2],"subsets":[{"banks":[0,1],"intensity":0.2}]},
                                  "run":{"horizon":2,"dt":0.05,"paths":3000,"seed":6,"emit_paths":true}})")},
      {"wedge", Json::parse(R"({"model":"wedge","grid":{"x1":[1,2,2],"x2":[1,2,2]},
                                "run":{"horizon":2,"paths":2000,"seed":7}})")},
      {"balance", Json::parse(R"({"model":"balance","parameters":{"sigma":0.3},"controls":{"phi":2,"delta":0.5},
                                  "run":{"horizon":3,"dt":0.01,"stochastic":true,"paths":7,"seed":8}})")},
  };
}

inline std::vector<Check> determinism() {
  return guarded(12, [](auto& out) {
    for (const auto& [model, cfg] : determinism_configs()) {
      auto digest = [&](std::size_t workers) {
        io::Overrides o;
        o.workers = workers;
        const auto r = io::run_scenario(cfg, o);
        std::string all;
        for (const auto& f : r.files)
          if (f.name.ends_with(".csv")) all += f.name + "=" + io::checksum(f.content) + ";";
        return all;
      };
      const auto one = digest(1), again = digest(1), three = digest(3);
      out.push_back(holds(12, model + ": CSV checksums, 1 vs 3 workers and repeat", one, three,
                          one == three && one == again && !one.empty()));
    }
  });
}

}  // namespace detail

inline const std::vector<Suite>& suites() {
  static const std::vector<Suite> all{
      {"fig13-roots", 1, "symbol roots", detail::symbol_roots},
      {"symbol-origin", 2, "symbol at the origin", detail::symbol_origin},
      {"dividend-stationary", 3, "time-dependent vs stationary dividend value", detail::dividend_stationary},
      {"ledger-56b", 4, "two-bank money creation table", detail::ledger_table},
      {"unit-square", 5, "unit-square confinement", detail::unit_square},
      {"conservation", 6, "conserved quantity", detail::conservation},
      {"stock-flow", 7, "stock-flow identity", detail::stock_flow},
      {"clearing", 8, "clearing vector", detail::clearing},
      {"wedge-vs-mc", 9, "wedge survival vs Monte Carlo", detail::wedge_vs_mc},
      {"green-conservation", 10, "Green's function conservation", detail::green_conservation},
      {"balance-identity", 11, "balance-sheet identity and cash flow", detail::balance_identity},
      {"determinism", 12, "determinism across worker counts", detail::determinism},
  };
  return all;
}

inline const Suite* find_suite(const std::string& name) {
  for (const auto& s : suites())
    if (s.name == name) return &s;
  return nullptr;
}

/// Rows of `name`, or of every suite for "all". Unknown names throw.
inline std::vector<Check> run(const std::string& name) {
  if (name == "all") {
    std::vector<Check> out;
    for (const auto& s : suites()) {
      auto rows = s.run();
      out.insert(out.end(), rows.begin(), rows.end());
    }
    return out;
  }
  const auto* s = find_suite(name);
  if (!s) {
    std::string list = "all";
    for (const auto& x : suites()) list += ", " + x.name;
    throw ParameterError("unknown suite '" + name + "' (known: " + list + ")");
  }
  return s->run();
}

inline bool all_pass(const std::vector<Check>& rows) {
  return !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const Check& c) { return c.pass; });
}

/// Fixed-width table: criterion, label, expected, got, tolerance, pass.
inline std::string table(const std::vector<Check>& rows) {
  std::size_t w[4] = {5, 8, 3, 9};
  for (const auto& r : rows) {
    w[0] = std::max(w[0], r.label.size());
    w[1] = std::max(w[1], r.expected.size());
    w[2] = std::max(w[2], r.got.size());
    w[3] = std::max(w[3], r.tolerance.size());
  }
  std::ostringstream os;
  auto pad = [](const std::string& s, std::size_t n) { return s + std::string(n > s.size() ? n - s.size() : 0, ' '); };
  os << pad("crit", 5) << pad("check", w[0] + 2) << pad("expected", w[1] + 2) << pad("got", w[2] + 2)
     << pad("tolerance", w[3] + 2) << "pass\n";
  for (const auto& r : rows)
    os << pad(std::to_string(r.criterion), 5) << pad(r.label, w[0] + 2) << pad(r.expected, w[1] + 2)
       << pad(r.got, w[2] + 2) << pad(r.tolerance, w[3] + 2) << (r.pass ? "PASS" : "FAIL") << "\n";
  return os.str();
}

}  // namespace circuitlab::verify
