#pragma once

// Modern monetary circuit: rentiers, firms and banks with stock-flow
// consistent deposits, loans and capital, plus the auxiliary labour block.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "circuitlab/core.hpp"
#include "circuitlab/goodwin.hpp"
#include "circuitlab/stochastic_engine.hpp"

namespace circuitlab::mmc {

enum class UpsilonMode { OneStep, FixedPoint, Newton };

inline UpsilonMode parse_upsilon_mode(const std::string& s) {
  if (s == "one-step") return UpsilonMode::OneStep;
  if (s == "fixed-point") return UpsilonMode::FixedPoint;
  if (s == "newton") return UpsilonMode::Newton;
  throw ParameterError("mmc: unknown upsilon mode '" + s + "'");
}

struct Params {
  double kappa_C = 0.5;
  double sigma_C = 0.0;
  double sigma_K = 0.0;
  double alpha0 = 0.5;
  double alpha1 = 0.5;
  double upsilon0 = -1.6;
  double upsilon1 = 1.1;
  double upsilon2 = 0.1;
  double upsilon3 = -0.2;
  double delta_rf = 0.75;
  double delta_ff = 0.25;
  double delta_rb = 0.5;
  double delta_bb = 0.5;
  double xi_Delta = 0.025;
  double xi_A = 0.02;
  double r_D = 0.02;
  double r_L = 0.04;
  double nu_f = 0.13;
  double nu_b = 0.08;
  // labour block
  double a = 0.05;
  double b = 0.05;
  double c = 0.075;
  double omega = 0.005;
  double sigma_s = 0.0;
  double sigma_lambda = 0.0;
  double alpha = 0.0;
  double beta = 0.0;

  void validate() const {
    auto fraction = [](double v, const char* name) {
      require(v >= 0.0 && v <= 1.0, std::string("mmc: ") + name + " must lie in [0,1]");
    };
    fraction(delta_rf, "delta_rf");
    fraction(delta_ff, "delta_ff");
    fraction(delta_rb, "delta_rb");
    fraction(delta_bb, "delta_bb");
    require(std::abs(delta_ff - (1.0 - delta_rf)) < 1e-12, "mmc: delta_ff must equal 1 - delta_rf");
    require(std::abs(delta_bb - (1.0 - delta_rb)) < 1e-12, "mmc: delta_bb must equal 1 - delta_rb");
    for (double v : {kappa_C, xi_Delta, xi_A, r_D, r_L, nu_b, omega, alpha, beta})
      require(v >= 0.0, "mmc: rates must be non-negative");
    require(nu_f > 0.0, "mmc: nu_f must be positive");
    require(sigma_C >= 0 && sigma_K >= 0 && sigma_s >= 0 && sigma_lambda >= 0,
            "mmc: volatilities must be non-negative");
  }
  bool stochastic() const noexcept {
    return sigma_C > 0 || sigma_K > 0 || sigma_s > 0 || sigma_lambda > 0;
  }
};

struct State {
  double C_r = 3.0;
  double D_r = 30.0;
  double L_r = 20.0;
  double D_f = 20.0;
  double L_f = 50.0;
  double K_f = 40.0;
  double K_b = 20.0;
  double theta_w = 1.0;
  double N_w = 1.0;
  double s_w = 0.7;
  double lambda_w = 0.95;

  double max_stock() const {
    return std::max({std::abs(D_r), std::abs(L_r), std::abs(D_f), std::abs(L_f), std::abs(K_f),
                     std::abs(K_b)});
  }
  double stock_flow_residual() const { return K_b - (L_r + L_f - D_r - D_f); }
};

inline double net_interest(double D, double L, const Params& p) { return p.r_D * D - p.r_L * L; }

/// Logistic map of the real line onto (0, 1).
inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-2.0 * x)); }

namespace detail {

inline double upsilon_argument(const State& x, const Params& p, double upsilon) {
  return p.upsilon0 + p.upsilon1 * x.C_r / ((1.0 - upsilon) * p.nu_f * x.K_f) +
         p.upsilon2 * x.D_f / x.K_f + p.upsilon3 * x.L_f / x.K_f;
}

}  // namespace detail

/// Investment propensity υ_f solving υ = Φ(υ0 + υ1 C_r/((1−υ)ν_f K_f) + υ2 D_f/K_f + υ3 L_f/K_f).
inline double solve_upsilon(const State& x, const Params& p, UpsilonMode mode) {
  if (!(x.K_f > 0.0)) throw DomainError("mmc: K_f must be positive");
  if (!(x.C_r > 0.0)) throw DomainError("mmc: C_r must be positive");
  const double start = logistic(p.upsilon0);
  if (mode == UpsilonMode::OneStep) return logistic(detail::upsilon_argument(x, p, start));

  if (mode == UpsilonMode::FixedPoint) {
    double u = start;
    double step = 0.0;
    for (int it = 0; it < 200; ++it) {
      const double next = 0.5 * u + 0.5 * logistic(detail::upsilon_argument(x, p, u));
      step = std::abs(next - u);
      u = next;
      if (!(u < 1.0)) break;
      if (step < 1e-12) {
        // creeping towards 1 also shrinks the step; a genuine root has a
        // residual far below the distance to the boundary
        const double h = std::abs(u - logistic(detail::upsilon_argument(x, p, u)));
        if (h > 1e-6 * (1.0 - u))
          throw ConvergenceError("mmc: no interior upsilon fixed point", h);
        return u;
      }
    }
    throw ConvergenceError("mmc: upsilon fixed-point iteration did not converge", step);
  }

  double u = start;
  double h = 0.0;
  for (int it = 0; it < 100; ++it) {
    const double g = detail::upsilon_argument(x, p, u);
    const double phi = logistic(g);
    h = u - phi;
    if (std::abs(h) < 1e-14) return u;
    const double dg = p.upsilon1 * x.C_r / ((1.0 - u) * (1.0 - u) * p.nu_f * x.K_f);
    const double dh = 1.0 - 2.0 * phi * (1.0 - phi) * dg;
    double next = u - h / dh;
    if (!(next > 0.0 && next < 1.0)) next = 0.5 * (u + (next >= 1.0 ? 1.0 : 0.0));
    if (std::abs(next - u) < 1e-15) return next;
    u = next;
  }
  throw ConvergenceError("mmc: upsilon Newton iteration did not converge", std::abs(h));
}

struct Derived {
  double ni_r, ni_f;
  double upsilon_f, gamma_f;
  double Y_f;          // demand-determined production
  double Y_f_capped;   // min(Y_f, ν_f K_f)
  bool capacity_bound;
  double I_f, u_f, C_w;
  double Pi_f, Pi_f_d, Pi_f_u;
  double Pi_b, Pi_b_d, Pi_b_u;
  double pi_f;
  double CF_r, CF_f;
  double Sigma_r;
  double C_bar;
  double P;

  double production_residual(double C_r) const {
    return (Y_f - (C_w + C_r + I_f)) / std::max(std::abs(Y_f), 1e-300);
  }
};

inline Derived derived_quantities(const State& x, const Params& p, double upsilon) {
  if (!(upsilon > 0.0 && upsilon < 1.0))
    throw DomainError("mmc: degenerate investment propensity upsilon_f=" + std::to_string(upsilon));
  const double s_f = 1.0 - x.s_w;
  Derived d{};
  d.ni_r = net_interest(x.D_r, x.L_r, p);
  d.ni_f = net_interest(x.D_f, x.L_f, p);
  d.upsilon_f = upsilon;
  d.gamma_f = upsilon * s_f;
  const double C_over = x.C_r / (1.0 - upsilon);
  d.Y_f = C_over / s_f;
  d.Y_f_capped = std::min(d.Y_f, p.nu_f * x.K_f);
  d.capacity_bound = d.Y_f > p.nu_f * x.K_f;
  d.I_f = upsilon * C_over;
  d.u_f = d.Y_f / (p.nu_f * x.K_f);
  d.C_w = x.s_w * d.Y_f;
  d.Pi_f = C_over + d.ni_f;
  d.Pi_f_d = p.delta_rf * d.Pi_f;
  d.Pi_f_u = p.delta_ff * d.Pi_f;
  d.Pi_b = -p.xi_Delta * (x.L_r + x.L_f) - d.ni_r - d.ni_f;
  d.Pi_b_d = p.delta_rb * d.Pi_b;
  d.Pi_b_u = p.delta_bb * d.Pi_b;
  d.pi_f = d.Pi_f / x.K_f;
  d.CF_r = d.ni_r + d.Pi_f_d + d.Pi_b_d - x.C_r;
  d.CF_f = d.Pi_f_u - d.gamma_f * d.Y_f;
  d.Sigma_r = x.D_r - x.L_r + x.K_f + x.D_f - x.L_f + x.K_b;
  d.C_bar = p.alpha0 * (p.delta_bb * d.ni_r + (p.delta_rf - p.delta_rb) * d.ni_f +
                        p.delta_rf * C_over) +
            p.alpha1 * p.nu_f * x.K_f;
  d.P = C_over / (s_f * x.lambda_w * x.theta_w * x.N_w);
  return d;
}

inline Derived derived_quantities(const State& x, const Params& p,
                                  UpsilonMode mode = UpsilonMode::FixedPoint) {
  return derived_quantities(x, p, solve_upsilon(x, p, mode));
}

/// Component order of drift and diffusion vectors.
enum Component : std::size_t { kC, kDr, kLr, kDf, kLf, kKf, kKb, kTheta, kN, kS, kLambda, kComponents };

struct Dynamics {
  std::array<double, kComponents> drift{};
  /// Diagonal loadings on independent Brownian drivers (W_C, W_K, W_s, W_λ).
  std::array<double, kComponents> diffusion{};
  bool credit_crunch = false;
  double unmet_financing = 0.0;  // suppressed loan creation rate
  Derived derived{};
};

inline Dynamics drift_and_diffusion(const State& x, const Params& p, double upsilon) {
  Dynamics out;
  const Derived d = derived_quantities(x, p, upsilon);
  out.derived = d;
  const double C_over = x.C_r / (1.0 - upsilon);
  const double loans = x.L_r + x.L_f;
  const double A = p.delta_bb * d.ni_r + (p.delta_rf - p.delta_rb) * d.ni_f -
                   p.delta_rb * p.xi_Delta * loans - (p.delta_ff - upsilon) * C_over;
  const double B = p.delta_ff * d.ni_f + (p.delta_ff - upsilon) * C_over;
  double new_Lr = positive_part(-A), new_Lf = positive_part(-B);
  // lending allowed only while ν_b (L_r + L_f) − K_b < 0
  if (!(p.nu_b * loans - x.K_b < 0.0)) {
    out.credit_crunch = new_Lr + new_Lf > 0.0;
    out.unmet_financing = new_Lr + new_Lf;
    new_Lr = new_Lf = 0.0;
  }
  auto& f = out.drift;
  f[kC] = p.kappa_C * (d.C_bar - x.C_r);
  f[kDr] = positive_part(A);
  f[kLr] = -p.xi_Delta * x.L_r + new_Lr;
  f[kDf] = positive_part(B);
  f[kLf] = -p.xi_Delta * x.L_f + new_Lf;
  f[kKf] = upsilon * C_over - p.xi_A * x.K_f;
  f[kKb] = -p.delta_bb * (p.xi_Delta * loans + d.ni_r + d.ni_f);
  f[kTheta] = p.alpha * x.theta_w;
  f[kN] = p.beta * x.N_w;
  goodwin::require_interior({x.s_w, x.lambda_w});
  const double s_f = 1.0 - x.s_w, lambda_u = 1.0 - x.lambda_w;
  f[kS] = -(p.a - p.b * x.lambda_w - p.omega / lambda_u) * x.s_w;
  f[kLambda] = (upsilon * C_over / (p.nu_f * x.K_f) - p.c - p.omega / s_f) * x.lambda_w;
  auto& g = out.diffusion;
  g[kC] = p.sigma_C * x.C_r;
  g[kKf] = p.sigma_K * x.K_f;
  g[kS] = p.sigma_s * std::sqrt(x.s_w * s_f);
  g[kLambda] = p.sigma_lambda * std::sqrt(x.lambda_w * lambda_u);
  return out;
}

inline Dynamics drift_and_diffusion(const State& x, const Params& p,
                                    UpsilonMode mode = UpsilonMode::FixedPoint) {
  return drift_and_diffusion(x, p, solve_upsilon(x, p, mode));
}

struct SimulationOptions {
  double horizon = 10.0;
  double dt = 1e-3;
  std::size_t paths = 1;
  std::uint64_t seed = 0;
  UpsilonMode mode = UpsilonMode::FixedPoint;
  double epsilon = 1e-9;
  std::size_t max_records = 2001;
};

struct PathDiagnostics {
  double max_stock_flow_residual = 0.0;  // relative to the largest stock, non-crunch steps only
  double max_production_residual = 0.0;
  double max_upsilon_gap = 0.0;          // |one-step − solved|
  std::uint64_t credit_crunch_steps = 0;
  std::uint64_t capacity_bound_steps = 0;
  std::uint64_t floor_hits = 0;
  std::uint64_t clamp_events = 0;
  double unmet_financing = 0.0;          // integrated suppressed loan creation
};

struct Run {
  TrajectorySet trajectories;
  std::vector<PathDiagnostics> diagnostics;

  PathDiagnostics summary() const {
    PathDiagnostics s;
    for (const auto& d : diagnostics) {
      s.max_stock_flow_residual = std::max(s.max_stock_flow_residual, d.max_stock_flow_residual);
      s.max_production_residual = std::max(s.max_production_residual, d.max_production_residual);
      s.max_upsilon_gap = std::max(s.max_upsilon_gap, d.max_upsilon_gap);
      s.credit_crunch_steps += d.credit_crunch_steps;
      s.capacity_bound_steps += d.capacity_bound_steps;
      s.floor_hits += d.floor_hits;
      s.clamp_events += d.clamp_events;
      s.unmet_financing += d.unmet_financing;
    }
    return s;
  }
};

inline const std::vector<std::string>& column_names() {
  static const std::vector<std::string> names{
      "C_r", "D_r", "L_r", "D_f", "L_f", "K_f", "K_b", "theta_w", "N_w", "s_w", "lambda_w",
      "P", "upsilon_f", "Y_f", "Y_f_capped", "I_f", "u_f", "C_w", "CF_r", "CF_f", "Pi_f",
      "Pi_b", "stock_flow_residual", "credit_crunch"};
  return names;
}

/// Joint Euler evolution. The initial state must satisfy
/// K_b = L_r + L_f − D_r − D_f. Losing the propensity solution is reported as a
/// DomainError carrying the time.
inline Run simulate(const State& initial, const Params& p, const SimulationOptions& opt) {
  p.validate();
  require(opt.paths >= 1, "mmc: paths must be >= 1");
  const double residual0 = initial.stock_flow_residual();
  if (std::abs(residual0) > 1e-9 * std::max(1.0, initial.max_stock()))
    throw ParameterError("mmc: initial state violates K_b = L_r + L_f - D_r - D_f (residual " +
                         std::to_string(residual0) + ")");
  for (double v : {initial.D_r, initial.L_r, initial.D_f, initial.L_f})
    if (v < 0.0) throw ParameterError("mmc: initial stocks must be non-negative");
  if (!(initial.C_r > 0.0) || !(initial.K_f > 0.0))
    throw ParameterError("mmc: initial C_r and K_f must be positive");
  if (!(initial.theta_w > 0.0) || !(initial.N_w > 0.0))
    throw ParameterError("mmc: initial theta_w and N_w must be positive");
  goodwin::require_interior({initial.s_w, initial.lambda_w});

  const auto plan = StepPlan::make(opt.horizon, opt.dt, opt.max_records);
  Run run;
  run.trajectories.names = column_names();
  run.trajectories.times = plan.record_times();
  run.trajectories.paths.resize(opt.paths);
  run.diagnostics.resize(opt.paths);
  const double sq = std::sqrt(plan.dt);

  parallel_for(opt.paths, [&](std::size_t path) {
    RngStream rng(opt.seed, path);
    auto& rec = run.trajectories.paths[path];
    auto& diag = run.diagnostics[path];
    State x = initial;
    double t = 0.0;
    auto solve = [&](const State& s) {
      try {
        return solve_upsilon(s, p, opt.mode);
      } catch (const ConvergenceError& e) {
        throw DomainError("mmc: investment propensity lost at t=" + std::to_string(t) + ": " + e.what());
      }
    };
    auto record = [&](const Dynamics& dyn) {
      const auto& d = dyn.derived;
      const double vals[] = {x.C_r,        x.D_r,       x.L_r,          x.D_f,  x.L_f,
                             x.K_f,        x.K_b,       x.theta_w,      x.N_w,  x.s_w,
                             x.lambda_w,   d.P,         d.upsilon_f,    d.Y_f,  d.Y_f_capped,
                             d.I_f,        d.u_f,       d.C_w,          d.CF_r, d.CF_f,
                             d.Pi_f,       d.Pi_b,      x.stock_flow_residual(),
                             dyn.credit_crunch ? 1.0 : 0.0};
      rec.insert(rec.end(), std::begin(vals), std::end(vals));
    };

    double u = solve(x);
    Dynamics dyn = drift_and_diffusion(x, p, u);
    record(dyn);
    for (std::size_t k = 1; k <= plan.steps; ++k) {
      const auto& d = dyn.derived;
      diag.max_production_residual =
          std::max(diag.max_production_residual, std::abs(d.production_residual(x.C_r)));
      diag.max_upsilon_gap =
          std::max(diag.max_upsilon_gap, std::abs(solve_upsilon(x, p, UpsilonMode::OneStep) - u));
      diag.capacity_bound_steps += d.capacity_bound;
      if (dyn.credit_crunch) {
        ++diag.credit_crunch_steps;
        diag.unmet_financing += dyn.unmet_financing * plan.dt;
      }

      std::array<double, 4> dw{0.0, 0.0, 0.0, 0.0};
      if (p.stochastic())
        for (auto& w : dw) w = rng.normal() * sq;
      const auto& f = dyn.drift;
      const auto& g = dyn.diffusion;
      State n = x;
      n.C_r += f[kC] * plan.dt + g[kC] * dw[0];
      n.D_r += f[kDr] * plan.dt;
      n.L_r += f[kLr] * plan.dt;
      n.D_f += f[kDf] * plan.dt;
      n.L_f += f[kLf] * plan.dt;
      n.K_f += f[kKf] * plan.dt + g[kKf] * dw[1];
      n.K_b += f[kKb] * plan.dt;
      n.theta_w += f[kTheta] * plan.dt;
      n.N_w += f[kN] * plan.dt;
      n.s_w += f[kS] * plan.dt + g[kS] * dw[2];
      n.lambda_w += f[kLambda] * plan.dt + g[kLambda] * dw[3];

      for (double v : {n.C_r, n.D_r, n.L_r, n.D_f, n.L_f, n.K_f, n.K_b, n.s_w, n.lambda_w})
        if (!std::isfinite(v))
          throw DomainError("mmc: non-finite state at t=" + std::to_string(k * plan.dt));
      auto floor_at = [&](double& v, double lo) {
        if (v < lo) {
          v = lo;
          ++diag.floor_hits;
        }
      };
      floor_at(n.C_r, opt.epsilon);
      floor_at(n.K_f, opt.epsilon);
      floor_at(n.D_r, 0.0);
      floor_at(n.L_r, 0.0);
      floor_at(n.D_f, 0.0);
      floor_at(n.L_f, 0.0);
      bool hit = false;
      n.s_w = goodwin::clamp_unit(n.s_w, opt.epsilon, hit);
      n.lambda_w = goodwin::clamp_unit(n.lambda_w, opt.epsilon, hit);
      diag.clamp_events += hit;

      x = n;
      t = static_cast<double>(k) * plan.dt;
      if (!dyn.credit_crunch)
        diag.max_stock_flow_residual = std::max(
            diag.max_stock_flow_residual, std::abs(x.stock_flow_residual()) / std::max(1.0, x.max_stock()));
      u = solve(x);
      dyn = drift_and_diffusion(x, p, u);
      if (plan.record(k)) record(dyn);
    }
    diag.max_production_residual =
        std::max(diag.max_production_residual, std::abs(dyn.derived.production_residual(x.C_r)));
  });
  return run;
}

}  // namespace circuitlab::mmc
