#pragma once

// Keen's extension of the Goodwin pair with firms' leverage Γ_f = D_f / K_f.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "circuitlab/core.hpp"
#include "circuitlab/goodwin.hpp"
#include "circuitlab/stochastic_engine.hpp"

namespace circuitlab::keen {

struct Params {
  double a = 0.225;
  double b = 0.20;
  double c = 0.075;
  double d = 0.03;
  double r_L = 0.03;
  double nu_f = 0.1;
  double p = -0.0065;
  double q = 20.0;
  double r = -5.0;
  double omega = 0.0;
  double sigma_s = 0.0;
  double sigma_lambda = 0.0;
  double exponent_cap = 700.0;

  void validate() const {
    require(nu_f > 0, "keen: nu_f must be positive");
    require(q >= 0, "keen: q must be non-negative");
    require(omega >= 0, "keen: omega must be non-negative");
    require(sigma_s >= 0 && sigma_lambda >= 0, "keen: volatilities must be non-negative");
    require(exponent_cap > 0, "keen: exponent_cap must be positive");
  }
  bool stochastic() const noexcept { return sigma_s > 0 || sigma_lambda > 0; }
};

struct State {
  double s_w;
  double lambda_w;
  double Gamma_f;
};

/// f(x) = p + exp(qx + r), with the exponent capped. `capped` is set when the
/// cap was applied.
inline double profit_function(double x, const Params& p, bool* capped = nullptr) {
  double e = p.q * x + p.r;
  if (e > p.exponent_cap) {
    e = p.exponent_cap;
    if (capped) *capped = true;
  }
  return p.p + std::exp(e);
}

/// Drift with an arbitrary investment function f.
template <class F>
std::array<double, 3> drift_with(const State& x, const Params& p, bool regularized,
                                 bool with_nu_factor, F&& f) {
  const double s_f = 1.0 - x.s_w;
  const double fx = f(s_f - p.r_L * x.Gamma_f / p.nu_f);
  double ds, dl;
  if (regularized) {
    goodwin::require_interior({x.s_w, x.lambda_w});
    const double lambda_u = 1.0 - x.lambda_w;
    ds = -(p.a - p.b * x.lambda_w - p.omega / lambda_u) * x.s_w;
    dl = ((with_nu_factor ? p.nu_f * fx : fx) - p.c - p.omega / s_f) * x.lambda_w;
  } else {
    ds = -(p.a - p.b * x.lambda_w) * x.s_w;
    dl = (p.nu_f * fx - p.c) * x.lambda_w;
  }
  const double dg = (p.r_L - p.nu_f * fx + p.d) * x.Gamma_f + p.nu_f * (fx - s_f);
  return {ds, dl, dg};
}

inline std::array<double, 3> keen_drift(const State& x, const Params& p, bool regularized,
                                        bool with_nu_factor = true, bool* capped = nullptr) {
  return drift_with(x, p, regularized, with_nu_factor,
                    [&](double v) { return profit_function(v, p, capped); });
}

struct SimulationOptions {
  double horizon = 100.0;
  double dt = 1e-3;
  std::size_t paths = 1;
  std::uint64_t seed = 0;
  double epsilon = 1e-9;
  std::optional<bool> regularized;
  bool with_nu_factor = true;
  double minsky_threshold = 10.0;
  std::size_t max_records = 2001;
};

struct MinskyEvent {
  std::size_t path;
  double time;
};

struct Run {
  TrajectorySet trajectories;  // columns s_w, lambda_w, Gamma_f
  std::uint64_t clamp_events = 0;
  std::uint64_t step_count = 0;
  std::uint64_t exponent_caps = 0;
  std::vector<MinskyEvent> minsky_events;
  bool regularized = false;

  double clamp_rate() const {
    return step_count ? static_cast<double>(clamp_events) / static_cast<double>(step_count) : 0.0;
  }
};

/// Euler paths. (s_w, λ_w) are clamped as in the Goodwin simulator; Γ_f is not.
/// A path whose leverage exceeds the Minsky threshold stops at that step; its
/// recorded rows end at the last grid time reached.
inline Run simulate(const State& initial, const Params& p, const SimulationOptions& opt) {
  p.validate();
  const bool regularized = opt.regularized.value_or(p.omega > 0.0);
  const bool clamp = regularized || p.stochastic();
  if (clamp) goodwin::require_interior({initial.s_w, initial.lambda_w});
  if (!(opt.epsilon > 0.0 && opt.epsilon < 0.5)) throw ParameterError("keen: epsilon must be in (0, 0.5)");
  require(opt.paths >= 1, "keen: paths must be >= 1");
  require(opt.minsky_threshold > 0, "keen: minsky_threshold must be positive");
  const auto plan = StepPlan::make(opt.horizon, opt.dt, opt.max_records);

  Run run;
  run.regularized = regularized;
  run.trajectories.names = {"s_w", "lambda_w", "Gamma_f"};
  run.trajectories.times = plan.record_times();
  run.trajectories.paths.resize(opt.paths);
  std::vector<std::uint64_t> clamps(opt.paths, 0), steps(opt.paths, 0), caps(opt.paths, 0);
  std::vector<double> minsky(opt.paths, -1.0);
  const double sq = std::sqrt(plan.dt);

  parallel_for(opt.paths, [&](std::size_t path) {
    RngStream rng(opt.seed, path);
    auto& rec = run.trajectories.paths[path];
    State x = initial;
    auto push = [&] {
      rec.push_back(x.s_w);
      rec.push_back(x.lambda_w);
      rec.push_back(x.Gamma_f);
    };
    push();
    for (std::size_t k = 1; k <= plan.steps; ++k) {
      bool capped = false;
      const auto dr = keen_drift(x, p, regularized, opt.with_nu_factor, &capped);
      caps[path] += capped;
      double s = x.s_w + dr[0] * plan.dt;
      double l = x.lambda_w + dr[1] * plan.dt;
      const double g = x.Gamma_f + dr[2] * plan.dt;
      if (p.stochastic()) {
        const double z1 = rng.normal(), z2 = rng.normal();
        s += p.sigma_s * std::sqrt(std::max(0.0, x.s_w * (1.0 - x.s_w))) * z1 * sq;
        l += p.sigma_lambda * std::sqrt(std::max(0.0, x.lambda_w * (1.0 - x.lambda_w))) * z2 * sq;
      }
      if (!std::isfinite(s) || !std::isfinite(l) || !std::isfinite(g))
        throw DomainError("keen: non-finite state at t=" + std::to_string(k * plan.dt));
      if (clamp) {
        bool hit = false;
        s = goodwin::clamp_unit(s, opt.epsilon, hit);
        l = goodwin::clamp_unit(l, opt.epsilon, hit);
        clamps[path] += hit;
      }
      x = {s, l, g};
      ++steps[path];
      if (x.Gamma_f > opt.minsky_threshold) {
        minsky[path] = static_cast<double>(k) * plan.dt;
        if (plan.record(k)) push();
        return;
      }
      if (plan.record(k)) push();
    }
  });
  for (std::size_t i = 0; i < opt.paths; ++i) {
    run.clamp_events += clamps[i];
    run.step_count += steps[i];
    run.exponent_caps += caps[i];
    if (minsky[i] >= 0.0) run.minsky_events.push_back({i, minsky[i]});
  }
  return run;
}

}  // namespace circuitlab::keen
