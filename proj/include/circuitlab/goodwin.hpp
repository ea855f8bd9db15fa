#pragma once

// Lotka–Volterra–Goodwin dynamics for the wage share and employment rate,
// classical and regularized, with optional Jacobi noise.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "circuitlab/core.hpp"
#include "circuitlab/stochastic_engine.hpp"

namespace circuitlab::goodwin {

struct Params {
  double a = 0.225;
  double b = 0.20;
  double c = 0.4;
  double d = 0.6;
  double omega = 0.0;
  double sigma_s = 0.0;
  double sigma_lambda = 0.0;

  void validate() const {
    require(a > 0 && b > 0 && c > 0 && d > 0, "goodwin: a, b, c, d must be positive");
    require(omega >= 0, "goodwin: omega must be non-negative");
    require(sigma_s >= 0 && sigma_lambda >= 0, "goodwin: volatilities must be non-negative");
  }
  bool stochastic() const noexcept { return sigma_s > 0 || sigma_lambda > 0; }
};

/// Growth-rate composites feeding the employment equation:
/// dλ/λ = (ν_f s_f − α − β − γ − ξ_A) dt.
struct Composites {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double nu_f = 0.0;
  double xi_A = 0.0;

  double c() const noexcept { return nu_f - (alpha + beta + gamma + xi_A); }
  double d() const noexcept { return nu_f; }
};

/// Settle c and d from direct values and/or composites. Direct values win; a
/// disagreement is appended to `warnings`.
inline std::pair<double, double> resolve_cd(std::optional<double> c, std::optional<double> d,
                                            const std::optional<Composites>& composites,
                                            std::vector<std::string>& warnings) {
  if (!composites) {
    if (!c || !d) throw ParameterError("goodwin: c and d required when no composites are given");
    return {*c, *d};
  }
  const double cc = composites->c(), dc = composites->d();
  auto pick = [&](std::optional<double> direct, double derived, const char* name) {
    if (!direct) return derived;
    if (std::abs(*direct - derived) > 1e-12 * std::max(1.0, std::abs(derived)))
      warnings.push_back(std::string("goodwin: direct ") + name + "=" + std::to_string(*direct) +
                         " overrides composite value " + std::to_string(derived));
    return *direct;
  };
  return {pick(c, cc, "c"), pick(d, dc, "d")};
}

struct State {
  double s_w;
  double lambda_w;
};

inline void require_interior(const State& x) {
  if (!(x.s_w > 0.0)) throw DomainError("goodwin: s_w must be > 0, got " + std::to_string(x.s_w));
  if (!(x.s_w < 1.0)) throw DomainError("goodwin: s_w must be < 1, got " + std::to_string(x.s_w));
  if (!(x.lambda_w > 0.0))
    throw DomainError("goodwin: lambda_w must be > 0, got " + std::to_string(x.lambda_w));
  if (!(x.lambda_w < 1.0))
    throw DomainError("goodwin: lambda_w must be < 1, got " + std::to_string(x.lambda_w));
}

inline std::array<double, 2> classical_drift(const State& x, const Params& p) {
  return {-(p.a - p.b * x.lambda_w) * x.s_w, (p.c - p.d * x.s_w) * x.lambda_w};
}

inline std::array<double, 2> regularized_drift(const State& x, const Params& p) {
  if (p.omega == 0.0) return classical_drift(x, p);
  require_interior(x);
  const double s_f = 1.0 - x.s_w, lambda_u = 1.0 - x.lambda_w;
  return {-(p.a - p.b * x.lambda_w - p.omega / lambda_u) * x.s_w,
          (p.c - p.d * x.s_w - p.omega / s_f) * x.lambda_w};
}

/// First integral of the deterministic system.
inline double conservation(const State& x, const Params& p, bool regularized) {
  if (regularized) {
    require_interior(x);
    const double s_f = 1.0 - x.s_w, lambda_u = 1.0 - x.lambda_w;
    return -((p.c - p.omega) * std::log(x.s_w) + p.omega * std::log(s_f) +
             (p.a - p.omega) * std::log(x.lambda_w) + p.omega * std::log(lambda_u)) +
           p.d * x.s_w + p.b * x.lambda_w;
  }
  if (!(x.s_w > 0.0) || !(x.lambda_w > 0.0))
    throw DomainError("goodwin: conservation law needs s_w > 0 and lambda_w > 0");
  return -(p.c * std::log(x.s_w) + p.a * std::log(x.lambda_w)) + p.d * x.s_w + p.b * x.lambda_w;
}

inline State fixed_point(const Params& p, bool regularized) {
  if (!regularized) return {p.c / p.d, p.a / p.b};
  const double ds = (p.c - p.d) * (p.c - p.d) + 4.0 * p.d * p.omega;
  const double dl = (p.a - p.b) * (p.a - p.b) + 4.0 * p.b * p.omega;
  return {(p.c + p.d - std::sqrt(ds)) / (2.0 * p.d), (p.a + p.b - std::sqrt(dl)) / (2.0 * p.b)};
}

/// Deterministic RK4 orbit, used as a high-accuracy reference.
inline std::vector<State> integrate_rk4(State x, const Params& p, bool regularized, double horizon,
                                        double dt) {
  const auto plan = StepPlan::make(horizon, dt, std::numeric_limits<std::size_t>::max() / 2);
  auto f = [&](const State& s) { return regularized ? regularized_drift(s, p) : classical_drift(s, p); };
  std::vector<State> out{x};
  out.reserve(plan.steps + 1);
  for (std::size_t k = 0; k < plan.steps; ++k) {
    const auto k1 = f(x);
    const auto k2 = f({x.s_w + 0.5 * dt * k1[0], x.lambda_w + 0.5 * dt * k1[1]});
    const auto k3 = f({x.s_w + 0.5 * dt * k2[0], x.lambda_w + 0.5 * dt * k2[1]});
    const auto k4 = f({x.s_w + dt * k3[0], x.lambda_w + dt * k3[1]});
    x.s_w += dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
    x.lambda_w += dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
    out.push_back(x);
  }
  return out;
}

struct SimulationOptions {
  double horizon = 50.0;
  double dt = 1e-3;
  std::size_t paths = 1;
  std::uint64_t seed = 0;
  double epsilon = 1e-9;
  /// Regularized drift and clamping. Unset means "regularized iff ω > 0".
  std::optional<bool> regularized;
  std::size_t max_records = 2001;
};

struct Run {
  TrajectorySet trajectories;  // columns s_w, lambda_w
  std::uint64_t clamp_events = 0;
  std::uint64_t step_count = 0;
  bool regularized = false;

  double clamp_rate() const {
    return step_count ? static_cast<double>(clamp_events) / static_cast<double>(step_count) : 0.0;
  }
};

inline double clamp_unit(double v, double eps, bool& hit) {
  if (v < eps) {
    hit = true;
    return eps;
  }
  if (v > 1.0 - eps) {
    hit = true;
    return 1.0 - eps;
  }
  return v;
}

/// Euler–Maruyama paths with Jacobi volatilities σ_s√(s_w s_f), σ_λ√(λ_w λ_u).
/// Regularized or stochastic runs are clamped to [ε, 1−ε]; a step counts as one
/// clamp event when any component is clamped.
inline Run simulate(const State& initial, const Params& p, const SimulationOptions& opt) {
  p.validate();
  const bool regularized = opt.regularized.value_or(p.omega > 0.0);
  const bool clamp = regularized || p.stochastic();
  if (clamp) require_interior(initial);
  if (!(opt.epsilon > 0.0 && opt.epsilon < 0.5)) throw ParameterError("goodwin: epsilon must be in (0, 0.5)");
  require(opt.paths >= 1, "goodwin: paths must be >= 1");
  const auto plan = StepPlan::make(opt.horizon, opt.dt, opt.max_records);

  Run run;
  run.regularized = regularized;
  run.trajectories.names = {"s_w", "lambda_w"};
  run.trajectories.times = plan.record_times();
  run.trajectories.paths.resize(opt.paths);
  std::vector<std::uint64_t> clamps(opt.paths, 0);
  const double sq = std::sqrt(plan.dt);

  parallel_for(opt.paths, [&](std::size_t path) {
    RngStream rng(opt.seed, path);
    auto& rec = run.trajectories.paths[path];
    rec.reserve(2 * run.trajectories.times.size());
    State x = initial;
    rec.push_back(x.s_w);
    rec.push_back(x.lambda_w);
    for (std::size_t k = 1; k <= plan.steps; ++k) {
      const auto drift = regularized ? regularized_drift(x, p) : classical_drift(x, p);
      double s = x.s_w + drift[0] * plan.dt;
      double l = x.lambda_w + drift[1] * plan.dt;
      if (p.stochastic()) {
        const double z1 = rng.normal(), z2 = rng.normal();
        s += p.sigma_s * std::sqrt(std::max(0.0, x.s_w * (1.0 - x.s_w))) * z1 * sq;
        l += p.sigma_lambda * std::sqrt(std::max(0.0, x.lambda_w * (1.0 - x.lambda_w))) * z2 * sq;
      }
      if (!std::isfinite(s) || !std::isfinite(l))
        throw DomainError("goodwin: non-finite state at t=" + std::to_string(k * plan.dt));
      if (clamp) {
        bool hit = false;
        s = clamp_unit(s, opt.epsilon, hit);
        l = clamp_unit(l, opt.epsilon, hit);
        clamps[path] += hit;
      }
      x = {s, l};
      if (plan.record(k)) {
        rec.push_back(x.s_w);
        rec.push_back(x.lambda_w);
      }
    }
  });
  for (auto c : clamps) run.clamp_events += c;
  run.step_count = static_cast<std::uint64_t>(plan.steps) * opt.paths;
  return run;
}

}  // namespace circuitlab::goodwin
