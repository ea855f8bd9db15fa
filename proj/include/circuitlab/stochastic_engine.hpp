#pragma once

// Seeded random drivers and the Euler–Maruyama stepping contract shared by all
// simulation modules.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "circuitlab/core.hpp"

namespace circuitlab {

inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Independent random stream for one (master_seed, stream_index) pair.
///
/// The engine state is a pure function of the pair: xoshiro256** seeded by
/// splitmix64 over a mix of the two integers. Paths can therefore be scheduled
/// on any number of workers without changing a single draw.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
      : master_seed_(master_seed), stream_index_(stream_index) {
    std::uint64_t sm = master_seed ^ (0xD1B54A32D192ED03ULL * (stream_index + 1));
    // two rounds decorrelate neighbouring stream indices
    splitmix64(sm);
    for (auto& word : s_) word = splitmix64(sm);
  }

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_index() const noexcept { return stream_index_; }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via the Marsaglia polar method.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  double exponential(double rate) noexcept { return -std::log(uniform()) / rate; }

  /// Poisson count; inversion for small means, normal approximation is never used.
  std::uint64_t poisson(double mean) noexcept {
    if (mean <= 0.0) return 0;
    if (mean < 30.0) {
      const double limit = std::exp(-mean);
      double p = uniform();
      std::uint64_t k = 0;
      while (p > limit) {
        p *= uniform();
        ++k;
      }
      return k;
    }
    // split large means into independent pieces
    const double half = 0.5 * mean;
    return poisson(half) + poisson(half);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::uint64_t s_[4]{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Symmetric correlation matrix with a lower-triangular Cholesky factor.
class CorrelationMatrix {
 public:
  static constexpr double kPivotTolerance = 1e-12;

  CorrelationMatrix() = default;

  explicit CorrelationMatrix(std::vector<std::vector<double>> rho) : rho_(std::move(rho)) {
    const std::size_t n = rho_.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (rho_[i].size() != n) throw ParameterError("correlation matrix is not square");
      if (std::abs(rho_[i][i] - 1.0) > 1e-12)
        throw ParameterError("correlation matrix diagonal entry " + std::to_string(i) + " is not 1");
      for (std::size_t j = 0; j < i; ++j) {
        if (std::abs(rho_[i][j] - rho_[j][i]) > 1e-12)
          throw ParameterError("correlation matrix is not symmetric at (" + std::to_string(i) +
                               "," + std::to_string(j) + ")");
        if (std::abs(rho_[i][j]) > 1.0)
          throw ParameterError("correlation entry outside [-1,1]");
      }
    }
    factorize();
  }

  static CorrelationMatrix identity(std::size_t n) {
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
    return CorrelationMatrix(std::move(m));
  }

  static CorrelationMatrix pair(double rho) { return CorrelationMatrix({{1.0, rho}, {rho, 1.0}}); }

  std::size_t size() const noexcept { return rho_.size(); }
  double operator()(std::size_t i, std::size_t j) const { return rho_[i][j]; }
  const std::vector<std::vector<double>>& values() const noexcept { return rho_; }
  double cholesky(std::size_t i, std::size_t j) const { return chol_[i * size() + j]; }

  /// Remove row and column k (used when a bank leaves the system).
  CorrelationMatrix without(std::size_t k) const {
    std::vector<std::vector<double>> m;
    for (std::size_t i = 0; i < size(); ++i) {
      if (i == k) continue;
      std::vector<double> row;
      for (std::size_t j = 0; j < size(); ++j)
        if (j != k) row.push_back(rho_[i][j]);
      m.push_back(std::move(row));
    }
    return CorrelationMatrix(std::move(m));
  }

 private:
  void factorize() {
    const std::size_t n = size();
    chol_.assign(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      double d = rho_[j][j];
      for (std::size_t k = 0; k < j; ++k) d -= chol_[j * n + k] * chol_[j * n + k];
      if (d < -kPivotTolerance)
        throw ParameterError("correlation matrix is not positive semi-definite: pivot " +
                             std::to_string(j) + " = " + std::to_string(d));
      const double ljj = d > 0.0 ? std::sqrt(d) : 0.0;
      chol_[j * n + j] = ljj;
      for (std::size_t i = j + 1; i < n; ++i) {
        double s = rho_[i][j];
        for (std::size_t k = 0; k < j; ++k) s -= chol_[i * n + k] * chol_[j * n + k];
        chol_[i * n + j] = ljj > kPivotTolerance ? s / ljj : 0.0;
      }
    }
  }

  std::vector<std::vector<double>> rho_;
  std::vector<double> chol_;
};

/// Marshall–Olkin common-shock jumps with negative-exponential amplitudes.
class JumpSpec {
 public:
  using Subset = std::set<std::size_t>;

  JumpSpec() = default;

  JumpSpec(std::size_t n, std::map<Subset, double> subset_intensities, std::vector<double> decay)
      : n_(n), intensities_(std::move(subset_intensities)), decay_(std::move(decay)) {
    if (decay_.size() != n_) throw ParameterError("jump decay vector has wrong length");
    for (double v : decay_)
      if (!(v > 0.0)) throw ParameterError("jump decay must be positive");
    for (const auto& [subset, lambda] : intensities_) {
      if (lambda < 0.0) throw ParameterError("negative jump intensity");
      if (subset.empty()) throw ParameterError("empty jump subset");
      for (std::size_t i : subset)
        if (i >= n_) throw ParameterError("jump subset references unknown name");
    }
  }

  /// Jump-free specification for n names.
  static JumpSpec none(std::size_t n) { return JumpSpec(n, {}, std::vector<double>(n, 1.0)); }

  std::size_t size() const noexcept { return n_; }
  const std::map<Subset, double>& subsets() const noexcept { return intensities_; }
  double decay(std::size_t i) const { return decay_[i]; }
  const std::vector<double>& decays() const noexcept { return decay_; }

  /// E{e^J - 1} for J ~ -Exp(decay).
  double compensator(std::size_t i) const { return -1.0 / (decay_[i] + 1.0); }

  /// Per-name intensity: sum of the intensities of the subsets containing i.
  double intensity(std::size_t i) const {
    double total = 0.0;
    for (const auto& [subset, lambda] : intensities_)
      if (subset.count(i)) total += lambda;
    return total;
  }

  bool empty() const {
    for (const auto& [subset, lambda] : intensities_)
      if (lambda > 0.0) return false;
    return true;
  }

  /// Restrict to the names other than k (indices above k shift down by one).
  JumpSpec without(std::size_t k) const {
    std::map<Subset, double> out;
    for (const auto& [subset, lambda] : intensities_) {
      Subset s;
      for (std::size_t i : subset)
        if (i != k) s.insert(i < k ? i : i - 1);
      if (!s.empty()) out[s] += lambda;
    }
    std::vector<double> decay;
    for (std::size_t i = 0; i < n_; ++i)
      if (i != k) decay.push_back(decay_[i]);
    return JumpSpec(n_ - 1, std::move(out), std::move(decay));
  }

 private:
  std::size_t n_ = 0;
  std::map<Subset, double> intensities_;
  std::vector<double> decay_;
};

/// Jump arrivals within one step.
struct JumpDraw {
  std::vector<std::uint32_t> counts;  // per name
  std::vector<double> log_jump;       // sum of sampled amplitudes J (≤ 0) per name
};

/// Correlated normal increments with covariance corr·dt.
inline std::vector<double> gaussian_increments(RngStream& stream, const CorrelationMatrix& corr,
                                               double dt) {
  if (!(dt > 0.0)) throw ParameterError("time step must be positive");
  const std::size_t n = corr.size();
  std::vector<double> z(n);
  for (auto& v : z) v = stream.normal();
  std::vector<double> dw(n, 0.0);
  const double sq = std::sqrt(dt);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k <= i; ++k) s += corr.cholesky(i, k) * z[k];
    dw[i] = s * sq;
  }
  return dw;
}

/// Poisson arrivals per subset, projected onto names, with one exponential
/// amplitude per name per arrival.
inline JumpDraw marshall_olkin_arrivals(RngStream& stream, const JumpSpec& spec, double dt) {
  if (!(dt > 0.0)) throw ParameterError("time step must be positive");
  JumpDraw draw{std::vector<std::uint32_t>(spec.size(), 0), std::vector<double>(spec.size(), 0.0)};
  for (const auto& [subset, lambda] : spec.subsets()) {
    if (lambda <= 0.0) continue;
    const auto k = stream.poisson(lambda * dt);
    for (std::uint64_t a = 0; a < k; ++a) {
      for (std::size_t i : subset) {
        ++draw.counts[i];
        draw.log_jump[i] -= stream.exponential(spec.decay(i));
      }
    }
  }
  return draw;
}

/// One Euler–Maruyama step: state + drift·dt + diffusion·dW + jumps.
/// `diffusion` is row-major (state.size() × dW.size()); pass an empty span for
/// no diffusion, and an empty `jumps` for no jump terms. No clamping.
inline std::vector<double> euler_step(std::span<const double> state, std::span<const double> drift,
                                      std::span<const double> diffusion,
                                      std::span<const double> dw, std::span<const double> jumps,
                                      double dt) {
  if (!(dt > 0.0)) throw ParameterError("time step must be positive");
  const std::size_t n = state.size();
  if (drift.size() != n) throw ParameterError("drift size mismatch");
  if (!diffusion.empty() && diffusion.size() != n * dw.size())
    throw ParameterError("diffusion size mismatch");
  if (!jumps.empty() && jumps.size() != n) throw ParameterError("jump size mismatch");
  std::vector<double> next(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(state[i])) throw DomainError("non-finite state component " + std::to_string(i));
    if (!std::isfinite(drift[i])) throw DomainError("non-finite drift component " + std::to_string(i));
    double x = state[i] + drift[i] * dt;
    if (!diffusion.empty())
      for (std::size_t k = 0; k < dw.size(); ++k) x += diffusion[i * dw.size() + k] * dw[k];
    if (!jumps.empty()) x += jumps[i];
    next[i] = x;
  }
  return next;
}

/// Recorded paths on a shared time grid. Values are row-major per path:
/// paths[p][k * names.size() + j] is variable j at times[k].
struct TrajectorySet {
  std::vector<std::string> names;
  std::vector<double> times;
  std::vector<std::vector<double>> paths;

  std::size_t width() const noexcept { return names.size(); }
  /// Recorded rows for one path; shorter than times.size() when the path stopped early.
  std::size_t rows(std::size_t path) const { return paths[path].size() / names.size(); }
  double at(std::size_t path, std::size_t step, std::size_t var) const {
    return paths[path][step * names.size() + var];
  }
  std::size_t column(const std::string& name) const {
    for (std::size_t j = 0; j < names.size(); ++j)
      if (names[j] == name) return j;
    throw ParameterError("unknown trajectory column " + name);
  }
};

/// Time grid shared by the simulators: number of steps and the stride at which
/// states are recorded.
struct StepPlan {
  std::size_t steps;
  std::size_t stride;
  double dt;

  static StepPlan make(double horizon, double dt, std::size_t max_records = 2001) {
    if (!(dt > 0.0)) throw ParameterError("dt must be positive");
    if (!(horizon > 0.0)) throw ParameterError("horizon must be positive");
    const auto steps = static_cast<std::size_t>(std::llround(std::ceil(horizon / dt - 1e-9)));
    const std::size_t stride = std::max<std::size_t>(1, (steps + max_records - 2) / (max_records - 1));
    return {steps, stride, dt};
  }
  bool record(std::size_t k) const noexcept { return k % stride == 0 || k == steps; }
  std::vector<double> record_times() const {
    std::vector<double> t;
    for (std::size_t k = 0; k <= steps; ++k)
      if (record(k)) t.push_back(static_cast<double>(k) * dt);
    return t;
  }
};

/// Number of worker threads used by path-parallel loops. 0 means hardware concurrency.
inline std::size_t& worker_count_setting() {
  static std::size_t workers = 0;
  return workers;
}

inline std::size_t worker_count() {
  std::size_t w = worker_count_setting();
  if (w == 0) w = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  return w;
}

/// Run body(i) for i in [0, count) across workers. Each index must write only
/// to its own output slot; the outcome is then independent of scheduling.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
  const std::size_t workers = std::min(worker_count(), std::max<std::size_t>(count, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace circuitlab
