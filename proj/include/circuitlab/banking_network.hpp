#pragma once

// Interconnected banks: mutual liabilities, default boundaries, removal of
// defaulted banks, Eisenberg–Noe clearing and Monte Carlo survival.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "circuitlab/core.hpp"
#include "circuitlab/stochastic_engine.hpp"
#include "circuitlab/wedge_analytics.hpp"

namespace circuitlab::network {

struct BankNetwork {
  std::vector<double> assets;                // A_i
  std::vector<double> liabilities;           // L_i, external
  std::vector<std::vector<double>> mutual;   // L_ij, owed by i to j
  std::vector<double> recovery;              // R_i
  std::vector<double> sigma;
  double mu = 0.0;
  CorrelationMatrix corr;
  JumpSpec jumps;
  std::vector<std::size_t> ids;  // labels of the original banks

  std::size_t size() const noexcept { return assets.size(); }

  double mutual_assets(std::size_t i) const {
    double s = 0.0;
    for (std::size_t j = 0; j < size(); ++j) s += mutual[j][i];
    return s;
  }
  double mutual_liabilities(std::size_t i) const {
    double s = 0.0;
    for (std::size_t j = 0; j < size(); ++j) s += mutual[i][j];
    return s;
  }
  double total_liabilities(std::size_t i) const { return liabilities[i] + mutual_liabilities(i); }
  double equity(std::size_t i) const { return assets[i] + mutual_assets(i) - total_liabilities(i); }

  void validate() const {
    const std::size_t n = size();
    if (n == 0) throw ParameterError("network: at least one bank required");
    auto sized = [&](std::size_t m, const char* what) {
      if (m != n) throw ParameterError(std::string("network: ") + what + " has " + std::to_string(m) +
                                       " entries, expected " + std::to_string(n));
    };
    sized(liabilities.size(), "external liabilities");
    sized(mutual.size(), "mutual liability matrix");
    sized(recovery.size(), "recoveries");
    sized(sigma.size(), "volatilities");
    sized(corr.size(), "correlation matrix");
    sized(jumps.size(), "jump specification");
    sized(ids.size(), "bank labels");
    for (std::size_t i = 0; i < n; ++i) {
      const std::string b = "network: bank " + std::to_string(ids[i]);
      sized(mutual[i].size(), "mutual liability row");
      if (!(assets[i] > 0.0)) throw ParameterError(b + " external assets must be > 0");
      if (!(liabilities[i] >= 0.0)) throw ParameterError(b + " external liabilities must be >= 0");
      if (!(recovery[i] >= 0.0 && recovery[i] <= 1.0)) throw ParameterError(b + " recovery must be in [0,1]");
      if (!(sigma[i] >= 0.0)) throw ParameterError(b + " volatility must be >= 0");
      if (mutual[i][i] != 0.0) throw ParameterError(b + " owes itself");
      for (double v : mutual[i])
        if (!(v >= 0.0)) throw ParameterError(b + " mutual liabilities must be >= 0");
    }
    require_finite(mu, "network mu");
  }

  static BankNetwork make(std::vector<double> A, std::vector<double> L, std::vector<std::vector<double>> M,
                          std::vector<double> R, std::vector<double> sigma, double mu,
                          std::optional<CorrelationMatrix> corr = std::nullopt,
                          std::optional<JumpSpec> jumps = std::nullopt) {
    BankNetwork net;
    const std::size_t n = A.size();
    net.assets = std::move(A);
    net.liabilities = std::move(L);
    net.mutual = std::move(M);
    net.recovery = std::move(R);
    net.sigma = std::move(sigma);
    net.mu = mu;
    net.corr = corr ? *corr : CorrelationMatrix::identity(n);
    net.jumps = jumps ? *jumps : JumpSpec::none(n);
    net.ids.resize(n);
    std::iota(net.ids.begin(), net.ids.end(), std::size_t{0});
    net.validate();
    return net;
  }
};

struct DefaultBoundarySet {
  std::vector<double> interior;  // Λ^<
  std::vector<double> terminal;  // Λ^=
};

inline DefaultBoundarySet boundaries(const BankNetwork& net) {
  DefaultBoundarySet b;
  for (std::size_t i = 0; i < net.size(); ++i) {
    const double owed = net.mutual_assets(i), owes = net.total_liabilities(i);
    b.interior.push_back(net.recovery[i] * owes - owed);
    b.terminal.push_back(owes - owed);
  }
  return b;
}

struct Removal {
  BankNetwork network;
  std::vector<double> interior_shift;  // per surviving bank, in the reduced order
};

/// Drop bank k (local index). Survivors keep owing k's estate and receive R_k
/// on k's debt to them; both are folded into their external liabilities.
inline Removal remove_bank(const BankNetwork& net, std::size_t k) {
  if (k >= net.size())
    throw ParameterError("network: cannot remove bank index " + std::to_string(k) + " of " +
                         std::to_string(net.size()));
  const auto before = boundaries(net);
  Removal r;
  BankNetwork& out = r.network;
  out.mu = net.mu;
  out.corr = net.corr.without(k);
  out.jumps = net.jumps.without(k);
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (i == k) continue;
    out.assets.push_back(net.assets[i]);
    out.liabilities.push_back(net.liabilities[i] + net.mutual[i][k] - net.recovery[k] * net.mutual[k][i]);
    out.recovery.push_back(net.recovery[i]);
    out.sigma.push_back(net.sigma[i]);
    out.ids.push_back(net.ids[i]);
    std::vector<double> row;
    for (std::size_t j = 0; j < net.size(); ++j)
      if (j != k) row.push_back(net.mutual[i][j]);
    out.mutual.push_back(std::move(row));
  }
  const auto after = boundaries(out);
  for (std::size_t i = 0, m = 0; i < net.size(); ++i) {
    if (i == k) continue;
    const double shift = after.interior[m] - before.interior[i];
    if (shift < -1e-12 * (1.0 + std::abs(before.interior[i])))
      throw DomainError("network: removal moved the boundary of bank " + std::to_string(net.ids[i]) + " left by " +
                        format_number(-shift));
    r.interior_shift.push_back(shift);
    ++m;
  }
  return r;
}

struct ClearingVector {
  std::vector<double> omega;
  std::vector<bool> solvent;
  std::size_t iterations = 0;
};

namespace detail {

inline std::vector<double> clearing_map(const BankNetwork& net, std::span<const double> a,
                                        const std::vector<double>& omega) {
  const std::size_t n = net.size();
  std::vector<double> out(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double owes = net.total_liabilities(i);
    if (!(owes > 0.0)) continue;
    double inflow = a[i];
    for (std::size_t j = 0; j < n; ++j) inflow += net.mutual[j][i] * omega[j];
    out[i] = std::clamp(inflow / owes, 0.0, 1.0);
  }
  return out;
}

// Payout fractions of the banks in `def` when every other bank pays in full.
inline std::vector<double> solve_on_set(const BankNetwork& net, std::span<const double> a,
                                        const std::vector<bool>& def) {
  const std::size_t n = net.size();
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < n; ++i)
    if (def[i]) idx.push_back(i);
  const auto m = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const std::size_t i = idx[r];
    M(r, r) = net.total_liabilities(i);
    double b = a[i];
    for (std::size_t j = 0; j < n; ++j)
      if (!def[j]) b += net.mutual[j][i];
    for (Eigen::Index c = 0; c < m; ++c) M(r, c) -= net.mutual[idx[c]][i];
    rhs(r) = b;
  }
  const Eigen::VectorXd w = M.fullPivLu().solve(rhs);
  std::vector<double> out(n, 1.0);
  for (Eigen::Index r = 0; r < m; ++r) out[idx[r]] = w(r);
  return out;
}

}  // namespace detail

/// Greatest clearing vector by monotone iteration from full payment. After
/// each step the defaulting set is solved exactly and accepted when it stays
/// below the current iterate, which ends the iteration in at most N rounds on
/// ill-conditioned networks.
inline ClearingVector clearing_vector(const BankNetwork& net, std::span<const double> terminal_assets) {
  const std::size_t n = net.size();
  if (terminal_assets.size() != n) throw ParameterError("network: terminal asset vector has wrong length");
  for (double v : terminal_assets)
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("network: terminal assets must be finite and >= 0");
  ClearingVector cv;
  std::vector<double> omega(n, 1.0);
  const std::size_t limit = 10 * n * n;
  for (std::size_t it = 1; it <= limit; ++it) {
    auto next = detail::clearing_map(net, terminal_assets, omega);
    for (std::size_t i = 0; i < n; ++i)
      if (next[i] > omega[i] + 1e-15)
        throw DomainError("network: clearing iteration increased the payout of bank " + std::to_string(net.ids[i]));
    std::vector<bool> def(n);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) any |= (def[i] = next[i] < 1.0);
    if (any) {
      const auto exact = detail::solve_on_set(net, terminal_assets, def);
      bool below = true;
      for (std::size_t i = 0; i < n; ++i) below = below && exact[i] >= 0.0 && exact[i] <= next[i] + 1e-15;
      if (below) next = exact;
    }
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) change = std::max(change, omega[i] - next[i]);
    omega = std::move(next);
    cv.iterations = it;
    if (change < 1e-12) {
      cv.omega = omega;
      for (double w : omega) cv.solvent.push_back(w >= 1.0 - 1e-9);
      return cv;
    }
  }
  throw ConvergenceError("network: clearing iteration did not settle in " + std::to_string(limit) + " steps", 0.0);
}

enum class Monitoring { Bridge, Discrete };

inline Monitoring parse_monitoring(const std::string& s) {
  if (s == "bridge") return Monitoring::Bridge;
  if (s == "discrete") return Monitoring::Discrete;
  throw ParameterError("network: monitoring must be 'bridge' or 'discrete', got '" + s + "'");
}

struct SimulationOptions {
  double horizon = 1.0;
  double dt = 0.01;
  std::size_t paths = 1000;
  std::uint64_t seed = 0;
  Monitoring monitoring = Monitoring::Bridge;
  double refine_dt = 0.0;  // 0 → dt/1024
  double crossing_tolerance = 1e-10;
};

struct BankOutcome {
  bool interior_default = false;
  double default_time = std::numeric_limits<double>::quiet_NaN();
  double assets = std::numeric_limits<double>::quiet_NaN();  // at default, or at T
  double payout = 1.0;  // fraction of total liabilities paid
  bool settled_in_full = false;
};

struct PathRecord {
  std::vector<BankOutcome> banks;            // by original label
  std::vector<std::size_t> default_order;    // interior defaults, earliest first
};

struct PathSet {
  std::size_t banks = 0;
  double horizon = 0.0;
  std::vector<PathRecord> paths;
};

namespace detail {

struct Segment {
  double ta, tb;
  std::vector<double> xa, xb;  // log assets by original label
};

class PathSimulator {
 public:
  PathSimulator(const BankNetwork& net, const SimulationOptions& opt) : root_(net), opt_(opt) {
    n_ = net.size();
    drift_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i)
      drift_[i] = net.mu - net.jumps.compensator(i) * net.jumps.intensity(i) - 0.5 * net.sigma[i] * net.sigma[i];
    refine_ = opt.refine_dt > 0.0 ? opt.refine_dt : opt.dt / 1024.0;
    log_tol_ = std::log(opt.crossing_tolerance);
  }

  PathRecord run(RngStream& rng) const {
    State st{root_, {}, std::vector<bool>(n_, true), {}};
    st.record.banks.resize(n_);
    reset_levels(st);
    std::vector<double> x(n_);
    for (std::size_t i = 0; i < n_; ++i) x[i] = std::log(root_.assets[i]);
    const auto plan = StepPlan::make(opt_.horizon, opt_.dt, 2);
    double t = 0.0;
    for (std::size_t k = 0; k < plan.steps && st.net.size() > 0; ++k) {
      const double t1 = k + 1 == plan.steps ? opt_.horizon : (k + 1) * plan.dt;
      const double h = t1 - t;
      std::vector<double> x1(n_);
      const auto dw = gaussian_increments(rng, root_.corr, h);
      for (std::size_t i = 0; i < n_; ++i) x1[i] = x[i] + drift_[i] * h + root_.sigma[i] * dw[i];
      if (opt_.monitoring == Monitoring::Bridge) {
        bridge(st, rng, {t, t1, x, x1});
      } else {
        settle_crossings(st, t1, x1, {}, false);
      }
      if (!root_.jumps.empty()) {
        const auto jd = marshall_olkin_arrivals(rng, root_.jumps, h);
        for (std::size_t i = 0; i < n_; ++i) x1[i] += jd.log_jump[i];
        settle_crossings(st, t1, x1, {}, false);
      }
      x = std::move(x1);
      t = t1;
    }
    settle_terminal(st, x);
    return std::move(st.record);
  }

 private:
  struct State {
    BankNetwork net;                  // survivors, liabilities in time-0 units
    std::vector<double> log_level;    // ln Λ^< by original label (NaN: no interior default)
    std::vector<bool> alive;
    PathRecord record;
  };

  void reset_levels(State& st) const {
    st.log_level.assign(n_, std::numeric_limits<double>::quiet_NaN());
    const auto b = boundaries(st.net);
    for (std::size_t m = 0; m < st.net.size(); ++m)
      if (b.interior[m] > 0.0) st.log_level[st.net.ids[m]] = std::log(b.interior[m]);
  }

  double distance(const State& st, std::size_t i, double x, double t) const {
    const double lv = st.log_level[i];
    return std::isnan(lv) ? INFINITY : x - lv - root_.mu * t;
  }

  void bridge(State& st, RngStream& rng, Segment first) const {
    std::vector<Segment> stack{std::move(first)};
    while (!stack.empty() && st.net.size() > 0) {
      Segment s = std::move(stack.back());
      stack.pop_back();
      const double h = s.tb - s.ta;
      bool refine = false;
      std::vector<double> prob(n_, 0.0);
      for (std::size_t i = 0; i < n_; ++i) {
        if (!st.alive[i]) continue;
        const double da = distance(st, i, s.xa[i], s.ta), db = distance(st, i, s.xb[i], s.tb);
        if (db <= 0.0 || da <= 0.0) {
          prob[i] = 1.0;
          refine = true;
          continue;
        }
        const double v = root_.sigma[i] * root_.sigma[i] * h;
        if (v == 0.0 || !std::isfinite(da) || !std::isfinite(db)) continue;
        const double e = -2.0 * da * db / v;
        if (e > log_tol_) {
          prob[i] = std::exp(e);
          refine = true;
        }
      }
      if (!refine) continue;
      if (h > refine_) {
        const double tm = 0.5 * (s.ta + s.tb);
        const auto dw = gaussian_increments(rng, root_.corr, 0.25 * h);
        std::vector<double> xm(n_);
        for (std::size_t i = 0; i < n_; ++i) xm[i] = 0.5 * (s.xa[i] + s.xb[i]) + root_.sigma[i] * dw[i];
        stack.push_back({tm, s.tb, xm, std::move(s.xb)});
        stack.push_back({s.ta, tm, std::move(s.xa), std::move(xm)});
        continue;
      }
      std::vector<std::size_t> crossed;
      for (std::size_t i = 0; i < n_; ++i) {
        if (!st.alive[i] || prob[i] == 0.0) continue;
        if (prob[i] >= 1.0 || rng.uniform() < prob[i]) crossed.push_back(i);
      }
      settle_crossings(st, s.tb, s.xb, crossed, true);
    }
  }

  // Defaults at time t: banks listed in `forced` (bridge crossings) and any
  // survivor below its level, deepest breach first, re-testing after each removal.
  // Continuous crossings happen at the level itself; jumps and discrete
  // monitoring can overshoot below it.
  void settle_crossings(State& st, double t, const std::vector<double>& x, std::vector<std::size_t> forced,
                        bool continuous) const {
    while (st.net.size() > 0) {
      std::size_t pick = n_;
      double deepest = INFINITY;
      for (std::size_t i = 0; i < n_; ++i) {
        if (!st.alive[i]) continue;
        const double d = distance(st, i, x[i], t);
        const bool listed = std::find(forced.begin(), forced.end(), i) != forced.end();
        if ((d <= 0.0 || listed) && d < deepest) {
          deepest = d;
          pick = i;
        }
      }
      if (pick == n_) return;
      forced.erase(std::remove(forced.begin(), forced.end(), pick), forced.end());
      default_bank(st, pick, t, x[pick], continuous);
    }
  }

  void default_bank(State& st, std::size_t id, double t, double x, bool continuous) const {
    const std::size_t m = static_cast<std::size_t>(std::find(st.net.ids.begin(), st.net.ids.end(), id) - st.net.ids.begin());
    const double growth = std::exp(root_.mu * t);
    const double level = std::isnan(st.log_level[id]) ? 0.0 : std::exp(st.log_level[id]) * growth;
    const double a = continuous ? level : std::min(std::exp(x), level);
    auto& out = st.record.banks[id];
    out.interior_default = true;
    out.default_time = t;
    out.assets = a;
    const double owes = st.net.total_liabilities(m) * growth;
    out.payout = owes > 0.0 ? std::clamp((a + st.net.mutual_assets(m) * growth) / owes, 0.0, 1.0) : 1.0;
    st.record.default_order.push_back(id);
    st.alive[id] = false;
    st.net = remove_bank(st.net, m).network;
    reset_levels(st);
  }

  void settle_terminal(State& st, const std::vector<double>& x) const {
    if (st.net.size() == 0) return;
    const double growth = std::exp(root_.mu * opt_.horizon);
    BankNetwork grown = st.net;
    std::vector<double> a;
    for (std::size_t m = 0; m < grown.size(); ++m) {
      grown.liabilities[m] *= growth;
      for (auto& v : grown.mutual[m]) v *= growth;
      a.push_back(std::exp(x[grown.ids[m]]));
    }
    const auto cv = clearing_vector(grown, a);
    for (std::size_t m = 0; m < grown.size(); ++m) {
      auto& out = st.record.banks[grown.ids[m]];
      out.assets = a[m];
      out.payout = cv.omega[m];
      out.settled_in_full = cv.solvent[m];
    }
  }

  const BankNetwork& root_;
  SimulationOptions opt_;
  std::size_t n_ = 0;
  std::vector<double> drift_;
  double refine_ = 0.0, log_tol_ = 0.0;
};

}  // namespace detail

inline PathSet simulate_paths(const BankNetwork& net, const SimulationOptions& opt) {
  net.validate();
  if (!(opt.horizon > 0.0)) throw ParameterError("network: horizon must be > 0");
  if (!(opt.dt > 0.0)) throw ParameterError("network: dt must be > 0");
  if (opt.paths == 0) throw ParameterError("network: at least one path required");
  if (!(opt.crossing_tolerance > 0.0 && opt.crossing_tolerance < 1.0))
    throw ParameterError("network: crossing tolerance must be in (0,1)");
  PathSet set;
  set.banks = net.size();
  set.horizon = opt.horizon;
  set.paths.resize(opt.paths);
  const detail::PathSimulator sim(net, opt);
  parallel_for(opt.paths, [&](std::size_t p) {
    RngStream rng(opt.seed, p);
    set.paths[p] = sim.run(rng);
  });
  return set;
}

struct Probability {
  double value = 0.0;
  double std_error = 0.0;
};

inline Probability mean_with_error(std::span<const double> v) {
  if (v.empty()) throw ParameterError("network: no paths to aggregate");
  const double n = static_cast<double>(v.size());
  const double mean = pairwise_sum(v) / n;
  std::vector<double> sq(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) sq[k] = (v[k] - mean) * (v[k] - mean);
  const double var = v.size() > 1 ? pairwise_sum(sq) / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

inline Probability binomial(std::span<const double> indicators) {
  auto p = mean_with_error(indicators);
  const double n = static_cast<double>(indicators.size());
  p.std_error = std::sqrt(p.value * (1.0 - p.value) / n);
  return p;
}

struct SurvivalSummary {
  Probability joint;
  std::vector<Probability> marginal;
};

inline SurvivalSummary survival_probabilities(const PathSet& set) {
  if (set.paths.empty()) throw ParameterError("network: no paths to aggregate");
  SurvivalSummary s;
  std::vector<double> joint;
  std::vector<std::vector<double>> marg(set.banks);
  for (const auto& p : set.paths) {
    bool all = true;
    for (std::size_t i = 0; i < set.banks; ++i) {
      const bool ok = !p.banks[i].interior_default && p.banks[i].settled_in_full;
      all = all && ok;
      marg[i].push_back(ok ? 1.0 : 0.0);
    }
    joint.push_back(all ? 1.0 : 0.0);
  }
  s.joint = binomial(joint);
  for (const auto& m : marg) s.marginal.push_back(binomial(m));
  return s;
}

/// ϰ_i: settlement fractions when both banks default at T.
inline std::array<double, 2> kappa(const wedge::TwoBankParams& p, double a1, double a2) {
  const double delta = p.L[0] * p.L[1] + p.L[0] * p.L21 + p.L[1] * p.L12;
  return {(p.L[1] * a1 + p.L21 * (a1 + a2)) / delta, (p.L[0] * a2 + p.L12 * (a1 + a2)) / delta};
}

/// Terminal CDS payoff on bank i (0 or 1) given both banks reach T.
inline double cds_terminal_payoff(const wedge::TwoBankParams& p, std::size_t i, double a1, double a2) {
  const wedge::TwoBankTerminalDomains d(p);
  const auto dom = d.classify(a1, a2);
  const std::array<double, 2> a{a1, a2};
  const std::size_t j = 1 - i;
  const double owes = p.L[i] + (i == 0 ? p.L12 : p.L21);
  const double owed = i == 0 ? p.L21 : p.L12;
  const bool i_survives = dom == wedge::Domain::D11 || dom == (i == 0 ? wedge::Domain::D10 : wedge::Domain::D01);
  if (i_survives) return 0.0;
  if (dom == wedge::Domain::D00) return 1.0 - (a[i] + kappa(p, a1, a2)[j] * owed) / owes;
  if (dom == wedge::Domain::Interior) throw DomainError("network: terminal assets below the interior default level");
  return 1.0 - (a[i] + owed) / owes;
}

enum class Instrument { CDS, FTD };

inline wedge::TwoBankParams two_bank_params(const BankNetwork& net) {
  if (net.size() != 2) throw ParameterError("network: two-bank formulas need exactly 2 banks, got " + std::to_string(net.size()));
  wedge::TwoBankParams p;
  p.L = {net.liabilities[0], net.liabilities[1]};
  p.L12 = net.mutual[0][1];
  p.L21 = net.mutual[1][0];
  p.R = {net.recovery[0], net.recovery[1]};
  p.sigma = {std::max(net.sigma[0], 1e-300), std::max(net.sigma[1], 1e-300)};
  p.rho = net.corr(0, 1);
  return p;
}

/// Undiscounted per-path payoffs. Interior defaults settle at the crossing;
/// terminal settlement follows the clearing fractions.
inline std::vector<double> path_payoffs(const PathSet& set, Instrument kind, std::size_t bank = 0) {
  if (set.banks != 2) throw ParameterError("network: instrument payoffs are supported for 2 banks only, got " + std::to_string(set.banks));
  if (bank > 1) throw ParameterError("network: CDS reference bank must be 0 or 1");
  std::vector<double> out;
  out.reserve(set.paths.size());
  for (const auto& p : set.paths) {
    if (kind == Instrument::CDS) {
      out.push_back(1.0 - p.banks[bank].payout);
    } else if (!p.default_order.empty()) {
      out.push_back(1.0 - p.banks[p.default_order.front()].payout);
    } else {
      out.push_back(std::max(1.0 - p.banks[0].payout, 1.0 - p.banks[1].payout));
    }
  }
  return out;
}

inline Probability instrument_payoffs(const PathSet& set, Instrument kind, std::size_t bank = 0) {
  const auto v = path_payoffs(set, kind, bank);
  return mean_with_error(v);
}

}  // namespace circuitlab::network
