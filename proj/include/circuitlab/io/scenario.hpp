#pragma once

// Scenario files: parse and validate a JSON config into a plan, then execute
// it into in-memory artifacts (CSV, SVG) and a JSON summary.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "circuitlab/balance_sheet.hpp"
#include "circuitlab/banking_network.hpp"
#include "circuitlab/core.hpp"
#include "circuitlab/dividend_optimizer.hpp"
#include "circuitlab/goodwin.hpp"
#include "circuitlab/io/config.hpp"
#include "circuitlab/io/csv.hpp"
#include "circuitlab/io/svg.hpp"
#include "circuitlab/keen.hpp"
#include "circuitlab/ledger.hpp"
#include "circuitlab/mmc.hpp"
#include "circuitlab/stochastic_engine.hpp"
#include "circuitlab/wedge_analytics.hpp"

namespace circuitlab::io {

inline constexpr int kSchemaVersion = 1;

struct Artifact {
  std::string name;
  std::string content;
};

struct RunResult {
  std::string model;
  Json effective;
  Json summary = Json::object();
  std::vector<Artifact> files;
  std::vector<std::string> warnings;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> paths;
  std::optional<std::string> out;
  bool svg = false;
  std::optional<std::size_t> workers;
};

struct Plan {
  std::string model;
  Json effective = Json::object();
  std::string output = "out";
  bool svg = false;
  std::size_t workers = 0;
  std::vector<std::string> warnings;
  std::function<void(RunResult&)> execute;
};

inline const std::vector<std::string>& model_names() {
  static const std::vector<std::string> names{"goodwin", "keen",    "mmc",     "ledger",
                                              "network", "wedge",   "balance", "dividend"};
  return names;
}

namespace detail {

struct Field {
  const char* key;
  double* value;
};

inline void read_fields(Section& s, std::initializer_list<Field> fields) {
  for (const auto& f : fields) *f.value = s.number(f.key, *f.value);
}

/// Run block with command-line overrides for seed and path count.
class RunBlock {
 public:
  RunBlock(Section& s, const Overrides& o) : s_(s), o_(o) {}

  std::uint64_t seed() {
    used_seed = true;
    auto v = s_.integer("seed", 0);
    if (o_.seed) {
      v = *o_.seed;
      s_.assign("seed", v);
    }
    return v;
  }
  std::size_t paths(std::size_t fallback, std::size_t minimum = 1) {
    used_paths = true;
    auto v = s_.integer("paths", fallback);
    if (o_.paths) {
      v = *o_.paths;
      s_.assign("paths", v);
    }
    if (v < minimum) throw SchemaError("config 'run.paths' must be >= " + std::to_string(minimum));
    return v;
  }
  double dt(double fallback) { return positive("dt", fallback); }
  double horizon(double fallback) { return positive("horizon", fallback); }
  std::size_t max_records() {
    const auto v = s_.integer("max_records", 2001);
    if (v < 2) throw SchemaError("config 'run.max_records' must be >= 2");
    return v;
  }
  double positive(const std::string& key, double fallback) {
    const double v = s_.number(key, fallback);
    if (!(v > 0.0)) throw SchemaError("config 'run." + key + "' must be > 0");
    return v;
  }
  Section& section() { return s_; }

  bool used_seed = false, used_paths = false;

 private:
  Section& s_;
  const Overrides& o_;
};

/// List of objects with numeric fields; absent means one default entry.
inline std::vector<std::vector<double>> read_states(Section& root, const std::string& key,
                                                    const std::vector<std::pair<std::string, double>>& fields) {
  std::vector<std::vector<double>> out;
  if (!root.has(key)) {
    Json one = Json::object();
    std::vector<double> v;
    for (const auto& [k, d] : fields) {
      one[k] = d;
      v.push_back(d);
    }
    root.assign(key, Json::array({one}));
    return {v};
  }
  for (auto& s : root.children(key)) {
    std::vector<double> v;
    for (const auto& [k, d] : fields) v.push_back(s.number(k, d));
    s.finish();
    out.push_back(std::move(v));
  }
  if (out.empty()) throw SchemaError("config '" + key + "' must list at least one entry");
  return out;
}

/// [lo, hi, n] → n evenly spaced values.
inline std::vector<double> read_axis(Section& s, const std::string& key, std::vector<double> fallback) {
  const auto a = s.numbers(key, fallback);
  const std::string where = "config '" + (s.path().empty() ? key : s.path() + "." + key) + "'";
  if (a.size() != 3) throw SchemaError(where + " must be [lo, hi, n]");
  const double n = a[2];
  if (!(n >= 1) || n != std::floor(n)) throw SchemaError(where + " needs a positive integer count");
  if (!(a[1] >= a[0])) throw SchemaError(where + " needs hi >= lo");
  const auto m = static_cast<std::size_t>(n);
  std::vector<double> v(m, a[0]);
  for (std::size_t k = 1; k < m; ++k) v[k] = a[0] + (a[1] - a[0]) * k / (m - 1);
  return v;
}

inline std::size_t index_value(const Json& v, std::size_t limit, const std::string& where) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0 || v.get<std::uint64_t>() >= limit)
    throw SchemaError("config '" + where + "' must hold bank indices below " + std::to_string(limit));
  return v.get<std::size_t>();
}

/// Orbits side by side: orbit, path, t, then the variables.
inline std::string orbits_csv(const std::vector<TrajectorySet>& sets) {
  std::vector<std::string> header{"orbit", "path", "t"};
  header.insert(header.end(), sets.front().names.begin(), sets.front().names.end());
  CsvWriter w(header);
  for (std::size_t o = 0; o < sets.size(); ++o) {
    const auto& s = sets[o];
    for (std::size_t p = 0; p < s.paths.size(); ++p)
      for (std::size_t k = 0; k < s.rows(p); ++k) {
        std::vector<double> r{double(o), double(p), s.times[k]};
        for (std::size_t j = 0; j < s.width(); ++j) r.push_back(s.at(p, k, j));
        w.row(r);
      }
  }
  return w.str();
}

inline Series column_series(const TrajectorySet& s, std::size_t path, const std::string& x, const std::string& y,
                            std::string name) {
  Series out{std::move(name), {}, {}, false};
  const bool time = x == "t";
  const std::size_t jx = time ? 0 : s.column(x), jy = s.column(y);
  for (std::size_t k = 0; k < s.rows(path); ++k) {
    out.x.push_back(time ? s.times[k] : s.at(path, k, jx));
    out.y.push_back(s.at(path, k, jy));
  }
  return out;
}

inline std::pair<double, double> column_range(const TrajectorySet& s, std::size_t j) {
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t p = 0; p < s.paths.size(); ++p)
    for (std::size_t k = 0; k < s.rows(p); ++k) {
      lo = std::min(lo, s.at(p, k, j));
      hi = std::max(hi, s.at(p, k, j));
    }
  return {lo, hi};
}

inline Json range_json(std::pair<double, double> r) { return Json{{"min", r.first}, {"max", r.second}}; }

inline std::string orbit_label(const std::vector<double>& x0, const std::vector<std::string>& names) {
  std::string s;
  for (std::size_t j = 0; j < x0.size(); ++j) s += (j ? ", " : "") + names[j] + "=" + format_number(x0[j]);
  return s;
}

// ---------------------------------------------------------------- goodwin

inline void plan_goodwin(Section& root, RunBlock& run, Plan& plan) {
  goodwin::Params p;
  auto ps = root.child("parameters");
  read_fields(ps, {{"a", &p.a}, {"b", &p.b}, {"omega", &p.omega}, {"sigma_s", &p.sigma_s},
                   {"sigma_lambda", &p.sigma_lambda}});
  if (ps.has("composites")) {
    auto cs = ps.child("composites");
    goodwin::Composites c;
    read_fields(cs, {{"alpha", &c.alpha}, {"beta", &c.beta}, {"gamma", &c.gamma}, {"nu_f", &c.nu_f},
                     {"xi_A", &c.xi_A}});
    cs.finish();
    std::tie(p.c, p.d) = goodwin::resolve_cd(ps.maybe_number("c"), ps.maybe_number("d"), c, plan.warnings);
  } else {
    p.c = ps.number("c", p.c);
    p.d = ps.number("d", p.d);
  }
  ps.finish();
  p.validate();
  const auto starts = read_states(root, "initial", {{"s_w", 0.75}, {"lambda_w", 0.9}});

  goodwin::SimulationOptions opt;
  opt.horizon = run.horizon(50.0);
  opt.dt = run.dt(1e-3);
  opt.paths = run.paths(1);
  opt.seed = run.seed();
  opt.epsilon = run.positive("epsilon", 1e-9);
  if (run.section().has("regularized")) opt.regularized = run.section().flag("regularized", false);
  opt.max_records = run.max_records();

  plan.execute = [p, starts, opt](RunResult& out) {
    std::vector<TrajectorySet> sets;
    Json orbits = Json::array();
    for (const auto& x0 : starts) {
      const auto r = goodwin::simulate({x0[0], x0[1]}, p, opt);
      const auto& t = r.trajectories;
      const auto s_range = column_range(t, 0), l_range = column_range(t, 1);
      Json o{{"initial", {{"s_w", x0[0]}, {"lambda_w", x0[1]}}},
             {"regularized", r.regularized},
             {"clamp_events", r.clamp_events},
             {"clamp_rate", r.clamp_rate()},
             {"steps", r.step_count},
             {"s_w", range_json(s_range)},
             {"lambda_w", range_json(l_range)},
             {"inside_unit_square", s_range.first > 0 && s_range.second < 1 && l_range.first > 0 && l_range.second < 1}};
      if (!p.stochastic()) {
        try {
          const double c0 = goodwin::conservation({t.at(0, 0, 0), t.at(0, 0, 1)}, p, r.regularized);
          double drift = 0.0;
          for (std::size_t k = 0; k < t.rows(0); ++k)
            drift = std::max(drift, std::abs(goodwin::conservation({t.at(0, k, 0), t.at(0, k, 1)}, p, r.regularized) - c0));
          o["conservation_drift"] = drift / std::abs(c0);
        } catch (const DomainError&) {
          o["conservation_drift"] = nullptr;
        }
      }
      orbits.push_back(o);
      sets.push_back(t);
    }
    const auto fp = goodwin::fixed_point(p, opt.regularized.value_or(p.omega > 0.0));
    out.summary = {{"orbits", orbits}, {"fixed_point", {{"s_w", fp.s_w}, {"lambda_w", fp.lambda_w}}}};
    out.files.push_back({"trajectories.csv", orbits_csv(sets)});

    Panel phase{{"Phase portrait", "s_w", "lambda_w"}, {}}, time{{"Employment", "t", "lambda_w"}, {}};
    double s_lo = INFINITY, s_hi = -INFINITY;
    for (std::size_t o = 0; o < sets.size(); ++o)
      for (std::size_t q = 0; q < std::min<std::size_t>(sets[o].paths.size(), 3); ++q) {
        const auto name = q == 0 ? orbit_label(starts[o], sets[o].names) : "";
        phase.series.push_back(column_series(sets[o], q, "s_w", "lambda_w", name));
        time.series.push_back(column_series(sets[o], q, "t", "lambda_w", name));
        s_lo = std::min(s_lo, column_range(sets[o], 0).first);
        s_hi = std::max(s_hi, column_range(sets[o], 0).second);
      }
    phase.series.push_back({"lambda_w = 1", {s_lo, s_hi}, {1.0, 1.0}, false});
    out.files.push_back({"phase.svg", panels_svg({phase, time}, 2)});
  };
}

// ---------------------------------------------------------------- keen

inline void plan_keen(Section& root, RunBlock& run, Plan& plan) {
  keen::Params p;
  auto ps = root.child("parameters");
  read_fields(ps, {{"a", &p.a}, {"b", &p.b}, {"c", &p.c}, {"d", &p.d}, {"r_L", &p.r_L}, {"nu_f", &p.nu_f},
                   {"p", &p.p}, {"q", &p.q}, {"r", &p.r}, {"omega", &p.omega}, {"sigma_s", &p.sigma_s},
                   {"sigma_lambda", &p.sigma_lambda}, {"exponent_cap", &p.exponent_cap}});
  ps.finish();
  p.validate();
  const auto starts = read_states(root, "initial", {{"s_w", 0.75}, {"lambda_w", 0.9}, {"Gamma_f", 0.2}});

  keen::SimulationOptions opt;
  opt.horizon = run.horizon(100.0);
  opt.dt = run.dt(1e-3);
  opt.paths = run.paths(1);
  opt.seed = run.seed();
  opt.epsilon = run.positive("epsilon", 1e-9);
  if (run.section().has("regularized")) opt.regularized = run.section().flag("regularized", false);
  opt.with_nu_factor = run.section().flag("with_nu_factor", true);
  opt.minsky_threshold = run.positive("minsky_threshold", 10.0);
  opt.max_records = run.max_records();

  plan.execute = [p, starts, opt](RunResult& out) {
    std::vector<TrajectorySet> sets;
    Json orbits = Json::array();
    for (const auto& x0 : starts) {
      const auto r = keen::simulate({x0[0], x0[1], x0[2]}, p, opt);
      const auto& t = r.trajectories;
      const auto s_range = column_range(t, 0), l_range = column_range(t, 1);
      Json events = Json::array();
      for (const auto& e : r.minsky_events) events.push_back({{"path", e.path}, {"time", e.time}});
      orbits.push_back({{"initial", {{"s_w", x0[0]}, {"lambda_w", x0[1]}, {"Gamma_f", x0[2]}}},
                        {"regularized", r.regularized},
                        {"clamp_events", r.clamp_events},
                        {"clamp_rate", r.clamp_rate()},
                        {"steps", r.step_count},
                        {"exponent_caps", r.exponent_caps},
                        {"minsky_events", events},
                        {"s_w", range_json(s_range)},
                        {"lambda_w", range_json(l_range)},
                        {"Gamma_f", range_json(column_range(t, 2))},
                        {"inside_unit_square",
                         s_range.first > 0 && s_range.second < 1 && l_range.first > 0 && l_range.second < 1}});
      sets.push_back(t);
    }
    out.summary = {{"orbits", orbits}};
    out.files.push_back({"trajectories.csv", orbits_csv(sets)});

    Panel phase{{"Phase portrait", "s_w", "lambda_w"}, {}}, debt{{"Firm leverage", "t", "Gamma_f"}, {}};
    for (std::size_t o = 0; o < sets.size(); ++o)
      for (std::size_t q = 0; q < std::min<std::size_t>(sets[o].paths.size(), 3); ++q) {
        const auto name = q == 0 ? orbit_label(starts[o], sets[o].names) : "";
        phase.series.push_back(column_series(sets[o], q, "s_w", "lambda_w", name));
        debt.series.push_back(column_series(sets[o], q, "t", "Gamma_f", name));
      }
    out.files.push_back({"phase.svg", panels_svg({phase, debt}, 2)});
  };
}

// ---------------------------------------------------------------- mmc

inline void plan_mmc(Section& root, RunBlock& run, Plan& plan) {
  mmc::Params p;
  auto ps = root.child("parameters");
  read_fields(ps, {{"kappa_C", &p.kappa_C},   {"sigma_C", &p.sigma_C},   {"sigma_K", &p.sigma_K},
                   {"alpha0", &p.alpha0},     {"alpha1", &p.alpha1},     {"upsilon0", &p.upsilon0},
                   {"upsilon1", &p.upsilon1}, {"upsilon2", &p.upsilon2}, {"upsilon3", &p.upsilon3},
                   {"delta_rf", &p.delta_rf}, {"delta_ff", &p.delta_ff}, {"delta_rb", &p.delta_rb},
                   {"delta_bb", &p.delta_bb}, {"xi_Delta", &p.xi_Delta}, {"xi_A", &p.xi_A},
                   {"r_D", &p.r_D},           {"r_L", &p.r_L},           {"nu_f", &p.nu_f},
                   {"nu_b", &p.nu_b},         {"a", &p.a},               {"b", &p.b},
                   {"c", &p.c},               {"omega", &p.omega},       {"sigma_s", &p.sigma_s},
                   {"sigma_lambda", &p.sigma_lambda}, {"alpha", &p.alpha}, {"beta", &p.beta}});
  ps.finish();
  p.validate();
  mmc::State x0;
  auto is = root.child("initial");
  read_fields(is, {{"C_r", &x0.C_r}, {"D_r", &x0.D_r}, {"L_r", &x0.L_r}, {"D_f", &x0.D_f}, {"L_f", &x0.L_f},
                   {"K_f", &x0.K_f}, {"K_b", &x0.K_b}, {"theta_w", &x0.theta_w}, {"N_w", &x0.N_w},
                   {"s_w", &x0.s_w}, {"lambda_w", &x0.lambda_w}});
  is.finish();

  mmc::SimulationOptions opt;
  opt.horizon = run.horizon(10.0);
  opt.dt = run.dt(1e-3);
  opt.paths = run.paths(1);
  opt.seed = run.seed();
  opt.epsilon = run.positive("epsilon", 1e-9);
  try {
    opt.mode = mmc::parse_upsilon_mode(run.section().text("mode", "fixed-point", {"one-step", "fixed-point", "newton"}));
  } catch (const ParameterError& e) {
    throw SchemaError(e.what());
  }
  opt.max_records = run.max_records();

  plan.execute = [p, x0, opt](RunResult& out) {
    const auto r = mmc::simulate(x0, p, opt);
    const auto s = r.summary();
    const auto& t = r.trajectories;
    out.summary = {{"max_stock_flow_residual", s.max_stock_flow_residual},
                   {"max_production_residual", s.max_production_residual},
                   {"max_upsilon_gap", s.max_upsilon_gap},
                   {"credit_crunch_steps", s.credit_crunch_steps},
                   {"capacity_bound_steps", s.capacity_bound_steps},
                   {"floor_hits", s.floor_hits},
                   {"clamp_events", s.clamp_events},
                   {"unmet_financing", s.unmet_financing},
                   {"rows", t.rows(0)}};
    Json last = Json::object();
    for (std::size_t j = 0; j < t.width(); ++j) last[t.names[j]] = t.at(0, t.rows(0) - 1, j);
    out.summary["final"] = last;
    out.files.push_back({"trajectories.csv", trajectories_csv(t)});

    Panel stocks{{"Stocks", "t", "level"}, {}}, labour{{"Labour block", "t", "share"}, {}},
        behaviour{{"Investment propensity", "t", "value"}, {}};
    for (const char* n : {"C_r", "D_r", "L_r", "D_f", "L_f", "K_f", "K_b"}) stocks.series.push_back(column_series(t, 0, "t", n, n));
    for (const char* n : {"s_w", "lambda_w"}) labour.series.push_back(column_series(t, 0, "t", n, n));
    for (const char* n : {"upsilon_f", "u_f"}) behaviour.series.push_back(column_series(t, 0, "t", n, n));
    out.files.push_back({"trajectories.svg", panels_svg({stocks, labour, behaviour}, 3, 480)});
  };
}

// ---------------------------------------------------------------- ledger

inline ledger::BankLedger read_ledger(Section s) {
  ledger::BankLedger b;
  read_fields(s, {{"external_assets", &b.external_assets}, {"interbank_assets", &b.interbank_assets},
                  {"cash", &b.cash}, {"external_liabilities", &b.external_liabilities},
                  {"interbank_liabilities", &b.interbank_liabilities}, {"equity", &b.equity}});
  s.finish();
  return b;
}

inline const std::vector<std::string>& event_kind_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (int k = 0; k < 7; ++k) v.push_back(ledger::to_string(static_cast<ledger::EventKind>(k)));
    return v;
  }();
  return names;
}

inline void plan_ledger(Section& root, RunBlock&, Plan& plan) {
  auto ps = root.child("parameters");
  const double nu_b = ps.number("capital_ratio", 0.08);
  ps.finish();
  if (!(nu_b > 0.0 && nu_b < 1.0)) throw SchemaError("config 'parameters.capital_ratio' must be in (0,1)");
  ledger::LedgerSet banks;
  for (auto& s : root.children("banks")) banks.push_back(read_ledger(s));
  if (banks.empty()) throw SchemaError("config 'banks' must list at least one bank");
  if (root.has("creation") == root.has("events"))
    throw SchemaError("config needs exactly one of 'creation' or 'events'");

  if (root.has("creation")) {
    auto cs = root.child("creation");
    const double amount = cs.number("amount");
    const auto haircut = cs.maybe_number("repo_haircut");
    cs.finish();
    if (banks.size() != 2) throw SchemaError("config 'creation' needs exactly two banks");
    plan.execute = [banks, amount, haircut, nu_b](RunResult& out) {
      const auto r = ledger::two_bank_creation(banks[0], banks[1], amount, haircut);
      CsvWriter w({"step", "label", "bank", "external_assets", "interbank_assets", "cash", "external_liabilities",
                   "interbank_liabilities", "equity", "assets", "liabilities", "money_supply"});
      Json steps = Json::array();
      for (std::size_t k = 0; k < r.steps.size(); ++k) {
        const auto& st = r.steps[k];
        const double m = ledger::money_supply({st.bank1, st.bank2});
        Json row{{"label", st.label}};
        std::size_t id = 0;
        for (const auto* b : {&st.bank1, &st.bank2}) {
          std::vector<std::string> f{std::to_string(k), st.label, std::to_string(id + 1)};
          for (double v : b->columns()) f.push_back(format_number(v));
          f.push_back(format_number(b->assets()));
          f.push_back(format_number(b->liabilities()));
          f.push_back(format_number(m));
          w.row_strings(f);
          row["bank" + std::to_string(++id)] = b->columns();
        }
        steps.push_back(row);
      }
      Json events = Json::array();
      for (const auto& e : r.events) events.push_back({{"kind", ledger::to_string(e.kind)}, {"amount", e.amount}});
      Json capital = Json::array();
      for (const auto* b : {&r.steps.back().bank1, &r.steps.back().bank2}) {
        const auto c = ledger::capital_check(*b, nu_b);
        capital.push_back({{"ok", c.ok}, {"slack", c.slack}});
      }
      out.summary = {{"money_delta", r.money_delta}, {"steps", steps}, {"events", events}, {"capital", capital}};
      out.files.push_back({"ledger.csv", w.str()});
    };
    return;
  }

  std::vector<ledger::Event> events;
  for (auto& s : root.children("events")) {
    const auto kind = ledger::parse_event_kind(s.text("kind", event_kind_names()));
    ledger::Event e(kind, s.number("amount"), s.integer("bank", 0));
    if (e.bank >= banks.size()) throw SchemaError("config '" + s.path() + ".bank' is not a listed bank");
    if (s.has("counterparty")) {
      e.counterparty = s.integer("counterparty", 0);
      if (*e.counterparty >= banks.size())
        throw SchemaError("config '" + s.path() + ".counterparty' is not a listed bank");
    }
    e.interest = s.number("interest", 0.0);
    e.haircut = s.number("haircut", 0.0);
    s.finish();
    events.push_back(e);
  }
  plan.execute = [banks, events, nu_b](RunResult& out) {
    CsvWriter w({"step", "label", "bank", "external_assets", "interbank_assets", "cash", "external_liabilities",
                 "interbank_liabilities", "equity", "assets", "liabilities", "money_supply"});
    auto emit = [&](std::size_t step, const std::string& label, const ledger::LedgerSet& set) {
      const double m = ledger::money_supply(set);
      for (std::size_t i = 0; i < set.size(); ++i) {
        std::vector<std::string> f{std::to_string(step), label, std::to_string(i + 1)};
        for (double v : set[i].columns()) f.push_back(format_number(v));
        f.push_back(format_number(set[i].assets()));
        f.push_back(format_number(set[i].liabilities()));
        f.push_back(format_number(m));
        w.row_strings(f);
      }
    };
    auto set = banks;
    emit(0, "initial", set);
    double money = 0.0, worst = 0.0;
    for (std::size_t k = 0; k < events.size(); ++k) {
      const auto r = ledger::apply(set, events[k]);
      set = r.ledgers;
      money += r.money_delta;
      for (const auto& b : set) worst = std::max(worst, std::abs(b.balance_residual()));
      emit(k + 1, ledger::to_string(events[k].kind), set);
    }
    Json final = Json::array(), capital = Json::array();
    for (const auto& b : set) {
      final.push_back(b.columns());
      const auto c = ledger::capital_check(b, nu_b);
      capital.push_back({{"ok", c.ok}, {"slack", c.slack}});
    }
    out.summary = {{"money_delta", money}, {"events", events.size()}, {"max_balance_residual", worst},
                   {"final", final}, {"capital", capital}};
    out.files.push_back({"ledger.csv", w.str()});
  };
}

// ---------------------------------------------------------------- network

inline void plan_network(Section& root, RunBlock& run, Plan& plan) {
  auto ps = root.child("parameters");
  const double mu = ps.number("mu", 0.0);
  ps.finish();
  auto list = root.children("banks");
  const std::size_t n = list.size();
  if (n == 0) throw SchemaError("config 'banks' must list at least one bank");
  std::vector<double> A, L, R, sigma;
  std::vector<std::vector<double>> M;
  for (auto& s : list) {
    A.push_back(s.number("assets"));
    L.push_back(s.number("liabilities"));
    R.push_back(s.number("recovery", 0.4));
    sigma.push_back(s.number("sigma"));
    M.push_back(s.numbers("owes", std::vector<double>(n, 0.0)));
    if (M.back().size() != n) throw SchemaError("config '" + s.path() + ".owes' needs one entry per bank");
    s.finish();
  }
  std::optional<CorrelationMatrix> corr;
  if (root.has("correlation")) corr = CorrelationMatrix(root.matrix("correlation"));
  std::optional<JumpSpec> jumps;
  if (root.has("jumps")) {
    auto js = root.child("jumps");
    const auto decay = js.numbers("decay", std::vector<double>(n, 1.0));
    std::map<std::set<std::size_t>, double> subsets;
    for (auto& s : js.children("subsets")) {
      std::set<std::size_t> members;
      const Json* b = s.raw("banks");
      if (!b || !b->is_array() || b->empty()) throw SchemaError("config '" + s.path() + ".banks' must be a non-empty array");
      for (const auto& v : *b) members.insert(index_value(v, n, s.path() + ".banks"));
      subsets[members] += s.number("intensity");
      s.finish();
    }
    js.finish();
    jumps = JumpSpec(n, subsets, decay);
  }
  const auto net = network::BankNetwork::make(A, L, M, R, sigma, mu, corr, jumps);

  network::SimulationOptions opt;
  opt.horizon = run.horizon(opt.horizon);
  opt.dt = run.dt(opt.dt);
  opt.paths = run.paths(opt.paths);
  opt.seed = run.seed();
  opt.monitoring = network::parse_monitoring(run.section().text("monitoring", "bridge", {"bridge", "discrete"}));
  opt.refine_dt = run.section().number("refine_dt", 0.0);
  if (!(opt.refine_dt >= 0.0)) throw SchemaError("config 'run.refine_dt' must be >= 0");
  const bool emit_paths = run.section().flag("emit_paths", false);

  plan.execute = [net, opt, emit_paths](RunResult& out) {
    const auto set = network::simulate_paths(net, opt);
    const auto s = network::survival_probabilities(set);
    const auto b = network::boundaries(net);
    CsvWriter w({"quantity", "bank", "value", "std_error"});
    auto add = [&](const std::string& q, const std::string& bank, network::Probability p) {
      w.row_strings({q, bank, format_number(p.value), format_number(p.std_error)});
      return Json{{"value", p.value}, {"std_error", p.std_error}};
    };
    out.summary["joint_survival"] = add("joint_survival", "", s.joint);
    Json marginal = Json::array();
    for (std::size_t i = 0; i < s.marginal.size(); ++i)
      marginal.push_back(add("marginal_survival", std::to_string(i + 1), s.marginal[i]));
    out.summary["marginal_survival"] = marginal;
    if (net.size() == 2) {
      Json cds = Json::array();
      for (std::size_t i = 0; i < 2; ++i)
        cds.push_back(add("cds", std::to_string(i + 1), network::instrument_payoffs(set, network::Instrument::CDS, i)));
      out.summary["cds"] = cds;
      out.summary["ftd"] = add("ftd", "", network::instrument_payoffs(set, network::Instrument::FTD));
    }
    out.summary["interior_levels"] = b.interior;
    out.summary["terminal_levels"] = b.terminal;
    out.summary["paths"] = set.paths.size();
    out.files.push_back({"survival.csv", w.str()});

    std::vector<std::vector<double>> times(net.size());
    for (const auto& p : set.paths)
      for (std::size_t i = 0; i < p.banks.size(); ++i)
        if (p.banks[i].interior_default) times[i].push_back(p.banks[i].default_time);
    Json defaults = Json::array();
    Panel panel{{"Interior defaults", "t", "fraction of paths defaulted"}, {}};
    for (std::size_t i = 0; i < times.size(); ++i) {
      auto& t = times[i];
      std::sort(t.begin(), t.end());
      defaults.push_back(t.size());
      Series sr{"bank " + std::to_string(i + 1), {0.0}, {0.0}, false};
      for (std::size_t k = 0; k < t.size(); ++k) {
        sr.x.push_back(t[k]);
        sr.y.push_back(double(k + 1) / set.paths.size());
      }
      sr.x.push_back(set.horizon);
      sr.y.push_back(double(t.size()) / set.paths.size());
      panel.series.push_back(std::move(sr));
    }
    out.summary["interior_default_counts"] = defaults;
    out.files.push_back({"defaults.svg", panels_svg({panel})});

    if (emit_paths) {
      CsvWriter pw({"path", "bank", "interior_default", "default_time", "assets", "payout", "settled_in_full"});
      for (std::size_t k = 0; k < set.paths.size(); ++k)
        for (std::size_t i = 0; i < set.paths[k].banks.size(); ++i) {
          const auto& o = set.paths[k].banks[i];
          pw.row_strings({std::to_string(k), std::to_string(i + 1), o.interior_default ? "1" : "0",
                          std::isnan(o.default_time) ? "" : format_number(o.default_time), format_number(o.assets),
                          format_number(o.payout), o.settled_in_full ? "1" : "0"});
        }
      out.files.push_back({"paths.csv", pw.str()});
    }
  };
}

// ---------------------------------------------------------------- wedge

inline void plan_wedge(Section& root, RunBlock& run, Plan& plan) {
  wedge::TwoBankParams p;
  auto ps = root.child("parameters");
  auto pair = [&](const char* key, std::array<double, 2>& v) {
    const auto x = ps.numbers(key, std::vector<double>{v[0], v[1]});
    if (x.size() != 2) throw SchemaError(std::string("config 'parameters.") + key + "' needs two entries");
    v = {x[0], x[1]};
  };
  pair("L", p.L);
  pair("R", p.R);
  pair("sigma", p.sigma);
  read_fields(ps, {{"L12", &p.L12}, {"L21", &p.L21}, {"rho", &p.rho}});
  ps.finish();
  const wedge::TwoBankTerminalDomains domains(p);
  domains.require_positive_levels();
  if (!(std::abs(p.rho) < 1.0)) throw SchemaError("config 'parameters.rho' must be in (-1, 1)");

  auto gs = root.child("grid");
  const auto x1 = read_axis(gs, "x1", {0.5, 3.5, 7}), x2 = read_axis(gs, "x2", {0.5, 3.5, 7});
  gs.finish();

  const double horizon = run.horizon(12.5);
  const double dt = run.dt(0.125);
  const std::size_t paths = run.paths(0, 0);
  const std::uint64_t seed = run.seed();
  wedge::QuadratureSpec q;
  q.tolerance = run.positive("tolerance", q.tolerance);

  plan.execute = [p, x1, x2, horizon, dt, paths, seed, q](RunResult& out) {
    const wedge::TwoBankTerminalDomains d(p);
    const std::size_t nx = x1.size(), count = nx * x2.size();
    struct Cell {
      double Q, Q_err, Q1, Q2, q1, q2;
      network::SurvivalSummary mc;
    };
    std::vector<Cell> cells(count);
    parallel_for(count, [&](std::size_t k) {
      const std::array<double, 2> x0{x1[k % nx], x2[k / nx]};
      const auto Q = wedge::joint_survival_Q(x0, d, horizon, q);
      cells[k].Q = Q.value;
      cells[k].Q_err = Q.error;
      cells[k].Q1 = wedge::marginal_survival_Q(0, x0, d, horizon, q).value;
      cells[k].Q2 = wedge::marginal_survival_Q(1, x0, d, horizon, q).value;
      cells[k].q1 = wedge::standalone_survival_q(0, x0, d, horizon);
      cells[k].q2 = wedge::standalone_survival_q(1, x0, d, horizon);
    });
    std::vector<std::string> header{"X1", "X2", "A1", "A2", "domain", "Q", "Q_error", "Q1", "Q2", "q1", "q2"};
    if (paths > 0) {
      for (const char* h : {"mc_Q", "mc_Q_se", "mc_Q1", "mc_Q1_se", "mc_Q2", "mc_Q2_se"}) header.push_back(h);
      network::SimulationOptions o;
      o.horizon = horizon;
      o.dt = dt;
      o.paths = paths;
      for (std::size_t k = 0; k < count; ++k) {
        const double a1 = d.to_assets(0, x1[k % nx]), a2 = d.to_assets(1, x2[k / nx]);
        const auto net = network::BankNetwork::make({a1, a2}, {p.L[0], p.L[1]}, {{0.0, p.L12}, {p.L21, 0.0}},
                                                    {p.R[0], p.R[1]}, {p.sigma[0], p.sigma[1]}, 0.0,
                                                    CorrelationMatrix::pair(p.rho));
        o.seed = seed + k;
        cells[k].mc = network::survival_probabilities(network::simulate_paths(net, o));
      }
    }
    CsvWriter w(header);
    std::vector<std::vector<double>> hq(x2.size()), hq1(x2.size()), hgap(x2.size());
    double min_gap = INFINITY, worst_z = 0.0;
    std::size_t outside = 0;
    for (std::size_t k = 0; k < count; ++k) {
      const auto& c = cells[k];
      const double a1 = d.to_assets(0, x1[k % nx]), a2 = d.to_assets(1, x2[k / nx]);
      std::vector<std::string> f{format_number(x1[k % nx]), format_number(x2[k / nx]), format_number(a1),
                                 format_number(a2), wedge::to_string(d.classify(a1, a2))};
      for (double v : {c.Q, c.Q_err, c.Q1, c.Q2, c.q1, c.q2}) f.push_back(format_number(v));
      if (paths > 0) {
        const std::pair<network::Probability, double> cmp[] = {
            {c.mc.joint, c.Q}, {c.mc.marginal[0], c.Q1}, {c.mc.marginal[1], c.Q2}};
        for (const auto& [m, a] : cmp) {
          f.push_back(format_number(m.value));
          f.push_back(format_number(m.std_error));
          const double se = std::max(m.std_error, 1.0 / paths);
          worst_z = std::max(worst_z, std::abs(m.value - a) / se);
          if (std::abs(m.value - a) > 3 * se) ++outside;
        }
      }
      w.row_strings(f);
      hq[k / nx].push_back(c.Q);
      hq1[k / nx].push_back(c.Q1);
      hgap[k / nx].push_back(c.q1 - c.Q1);
      min_gap = std::min(min_gap, c.q1 - c.Q1);
    }
    out.summary = {{"grid_points", count}, {"horizon", horizon}, {"min_q1_minus_Q1", min_gap}};
    if (paths > 0) {
      out.summary["mc_paths"] = paths;
      out.summary["max_abs_z"] = worst_z;
      out.summary["comparisons_beyond_3se"] = outside;
    }
    out.files.push_back({"wedge_grid.csv", w.str()});
    out.files.push_back({"wedge_Q.svg", heatmap_svg({"Joint survival Q", "X1", "X2"}, x1, x2, hq)});
    out.files.push_back({"wedge_Q1.svg", heatmap_svg({"Marginal survival Q1", "X1", "X2"}, x1, x2, hq1)});
    out.files.push_back(
        {"wedge_q1_minus_Q1.svg", heatmap_svg({"Contagion loss q1 - Q1", "X1", "X2"}, x1, x2, hgap)});
  };
}

// ---------------------------------------------------------------- balance

inline void plan_balance(Section& root, RunBlock& run, Plan& plan) {
  balance::FlowParams p;
  auto ps = root.child("parameters");
  read_fields(ps, {{"lambda", &p.lambda}, {"mu", &p.mu}, {"nu", &p.nu}, {"xi", &p.xi}, {"alpha", &p.alpha},
                   {"beta", &p.beta}, {"r", &p.r}, {"zeta", &p.zeta}, {"sigma", &p.sigma}, {"R", &p.R},
                   {"T_lag", &p.T_lag}});
  ps.finish();
  p.validate();
  balance::FlowState x0;
  auto is = root.child("initial");
  read_fields(is, {{"X", &x0.X}, {"I", &x0.I}, {"C", &x0.C}, {"D", &x0.D}, {"Y", &x0.Y}, {"E", &x0.E}});
  is.finish();
  std::array<double, 5> u{};
  static const char* control_names[] = {"phi", "psi", "omega", "pi", "delta"};
  auto cs = root.child("controls");
  for (int k = 0; k < 5; ++k) u[k] = cs.number(control_names[k], 0.0);
  cs.finish();
  std::optional<balance::RegWeights> w;
  if (root.has("weights")) {
    balance::RegWeights r;
    auto ws = root.child("weights");
    read_fields(ws, {{"rwa", &r.rwa}, {"kappa", &r.kappa}, {"rsf_X", &r.rsf_X}, {"rsf_I", &r.rsf_I},
                     {"asf_D", &r.asf_D}, {"asf_Y", &r.asf_Y}, {"co_D", &r.co_D}, {"co_Y", &r.co_Y},
                     {"ci_X", &r.ci_X}, {"ci_I", &r.ci_I}, {"K2", &r.K2}, {"K3", &r.K3}, {"K4", &r.K4}});
    ws.finish();
    r.validate();
    w = r;
  }
  balance::EvolveOptions opt;
  opt.horizon = run.horizon(10.0);
  opt.dt = run.dt(0.01);
  opt.max_records = run.max_records();
  opt.weights = w;

  if (root.has("search")) {
    if (!w) throw SchemaError("config 'search' needs a 'weights' block");
    balance::ControlGrid grid;
    auto ss = root.child("search");
    balance::AxisGrid* axes[] = {&grid.phi, &grid.psi, &grid.omega, &grid.pi, &grid.delta};
    std::vector<int> varying;
    for (int k = 0; k < 5; ++k) {
      axes[k]->values = read_axis(ss, control_names[k], {u[k], u[k], 1});
      if (axes[k]->values.size() > 1) varying.push_back(k);
    }
    ss.finish();
    plan.execute = [x0, p, w, opt, grid, varying](RunResult& out) {
      const auto res = balance::constant_control_search(x0, p, *w, opt.horizon, opt.dt, grid);
      CsvWriter csv({"phi", "psi", "omega", "pi", "delta", "cashflow", "feasible", "capital_slack", "funding_slack",
                     "liquidity_slack"});
      std::size_t feasible = 0;
      for (const auto& r : res.table) {
        std::vector<std::string> f;
        for (double v : r.controls) f.push_back(format_number(v));
        f.push_back(format_number(r.cashflow));
        f.push_back(r.feasible ? "1" : "0");
        for (double v : {r.worst.capital_slack, r.worst.funding_slack, r.worst.liquidity_slack})
          f.push_back(format_number(v));
        csv.row_strings(f);
        feasible += r.feasible;
      }
      out.summary = {{"rows", res.table.size()}, {"feasible_rows", feasible}};
      if (res.best) {
        const auto& b = res.table[*res.best];
        Json c = Json::object();
        for (int k = 0; k < 5; ++k) c[control_names[k]] = b.controls[k];
        out.summary["best"] = {{"controls", c}, {"cashflow", b.cashflow}};
      } else {
        out.summary["best"] = nullptr;
        out.warnings.push_back("balance: no feasible control on the grid");
      }
      out.files.push_back({"search.csv", csv.str()});
      if (varying.size() == 1) {
        const int k = varying[0];
        Series all{"cashflow", {}, {}, false}, ok{"feasible", {}, {}, true};
        for (const auto& r : res.table) {
          all.x.push_back(r.controls[k]);
          all.y.push_back(r.cashflow);
          if (r.feasible) {
            ok.x.push_back(r.controls[k]);
            ok.y.push_back(r.cashflow);
          }
        }
        out.files.push_back({"search.svg", line_plot_svg({"Discounted cash flow", control_names[k], "CF(T)"}, {all, ok})});
      } else if (varying.size() == 2) {
        const balance::AxisGrid* axes[] = {&grid.phi, &grid.psi, &grid.omega, &grid.pi, &grid.delta};
        const auto &xs = *axes[varying[1]], &ys = *axes[varying[0]];
        std::vector<std::vector<double>> v(ys.values.size());
        for (std::size_t i = 0; i < res.table.size(); ++i)
          v[i / xs.values.size()].push_back(res.table[i].feasible ? res.table[i].cashflow : NAN);
        out.files.push_back({"search.svg", heatmap_svg({"Discounted cash flow (feasible)", control_names[varying[1]],
                                                        control_names[varying[0]]},
                                                       xs.values, ys.values, v)});
      }
    };
    return;
  }

  opt.stochastic = run.section().flag("stochastic", false);
  opt.seed = run.seed();
  const std::size_t paths = run.paths(1);
  plan.execute = [x0, p, u, opt, paths](RunResult& out) {
    std::vector<balance::Trajectory> runs(paths);
    const auto control = balance::ControlPath::constant(u[0], u[1], u[2], u[3], u[4]);
    parallel_for(paths, [&](std::size_t k) {
      auto o = opt;
      o.stream = k;
      runs[k] = balance::evolve(x0, p, control, o);
    });
    TrajectorySet merged{runs[0].data.names, runs[0].data.times, {}};
    Json cashflow = Json::array();
    double residual = 0.0, cf_sum = 0.0;
    bool feasible = true;
    std::optional<double> worst;
    for (const auto& r : runs) {
      merged.paths.push_back(r.data.paths[0]);
      const double cf = balance::cashflow_objective(r, p);
      cf_sum += cf;
      if (runs.size() <= 20) cashflow.push_back(cf);
      residual = std::max(residual, r.max_balance_residual);
      feasible = feasible && r.feasible;
      if (r.worst) worst = std::min(worst.value_or(INFINITY), r.worst->min_slack());
    }
    const auto& f = runs[0].final_state;
    out.summary = {{"cashflow_mean", cf_sum / runs.size()},
                   {"max_balance_residual", residual},
                   {"final", {{"X", f.X}, {"I", f.I}, {"C", f.C}, {"D", f.D}, {"Y", f.Y}, {"E", f.E}}}};
    if (runs.size() <= 20) out.summary["cashflow"] = cashflow;
    if (opt.weights) {
      out.summary["feasible"] = feasible;
      out.summary["min_slack"] = worst ? Json(*worst) : Json(nullptr);
    }
    out.files.push_back({"trajectory.csv", trajectories_csv(merged)});
    Panel stocks{{"Balance sheet", "t", "level"}, {}}, resid{{"Identity residual", "t", "X+I+C-D-Y-E"}, {}};
    for (const char* n : {"X", "I", "C", "D", "Y", "E"}) stocks.series.push_back(column_series(merged, 0, "t", n, n));
    resid.series.push_back(column_series(merged, 0, "t", "balance_residual", "residual"));
    out.files.push_back({"balance.svg", panels_svg({stocks, resid}, 2)});
  };
}

// ---------------------------------------------------------------- dividend

inline void plan_dividend(Section& root, RunBlock& run, Plan& plan) {
  dividend::EquityParams p;
  auto ps = root.child("parameters");
  read_fields(ps, {{"mu", &p.mu}, {"sigma", &p.sigma}, {"R", &p.R}, {"lambda1", &p.lambda1}, {"delta1", &p.delta1},
                   {"lambda2", &p.lambda2}, {"delta2", &p.delta2}});
  ps.finish();
  p.validate();
  dividend::SolverGrid g;
  auto ss = root.child("solver");
  g.points = ss.integer("points", g.points);
  g.E_max = ss.number("E_max", g.E_max);
  g.snapshots = ss.numbers("snapshots", std::vector<double>{1, 5, 20, 50});
  g.stability_ratio = ss.number("stability_ratio", g.stability_ratio);
  ss.finish();
  if (!(g.E_max >= 0.0)) throw SchemaError("config 'solver.E_max' must be >= 0");
  g.dt = run.dt(g.dt);
  g.tau_max = run.horizon(g.tau_max);

  plan.execute = [p, g](RunResult& out) {
    const auto b = dividend::stationary_barrier(p);
    const auto s = dividend::solve_variational(p, g);
    out.warnings.insert(out.warnings.end(), s.warnings.begin(), s.warnings.end());
    std::vector<std::string> header{"E", "V_stationary"};
    for (double t : s.taus) header.push_back("V_tau_" + format_number(t));
    CsvWriter w(header);
    double worst = 0.0;
    for (std::size_t k = 0; k < s.E.size(); ++k) {
      std::vector<double> r{s.E[k], b.value(s.E[k])};
      for (const auto& v : s.values) r.push_back(v[k]);
      w.row(r);
      worst = std::max(worst, std::abs(s.final_values()[k] - b.value(s.E[k])));
    }
    CsvWriter bw({"tau", "boundary"});
    for (std::size_t k = 0; k < s.step_taus.size(); ++k) bw.row({s.step_taus[k], s.step_boundary[k]});
    out.summary = {{"roots", b.roots},
                   {"coefficients", b.C},
                   {"E_star", b.E_star},
                   {"smooth_pasting",
                    {{"value_at_zero", b.series(0.0)},
                     {"slope_minus_one", b.series(b.E_star, 1) - 1.0},
                     {"curvature", b.series(b.E_star, 2)}}},
                   {"max_abs_error_final", worst},
                   {"snapshot_taus", s.taus},
                   {"snapshot_boundaries", s.boundary},
                   {"grid_points", s.E.size()}};
    out.files.push_back({"dividend.csv", w.str()});
    out.files.push_back({"boundary.csv", bw.str()});

    Panel excess{{"Excess value V - E", "E", "V - E"}, {}}, free{{"Free boundary", "tau", "E"}, {}};
    const double E_show = std::min(s.E.back(), 4.0 * b.E_star);
    for (std::size_t t = 0; t < s.values.size(); ++t) {
      Series sr{"tau=" + format_number(s.taus[t]), {}, {}, false};
      for (std::size_t k = 0; k < s.E.size() && s.E[k] <= E_show; ++k) {
        sr.x.push_back(s.E[k]);
        sr.y.push_back(s.values[t][k] - s.E[k]);
      }
      excess.series.push_back(std::move(sr));
    }
    Series st{"stationary", {}, {}, false};
    for (std::size_t k = 0; k < s.E.size() && s.E[k] <= E_show; k += 5) {
      st.x.push_back(s.E[k]);
      st.y.push_back(b.value(s.E[k]) - s.E[k]);
    }
    excess.series.push_back(std::move(st));
    Series fb{"free boundary", {}, {}, false};
    const std::size_t stride = std::max<std::size_t>(1, s.step_taus.size() / 2000);
    for (std::size_t k = 0; k < s.step_taus.size(); k += stride) {
      fb.x.push_back(s.step_taus[k]);
      fb.y.push_back(s.step_boundary[k]);
    }
    free.series.push_back(std::move(fb));
    free.series.push_back({"E*", {0.0, g.tau_max}, {b.E_star, b.E_star}, false});
    out.files.push_back({"dividend.svg", panels_svg({excess, free}, 2)});
  };
}

}  // namespace detail

/// Validates the whole config and fills in defaults; nothing runs yet.
inline Plan plan_scenario(const Json& config, const Overrides& o = {}) {
  Plan plan;
  Section root(config, plan.effective, "");
  const auto version = root.integer("schema_version", kSchemaVersion);
  if (version != kSchemaVersion)
    throw SchemaError("config 'schema_version' must be " + std::to_string(kSchemaVersion) + ", got " +
                      std::to_string(version));
  plan.model = root.text("model", model_names());
  auto rs = root.child("run");
  plan.output = rs.text("output", "out");
  if (o.out) {
    plan.output = *o.out;
    rs.assign("output", plan.output);
  }
  plan.svg = rs.flag("svg", false);
  if (o.svg && !plan.svg) {
    plan.svg = true;
    rs.assign("svg", true);
  }
  plan.workers = rs.integer("workers", 0);
  if (o.workers) {
    plan.workers = *o.workers;
    rs.assign("workers", plan.workers);
  }
  detail::RunBlock run(rs, o);
  static const std::map<std::string, void (*)(Section&, detail::RunBlock&, Plan&)> planners{
      {"goodwin", detail::plan_goodwin}, {"keen", detail::plan_keen},         {"mmc", detail::plan_mmc},
      {"ledger", detail::plan_ledger},   {"network", detail::plan_network},   {"wedge", detail::plan_wedge},
      {"balance", detail::plan_balance}, {"dividend", detail::plan_dividend}};
  planners.at(plan.model)(root, run, plan);
  rs.finish();
  root.finish();
  if (o.seed && !run.used_seed) plan.warnings.push_back("--seed ignored: model '" + plan.model + "' has no random input");
  if (o.paths && !run.used_paths) plan.warnings.push_back("--paths ignored: model '" + plan.model + "' has no paths");
  return plan;
}

/// Runs a plan with its worker count. SVG artifacts are dropped unless requested.
inline RunResult execute(const Plan& plan) {
  RunResult r;
  r.model = plan.model;
  r.effective = plan.effective;
  r.warnings = plan.warnings;
  auto& workers = worker_count_setting();
  const auto saved = workers;
  workers = plan.workers;
  try {
    plan.execute(r);
  } catch (...) {
    workers = saved;
    throw;
  }
  workers = saved;
  if (!plan.svg)
    std::erase_if(r.files, [](const Artifact& a) { return a.name.ends_with(".svg"); });
  return r;
}

inline RunResult run_scenario(const Json& config, const Overrides& o = {}) { return execute(plan_scenario(config, o)); }

}  // namespace circuitlab::io
