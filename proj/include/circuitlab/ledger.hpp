#pragma once

// Double-entry bookkeeping for money creation and annihilation by banks.

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "circuitlab/core.hpp"

namespace circuitlab::ledger {

struct BankLedger {
  double external_assets = 0.0;  // loans to the non-bank sector
  double interbank_assets = 0.0;
  double cash = 0.0;             // reserves at the central bank
  double external_liabilities = 0.0;  // deposits
  double interbank_liabilities = 0.0;
  double equity = 0.0;

  double assets() const { return external_assets + interbank_assets + cash; }
  double liabilities() const { return external_liabilities + interbank_liabilities; }
  double balance_residual() const { return assets() - liabilities() - equity; }
  double loans() const { return external_assets + interbank_assets; }

  std::array<double, 6> columns() const {
    return {external_assets, interbank_assets, cash, external_liabilities, interbank_liabilities, equity};
  }
  bool operator==(const BankLedger&) const = default;
};

using LedgerSet = std::vector<BankLedger>;

enum class EventKind {
  IssueLoanSingle,
  RepayWithInterest,
  DefaultLoss,
  LendFromCash,
  DepositAtOther,
  InterbankLend,
  CentralBankRepo,
};

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::IssueLoanSingle: return "issue_loan_single";
    case EventKind::RepayWithInterest: return "repay_with_interest";
    case EventKind::DefaultLoss: return "default_loss";
    case EventKind::LendFromCash: return "lend_from_cash";
    case EventKind::DepositAtOther: return "deposit_at_other";
    case EventKind::InterbankLend: return "interbank_lend";
    case EventKind::CentralBankRepo: return "central_bank_repo";
  }
  return "unknown";
}

inline EventKind parse_event_kind(const std::string& s) {
  for (auto k : {EventKind::IssueLoanSingle, EventKind::RepayWithInterest, EventKind::DefaultLoss,
                 EventKind::LendFromCash, EventKind::DepositAtOther, EventKind::InterbankLend,
                 EventKind::CentralBankRepo})
    if (s == to_string(k)) return k;
  throw ParameterError("ledger: unknown event kind '" + s + "'");
}

struct Event {
  Event(EventKind k, double a, std::size_t b = 0, std::optional<std::size_t> cp = std::nullopt)
      : kind(k), amount(a), bank(b), counterparty(cp) {}

  EventKind kind;
  double amount;
  std::size_t bank = 0;
  /// Borrowing bank for interbank_lend.
  std::optional<std::size_t> counterparty;
  /// Interest paid on top of the principal for repay_with_interest.
  double interest = 0.0;
  /// Collateral haircut for central_bank_repo.
  double haircut = 0.0;
};

struct ApplyResult {
  LedgerSet ledgers;
  double money_delta;  // change in total deposits
};

inline double money_supply(const LedgerSet& set) {
  double m = 0.0;
  for (const auto& b : set) m += b.external_liabilities;
  return m;
}

namespace detail {

inline void need(double have, double want, const std::string& what, std::size_t bank) {
  if (have < want)
    throw InfeasibleError("ledger: bank " + std::to_string(bank) + " " + what + " shortfall " +
                          format_number(want - have) + " (has " + format_number(have) + ", needs " +
                          format_number(want) + ")");
}

}  // namespace detail

inline ApplyResult apply(const LedgerSet& set, const Event& e) {
  if (!(e.amount > 0.0)) throw ParameterError("ledger: event amount must be positive");
  if (e.bank >= set.size()) throw ParameterError("ledger: unknown bank " + std::to_string(e.bank));
  LedgerSet out = set;
  BankLedger& b = out[e.bank];
  const double a = e.amount;
  switch (e.kind) {
    case EventKind::IssueLoanSingle:
      b.external_assets += a;
      b.external_liabilities += a;
      break;
    case EventKind::RepayWithInterest:
      if (e.interest < 0.0) throw ParameterError("ledger: interest must be non-negative");
      detail::need(b.external_assets, a, "loan", e.bank);
      detail::need(b.external_liabilities, a, "deposit", e.bank);
      b.external_assets -= a;
      b.external_liabilities -= a;
      b.cash += e.interest;
      b.equity += e.interest;
      break;
    case EventKind::DefaultLoss:
      detail::need(b.external_assets, a, "loan", e.bank);
      b.external_assets -= a;
      b.equity -= a;
      break;
    case EventKind::LendFromCash:
      detail::need(b.cash, a, "cash", e.bank);
      b.external_assets += a;
      b.cash -= a;
      break;
    case EventKind::DepositAtOther:
      b.cash += a;
      b.external_liabilities += a;
      break;
    case EventKind::InterbankLend: {
      if (!e.counterparty || *e.counterparty >= set.size() || *e.counterparty == e.bank)
        throw ParameterError("ledger: interbank_lend needs a distinct borrowing bank");
      detail::need(b.cash, a, "cash", e.bank);
      BankLedger& borrower = out[*e.counterparty];
      b.interbank_assets += a;
      b.cash -= a;
      borrower.interbank_liabilities += a;
      borrower.cash += a;
      break;
    }
    case EventKind::CentralBankRepo: {
      if (!(e.haircut >= 0.0 && e.haircut < 1.0)) throw ParameterError("ledger: haircut must be in [0,1)");
      detail::need(b.external_assets, a / (1.0 - e.haircut), "collateral", e.bank);
      b.cash += a;
      b.interbank_liabilities += a;
      break;
    }
  }
  return {out, money_supply(out) - money_supply(set)};
}

struct CreationStep {
  std::string label;
  BankLedger bank1;
  BankLedger bank2;
};

struct CreationResult {
  std::vector<CreationStep> steps;  // I, II, III
  std::vector<Event> events;        // events applied, including any synthesized repo
  double money_delta = 0.0;
};

/// Bank 1 lends `amount` to a customer who deposits it at bank 2; bank 2 then
/// lends the cash back over the interbank market, restoring both cash levels.
/// With `repo_haircut` set, a cash shortfall at bank 1 is covered by a central
/// bank repo instead of failing.
inline CreationResult two_bank_creation(const BankLedger& bank1, const BankLedger& bank2, double amount,
                                        std::optional<double> repo_haircut = std::nullopt) {
  if (amount < 0.0) throw ParameterError("ledger: amount must be non-negative");
  CreationResult r;
  LedgerSet set{bank1, bank2};
  r.steps.push_back({"I", bank1, bank2});
  if (amount == 0.0) {
    r.steps.push_back({"II", bank1, bank2});
    r.steps.push_back({"III", bank1, bank2});
    return r;
  }
  auto run = [&](const Event& e) {
    auto res = ledger::apply(set, e);
    set = std::move(res.ledgers);
    r.money_delta += res.money_delta;
    r.events.push_back(e);
  };
  if (bank1.cash < amount) {
    if (!repo_haircut)
      throw InfeasibleError("ledger: bank 0 cash shortfall " + format_number(amount - bank1.cash) +
                            " and no central bank fallback configured");
    Event repo{EventKind::CentralBankRepo, amount - bank1.cash, 0};
    repo.haircut = *repo_haircut;
    run(repo);
  }
  run({EventKind::LendFromCash, amount, 0});
  run({EventKind::DepositAtOther, amount, 1});
  r.steps.push_back({"II", set[0], set[1]});
  run({EventKind::InterbankLend, amount, 1, std::size_t{0}});
  r.steps.push_back({"III", set[0], set[1]});
  return r;
}

struct CapitalCheck {
  bool ok;
  double slack;  // equity − ν_b × loans
};

inline CapitalCheck capital_check(const BankLedger& b, double nu_b) {
  if (!(nu_b > 0.0 && nu_b < 1.0)) throw ParameterError("ledger: nu_b must be in (0,1)");
  const double slack = b.equity - nu_b * b.loans();
  return {slack > 0.0, slack};
}

}  // namespace circuitlab::ledger
