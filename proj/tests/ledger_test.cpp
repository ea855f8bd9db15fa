#include <gtest/gtest.h>

#include "circuitlab/ledger.hpp"
#include "circuitlab/stochastic_engine.hpp"

using namespace circuitlab;
using namespace circuitlab::ledger;

namespace {

BankLedger single_bank() {
  BankLedger b;
  b.external_assets = 20;
  b.external_liabilities = 15;
  b.equity = 5;
  return b;
}

BankLedger make(double ea, double ia, double c, double el, double il, double e) {
  return {ea, ia, c, el, il, e};
}

}  // namespace

TEST(LedgerSingleBank, IssueRepayDefault) {
  LedgerSet s{single_bank()};
  const auto issued = ledger::apply(s, {EventKind::IssueLoanSingle, 2.0});
  EXPECT_EQ(issued.ledgers[0].assets(), 22.0);
  EXPECT_EQ(issued.ledgers[0].liabilities(), 17.0);
  EXPECT_EQ(issued.ledgers[0].equity, 5.0);
  EXPECT_EQ(issued.money_delta, 2.0);

  Event repay{EventKind::RepayWithInterest, 2.0};
  repay.interest = 0.5;
  const auto repaid = ledger::apply(issued.ledgers, repay);
  EXPECT_EQ(repaid.ledgers[0].assets(), 20.5);
  EXPECT_EQ(repaid.ledgers[0].liabilities(), 15.0);
  EXPECT_EQ(repaid.ledgers[0].equity, 5.5);
  EXPECT_EQ(repaid.money_delta, -2.0);

  const auto defaulted = ledger::apply(issued.ledgers, {EventKind::DefaultLoss, 2.0});
  EXPECT_EQ(defaulted.ledgers[0].assets(), 20.0);
  EXPECT_EQ(defaulted.ledgers[0].liabilities(), 17.0);
  EXPECT_EQ(defaulted.ledgers[0].equity, 3.0);
  EXPECT_EQ(defaulted.money_delta, 0.0);
}

TEST(LedgerSingleBank, RoundTripDestroysCreatedMoney) {
  LedgerSet s{single_bank()};
  const double m0 = money_supply(s);
  auto r = ledger::apply(s, {EventKind::IssueLoanSingle, 3.25});
  Event repay{EventKind::RepayWithInterest, 3.25};
  repay.interest = 0.1;
  r = ledger::apply(r.ledgers, repay);
  EXPECT_EQ(money_supply(r.ledgers), m0);
}

TEST(LedgerEvents, BalancePreservedOnRandomSequences) {
  RngStream rng(31, 0);
  LedgerSet s{make(50, 5, 10, 45, 5, 15), make(40, 5, 10, 40, 5, 10)};
  int applied = 0;
  for (int i = 0; i < 2000; ++i) {
    Event e{static_cast<EventKind>(rng.next_u64() % 7), 0.01 + 3 * rng.uniform(),
            static_cast<std::size_t>(rng.next_u64() % 2)};
    e.counterparty = 1 - e.bank;
    e.interest = 0.2 * rng.uniform();
    try {
      const auto r = ledger::apply(s, e);
      s = r.ledgers;
      ++applied;
    } catch (const InfeasibleError&) {
      continue;
    }
    for (const auto& b : s) {
      ASSERT_NEAR(b.balance_residual(), 0.0, 1e-10);
      ASSERT_GE(b.external_assets, 0.0);
      ASSERT_GE(b.cash, 0.0);
      ASSERT_GE(b.external_liabilities, 0.0);
    }
  }
  EXPECT_GT(applied, 500);
}

TEST(LedgerEvents, InfeasibleNamesShortfall) {
  LedgerSet s{make(1, 0, 0.5, 1, 0, 0.5)};
  try {
    ledger::apply(s, {EventKind::LendFromCash, 2.0});
    FAIL();
  } catch (const InfeasibleError& e) {
    EXPECT_NE(std::string(e.what()).find("cash shortfall 1.5"), std::string::npos) << e.what();
  }
  EXPECT_THROW(ledger::apply(s, {EventKind::DefaultLoss, 5.0}), InfeasibleError);
  EXPECT_THROW(ledger::apply(s, {EventKind::IssueLoanSingle, 0.0}), ParameterError);
}

TEST(LedgerEvents, RepoHaircutRequiresCollateral) {
  LedgerSet s{make(10, 0, 0, 8, 0, 2)};
  Event e{EventKind::CentralBankRepo, 5.0};
  e.haircut = 0.5;
  const auto r = ledger::apply(s, e);
  EXPECT_EQ(r.ledgers[0].cash, 5.0);
  EXPECT_EQ(r.ledgers[0].interbank_liabilities, 5.0);
  e.amount = 5.5;
  EXPECT_THROW(ledger::apply(s, e), InfeasibleError);
}

TEST(LedgerTwoBank, ReproducesThreeSteps) {
  const auto r = two_bank_creation(make(19, 6, 3, 20, 3, 5), make(24, 9, 4, 25, 7, 5), 2.0);
  ASSERT_EQ(r.steps.size(), 3u);
  EXPECT_EQ(r.steps[1].bank1, make(21, 6, 1, 20, 3, 5));
  EXPECT_EQ(r.steps[1].bank2, make(24, 9, 6, 27, 7, 5));
  EXPECT_EQ(r.steps[2].bank1, make(21, 6, 3, 20, 5, 5));
  EXPECT_EQ(r.steps[2].bank2, make(24, 11, 4, 27, 7, 5));
  EXPECT_EQ(r.money_delta, 2.0);
  for (const auto& st : r.steps) {
    EXPECT_EQ(st.bank1.equity, 5.0);
    EXPECT_EQ(st.bank2.equity, 5.0);
  }
}

TEST(LedgerTwoBank, ZeroAmountIsIdentity) {
  const auto b1 = make(19, 6, 3, 20, 3, 5), b2 = make(24, 9, 4, 25, 7, 5);
  const auto r = two_bank_creation(b1, b2, 0.0);
  for (const auto& st : r.steps) {
    EXPECT_EQ(st.bank1, b1);
    EXPECT_EQ(st.bank2, b2);
  }
}

TEST(LedgerTwoBank, LiquidityShortfall) {
  const auto b1 = make(19, 6, 3, 20, 3, 5), b2 = make(24, 9, 4, 25, 7, 5);
  EXPECT_THROW(two_bank_creation(b1, b2, 4.0), InfeasibleError);
  const auto r = two_bank_creation(b1, b2, 4.0, 0.0);
  ASSERT_EQ(r.events.front().kind, EventKind::CentralBankRepo);
  EXPECT_EQ(r.events.front().amount, 1.0);
  EXPECT_EQ(r.steps[1].bank1.cash, 0.0);
  EXPECT_EQ(r.steps[2].bank1.cash, 4.0);
  EXPECT_NEAR(r.steps[2].bank1.balance_residual(), 0.0, 1e-12);
}

TEST(LedgerCapital, Check) {
  BankLedger b = single_bank();
  b.external_assets = 22;
  b.external_liabilities = 17;
  const auto c = capital_check(b, 0.1);
  EXPECT_TRUE(c.ok);
  EXPECT_NEAR(c.slack, 2.8, 1e-14);
  b.equity = 0;
  EXPECT_FALSE(capital_check(b, 0.1).ok);
  BankLedger empty;
  empty.cash = 1;
  empty.equity = 1;
  EXPECT_TRUE(capital_check(empty, 0.5).ok);
  EXPECT_THROW(capital_check(b, 1.5), ParameterError);
}
