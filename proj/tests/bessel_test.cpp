#include <gtest/gtest.h>

#include <cmath>

#include "circuitlab/bessel.hpp"

using circuitlab::bessel::scaled_i;

namespace {

struct Ref {
  double nu, x, value;
};

// 40-digit reference values of e^{-x} I_nu(x).
constexpr Ref kRefs[] = {
    {0.0, 0.5, 6.4503527044915006811e-1},   {0.5, 0.001, 2.5206110707457800594e-2},
    {2.0, 1.5, 7.5381092492924109751e-2},   {2.5, 7.25, 9.5310737709242451769e-2},
    {4.0, 30.0, 5.5790965641060011526e-2},  {6.0, 59.5, 3.821032154734149791e-2},
    {10.0, 61.0, 2.244003940859721325e-2},  {0.3, 80.0, 4.4648011016732987954e-2},
    {1.7, 250.0, 2.5098189276619394414e-2}, {5.0, 1000.0, 1.246042894076886294e-2},
    {12.0, 100.0, 1.9389565226932819301e-2}, {20.0, 300.0, 1.1820202345559258552e-2},
    {25.0, 700.0, 9.6480417925040666758e-3}, {8.5, 145.0, 2.5826063440598406077e-2},
    {29.9, 1700.0, 7.4386086211397036823e-3}, {29.9, 65.0, 5.4590080919750270852e-5},
    {30.0, 5.0, 2.6937267526846668602e-23}, {30.0, 60.0, 3.1203820957121349877e-5},
    {45.5, 30.0, 3.8174715401968459448e-15}, {60.0, 200.0, 3.6405445584838732564e-6},
    {100.0, 100.0, 1.7266862628167695785e-22}, {250.0, 40.0, 1.1643023455281942988e-184},
    {500.0, 2000.0, 8.6940910544920397884e-30}, {3.14159, 0.02, 7.1044918875952481744e-8},
    {17.3, 500.0, 1.3226243952675577355e-2}, {1.0, 5000.0, 5.6414726668388859036e-3},
};

}  // namespace

TEST(Bessel, MatchesHighPrecisionReferences) {
  for (const auto& r : kRefs) {
    const double v = scaled_i(r.nu, r.x);
    EXPECT_NEAR(v / r.value, 1.0, 1e-12) << "nu=" << r.nu << " x=" << r.x << " got " << v;
  }
}

TEST(Bessel, HalfOrderClosedForm) {
  // I_{1/2}(x) = sqrt(2/(πx)) sinh x
  for (double x : {0.1, 3.0, 45.0, 70.0, 400.0}) {
    const double exact = std::sqrt(2.0 / (M_PI * x)) * 0.5 * (1.0 - std::exp(-2.0 * x));
    EXPECT_NEAR(scaled_i(0.5, x) / exact, 1.0, 1e-13) << x;
  }
}

TEST(Bessel, RecurrenceAcrossRegimes) {
  // I_{ν−1} − I_{ν+1} = (2ν/x) I_ν
  for (double nu : {1.3, 7.0, 15.5, 29.5, 31.0, 80.0})
    for (double x : {2.0, 59.0, 61.0, 150.0, 900.0, 3000.0}) {
      const double lhs = scaled_i(nu - 1.0, x) - scaled_i(nu + 1.0, x);
      const double rhs = 2.0 * nu / x * scaled_i(nu, x);
      EXPECT_NEAR(lhs / rhs, 1.0, 1e-9) << nu << " " << x;
    }
}

TEST(Bessel, ContinuousAtRegimeSwitches) {
  for (double nu : {5.5, 12.0, 29.0}) {
    EXPECT_NEAR(scaled_i(nu, 60.0) / scaled_i(nu, std::nextafter(60.0, 100.0)), 1.0, 1e-12);
    const double xs = std::max(60.0, 2 * nu * nu);
    EXPECT_NEAR(scaled_i(nu, xs) / scaled_i(nu, std::nextafter(xs, 0.0)), 1.0, 1e-12);
  }
  EXPECT_NEAR(scaled_i(30.0, 40.0) / scaled_i(std::nextafter(30.0, 0.0), 40.0), 1.0, 1e-12);
}

TEST(Bessel, EdgeCases) {
  EXPECT_EQ(scaled_i(0.0, 0.0), 1.0);
  EXPECT_EQ(scaled_i(2.0, 0.0), 0.0);
  EXPECT_THROW(scaled_i(-1.0, 1.0), circuitlab::DomainError);
  EXPECT_THROW(scaled_i(1.0, -1.0), circuitlab::DomainError);
  EXPECT_THROW(scaled_i(1.0, NAN), circuitlab::DomainError);
}
