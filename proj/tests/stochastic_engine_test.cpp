#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "circuitlab/stochastic_engine.hpp"

using namespace circuitlab;

TEST(RngStream, SameSeedAndIndexReproduce) {
  RngStream a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.normal(), b.normal());
}

TEST(RngStream, DistinctIndicesDiffer) {
  RngStream a(42, 0), b(42, 1), c(43, 0);
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    same_ab += x == b.next_u64();
    same_ac += x == c.next_u64();
  }
  EXPECT_EQ(same_ab, 0);
  EXPECT_EQ(same_ac, 0);
}

TEST(RngStream, NeighbouringStreamsUncorrelated) {
  const int n = 200000;
  RngStream a(1, 100), b(1, 101);
  double sxy = 0.0;
  for (int i = 0; i < n; ++i) sxy += a.normal() * b.normal();
  EXPECT_LT(std::abs(sxy / n), 3.0 / std::sqrt(n));
}

TEST(RngStream, UniformInOpenInterval) {
  RngStream s(0, 0);
  for (int i = 0; i < 100000; ++i) {
    const double u = s.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(GaussianIncrements, UnitVariance) {
  RngStream s(11, 0);
  const auto corr = CorrelationMatrix::identity(1);
  const int n = 1000000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = gaussian_increments(s, corr, 1.0)[0];
    sum += x;
    sum2 += x * x;
  }
  const double var = sum2 / n - (sum / n) * (sum / n);
  EXPECT_NEAR(var, 1.0, 0.01);
}

TEST(GaussianIncrements, IndependentPair) {
  RngStream s(12, 0);
  const auto corr = CorrelationMatrix::pair(0.0);
  const int n = 1000000;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto d = gaussian_increments(s, corr, 1.0);
    sxy += d[0] * d[1];
    sxx += d[0] * d[0];
    syy += d[1] * d[1];
  }
  EXPECT_LT(std::abs(sxy / std::sqrt(sxx * syy)), 3.0 / std::sqrt(n));
}

TEST(GaussianIncrements, CorrelatedCovariance) {
  RngStream s(13, 0);
  const auto corr = CorrelationMatrix::pair(0.5);
  const int n = 1000000;
  const double dt = 0.25;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto d = gaussian_increments(s, corr, dt);
    const double p = d[0] * d[1];
    sum += p;
    sum2 += p * p;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum2 / n - mean * mean) / n);
  EXPECT_LT(std::abs(mean - 0.125), 3.0 * se);
}

TEST(GaussianIncrements, RejectsNonPositiveDt) {
  RngStream s(1, 0);
  EXPECT_THROW(gaussian_increments(s, CorrelationMatrix::identity(2), 0.0), ParameterError);
}

TEST(CorrelationMatrix, NonPsdReportsPivot) {
  try {
    CorrelationMatrix m({{1.0, 0.9, 0.9}, {0.9, 1.0, -0.9}, {0.9, -0.9, 1.0}});
    FAIL() << "expected failure";
  } catch (const ParameterError& e) {
    EXPECT_NE(std::string(e.what()).find("pivot 2"), std::string::npos) << e.what();
  }
}

TEST(CorrelationMatrix, RejectsAsymmetricAndBadDiagonal) {
  EXPECT_THROW(CorrelationMatrix({{1.0, 0.2}, {0.3, 1.0}}), ParameterError);
  EXPECT_THROW(CorrelationMatrix({{2.0, 0.0}, {0.0, 1.0}}), ParameterError);
}

TEST(CorrelationMatrix, PerfectCorrelationAccepted) {
  const auto m = CorrelationMatrix::pair(1.0);
  RngStream s(3, 0);
  const auto d = gaussian_increments(s, m, 1.0);
  EXPECT_DOUBLE_EQ(d[0], d[1]);
}

TEST(CorrelationMatrix, WithoutRemovesRowAndColumn) {
  CorrelationMatrix m({{1.0, 0.1, 0.2}, {0.1, 1.0, 0.3}, {0.2, 0.3, 1.0}});
  const auto r = m.without(1);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_DOUBLE_EQ(r(0, 1), 0.2);
}

TEST(JumpSpec, RejectsNegativeIntensity) {
  EXPECT_THROW(JumpSpec(2, {{{0}, -0.1}}, {1.0, 1.0}), ParameterError);
  EXPECT_THROW(JumpSpec(2, {{{0}, 0.1}}, {1.0, 0.0}), ParameterError);
}

TEST(JumpSpec, CommonShockOnlyJumpsTogether) {
  JumpSpec spec(2, {{{0, 1}, 0.1}}, {2.0, 2.0});
  RngStream s(5, 0);
  int jumps = 0;
  for (int i = 0; i < 100000; ++i) {
    const auto d = marshall_olkin_arrivals(s, spec, 0.1);
    ASSERT_EQ(d.counts[0], d.counts[1]);
    jumps += d.counts[0];
  }
  EXPECT_GT(jumps, 0);
}

TEST(JumpSpec, SingletonSubsetsIndependent) {
  JumpSpec spec(2, {{{0}, 0.5}, {{1}, 0.5}}, {1.0, 1.0});
  RngStream s(6, 0);
  const int n = 200000;
  double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    const auto d = marshall_olkin_arrivals(s, spec, 1.0);
    const double x = d.counts[0], y = d.counts[1];
    sx += x;
    sy += y;
    sxy += x * y;
    sxx += x * x;
    syy += y * y;
  }
  const double cov = sxy / n - sx / n * sy / n;
  const double corr = cov / std::sqrt((sxx / n - sx * sx / n / n) * (syy / n - sy * sy / n / n));
  EXPECT_LT(std::abs(corr), 3.0 / std::sqrt(n));
}

TEST(JumpSpec, PoissonSuperpositionMean) {
  JumpSpec spec(2, {{{0, 1}, 0.05}, {{0}, 0.02}}, {1.0, 1.0});
  EXPECT_DOUBLE_EQ(spec.intensity(0), 0.07);
  EXPECT_DOUBLE_EQ(spec.intensity(1), 0.05);
  const int n = 100000;
  const double horizon = 10.0, dt = 0.5;
  std::vector<double> counts(n);
  for (int p = 0; p < n; ++p) {
    RngStream s(7, p);
    double c = 0;
    for (double t = 0; t < horizon - 1e-12; t += dt) c += marshall_olkin_arrivals(s, spec, dt).counts[0];
    counts[p] = c;
  }
  const double mean = pairwise_sum(counts) / n;
  double var = 0;
  for (double c : counts) var += (c - mean) * (c - mean);
  const double se = std::sqrt(var / (n - 1) / n);
  EXPECT_LT(std::abs(mean - 0.7), 3.0 * se);
}

TEST(JumpSpec, CompensatorMatchesAmplitudeMean) {
  const double decay = 2.5;
  JumpSpec spec(1, {{{0}, 1.0}}, {decay});
  EXPECT_DOUBLE_EQ(spec.compensator(0), -1.0 / (decay + 1.0));
  RngStream s(8, 0);
  const int n = 1000000;
  double sum = 0, sum2 = 0;
  for (int i = 0; i < n; ++i) {
    const double v = std::exp(-s.exponential(decay)) - 1.0;
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum2 / n - mean * mean) / n);
  EXPECT_LT(std::abs(mean - spec.compensator(0)), 3.0 * se);
}

TEST(JumpSpec, WithoutReindexesSubsets) {
  JumpSpec spec(3, {{{0, 2}, 0.1}, {{1}, 0.2}}, {1.0, 2.0, 3.0});
  const auto r = spec.without(1);
  EXPECT_EQ(r.size(), 2u);
  EXPECT_DOUBLE_EQ(r.intensity(1), 0.1);
  EXPECT_DOUBLE_EQ(r.decay(1), 3.0);
}

TEST(EulerStep, IdentityWithoutDriftOrNoise) {
  const std::vector<double> x{1.0, -2.0};
  const std::vector<double> zero{0.0, 0.0};
  const auto y = euler_step(x, zero, {}, {}, {}, 0.1);
  EXPECT_EQ(y, x);
}

TEST(EulerStep, DeterministicDrift) {
  const std::vector<double> x{1.0};
  const std::vector<double> d{0.3};
  EXPECT_DOUBLE_EQ(euler_step(x, d, {}, {}, {}, 0.5)[0], 1.0 + 0.3 * 0.5);
}

TEST(EulerStep, NonFiniteNamesComponent) {
  const std::vector<double> x{1.0, NAN};
  const std::vector<double> d{0.0, 0.0};
  try {
    euler_step(x, d, {}, {}, {}, 0.1);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("component 1"), std::string::npos);
  }
}

TEST(EulerStep, GeometricBrownianMean) {
  const double mu = 0.1, sigma = 0.2, T = 1.0, dt = 0.01;
  const int n = 100000;
  std::vector<double> terminal(n);
  for (int p = 0; p < n; ++p) {
    RngStream s(9, p);
    std::vector<double> x{1.0};
    const auto corr = CorrelationMatrix::identity(1);
    for (int k = 0; k < 100; ++k) {
      const std::vector<double> drift{mu * x[0]};
      const std::vector<double> diff{sigma * x[0]};
      x = euler_step(x, drift, diff, gaussian_increments(s, corr, dt), {}, dt);
    }
    terminal[p] = x[0];
  }
  const double mean = pairwise_sum(terminal) / n;
  double var = 0;
  for (double v : terminal) var += (v - mean) * (v - mean);
  const double se = std::sqrt(var / (n - 1) / n);
  EXPECT_LT(std::abs(mean - std::exp(mu * T)), 3.0 * se);
}

TEST(ParallelFor, ResultIndependentOfWorkerCount) {
  auto run = [](std::size_t workers) {
    worker_count_setting() = workers;
    std::vector<double> out(1000);
    parallel_for(out.size(), [&](std::size_t i) {
      RngStream s(99, i);
      out[i] = s.normal();
    });
    worker_count_setting() = 0;
    return pairwise_sum(out);
  };
  EXPECT_EQ(run(1), run(4));
}

TEST(ParallelFor, PropagatesExceptions) {
  worker_count_setting() = 3;
  EXPECT_THROW(parallel_for(10, [](std::size_t i) {
                 if (i == 5) throw DomainError("boom");
               }),
               DomainError);
  worker_count_setting() = 0;
}
