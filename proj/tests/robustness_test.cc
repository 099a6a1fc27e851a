#include "mixedpo/robustness.h"

#include <cmath>

#include <gtest/gtest.h>

#include "mixedpo/riccati.h"
#include "test_util.h"

namespace mixedpo {
namespace {

using test::CodeOf;

const double kPStar = (2.0 + std::sqrt(7.0)) / 1.5;

// Golden plant, gamma = 2: smaller root of P^2/4 + 2(1 - K)P + 1 + K^2 = 0.
double ScalarBoundedReal(double k) {
  const double b = 2 * (1 - k), c = 1 + k * k;
  return (-b - std::sqrt(b * b - c)) * 2.0;
}

double Sign(std::uint64_t seed, int iteration) {
  return PerturbGain(1, 1, 1.0, seed, iteration)(0, 0);
}

GainPair Scalar(double k) { return {Matrix::Constant(1, 1, k), Matrix::Zero(1, 1)}; }

DesignConfig GoldenConfig() {
  DesignConfig c;
  c.gamma = 2.0;
  return c;
}

TEST(PerturbGain, NormAndDeterminism) {
  const Matrix a = PerturbGain(3, 6, 0.15, 7, 2);
  EXPECT_NEAR(a.norm(), 0.15, 1e-15);
  EXPECT_EQ(a, PerturbGain(3, 6, 0.15, 7, 2));
  EXPECT_NE(a, PerturbGain(3, 6, 0.15, 7, 3));
  EXPECT_NE(a, PerturbGain(3, 6, 0.15, 8, 2));
  // The direction does not depend on the magnitude.
  EXPECT_LT((PerturbGain(3, 6, 1.5, 7, 2) - 10 * a).norm(), 1e-14);
  EXPECT_TRUE(PerturbGain(3, 6, 0.0, 7, 2).isZero());
  EXPECT_EQ(CodeOf([] { PerturbGain(1, 1, -1.0, 1); }), ErrorCode::kBadParams);
}

TEST(InexactOuter, ZeroMagnitudeIsExact) {
  for (const StochasticPlant& plant : {GoldenScalar(), TriplePendulum()}) {
    DesignConfig c;
    c.gamma = plant.n() == 1 ? 2.0 : 5.0;
    const GainPair init = InitialGainSearch(plant, c.gamma);
    const IterationTrace exact = RunDoubleLoop(plant, c, init);
    const InexactRun run =
        RunInexactOuter(plant, c, {PerturbTarget::kOuter, 0.0, 5}, init,
                        SolveGareOracle(plant, c.gamma));
    ASSERT_EQ(run.trace.outer.size(), exact.outer.size());
    for (std::size_t p = 0; p < exact.outer.size(); ++p) {
      EXPECT_EQ(run.trace.outer[p].K, exact.outer[p].K);
      EXPECT_EQ(run.trace.outer[p].P, exact.outer[p].P);
    }
    EXPECT_EQ(run.trace.K_final, exact.K_final);
    EXPECT_FALSE(run.feasibility_lost);
  }
}

TEST(InexactOuter, MatchesScalarRecursion) {
  const double delta = 0.05;
  const std::uint64_t seed = 3;
  const InexactRun run = RunInexactOuter(GoldenScalar(), GoldenConfig(),
                                         {PerturbTarget::kOuter, delta, seed}, Scalar(3.0),
                                         Matrix::Constant(1, 1, kPStar));
  ASSERT_EQ(run.errors.size(), 20u);
  double k = 3.0;
  for (int p = 0; p < 20; ++p) {
    const double pk = ScalarBoundedReal(k);
    EXPECT_NEAR(run.errors[p], std::abs(pk - kPStar), 1e-7) << p;
    k = pk + delta * Sign(seed, p + 1);
  }
}

TEST(InexactOuter, PlateauScalesQuadratically) {
  // K* minimizes P_K, so a gain offset delta costs O(delta^2).
  std::vector<double> mags{0.015, 0.05, 0.15}, plateaus;
  for (double delta : mags) {
    double mean = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      mean += RunInexactOuter(GoldenScalar(), GoldenConfig(),
                              {PerturbTarget::kOuter, delta, seed}, Scalar(3.0),
                              Matrix::Constant(1, 1, kPStar))
                  .plateau /
              10;
    }
    plateaus.push_back(mean);
  }
  EXPECT_LT(plateaus[0], plateaus[1]);
  EXPECT_LT(plateaus[1], plateaus[2]);
  EXPECT_NEAR(LogLogSlope(mags, plateaus), 2.0, 0.1);
}

TEST(InexactOuter, LeavingTheSetStopsTheRun) {
  // Large offsets eventually push K below the set; hinf(K) = sqrt(1 + K^2) / (K - 1).
  const double delta = 1.5;
  const InexactRun run = RunInexactOuter(GoldenScalar(), GoldenConfig(),
                                         {PerturbTarget::kOuter, delta, 1}, Scalar(3.0),
                                         Matrix::Constant(1, 1, kPStar));
  int lost = -1;
  double k = 3.0;
  for (int p = 1; p < 20 && lost < 0; ++p) {
    k = ScalarBoundedReal(k) + delta * Sign(1, p);
    if (k <= 1.0 || std::sqrt(1 + k * k) / (k - 1) >= 2.0) lost = p;
  }
  ASSERT_GT(lost, 0);
  EXPECT_TRUE(run.feasibility_lost);
  EXPECT_EQ(run.lost_at, lost);
  EXPECT_EQ(run.trace.outer.size(), static_cast<std::size_t>(lost));
}

TEST(InexactInner, MatchesScalarRecursion) {
  // P^{q+1} = (1 + K^2 - 4 L^2) / (2 (K - 1 - L)), L_{q+1} = P^q / 4 + delta s.
  const double k = 3.0, delta = 0.02;
  const std::uint64_t seed = 4;
  const double p_k = ScalarBoundedReal(k);
  const InexactRun run = RunInexactInner(GoldenScalar(), GoldenConfig(),
                                         {PerturbTarget::kInner, delta, seed},
                                         Matrix::Constant(1, 1, k), Matrix::Constant(1, 1, p_k));
  ASSERT_GE(run.errors.size(), 10u);
  double l = 0.0;
  for (std::size_t q = 0; q < run.errors.size(); ++q) {
    const double p = (1 + k * k - 4 * l * l) / (2 * (k - 1 - l));
    EXPECT_NEAR(run.errors[q], std::abs(p - p_k), 1e-10) << q;
    l = p / 4 + delta * Sign(seed, static_cast<int>(q) + 1);
  }
}

TEST(InexactInner, ZeroMagnitudeEnvelope) {
  // The exact inner loop contracts geometrically: a clean log-linear envelope.
  const StochasticPlant t = TriplePendulum();
  DesignConfig c;
  const GainPair init = InitialGainSearch(t, 5.0);
  const auto p_k = BoundedRealSolve(t, init.K, 5.0);
  ASSERT_TRUE(p_k.has_value());
  const InexactRun run =
      RunInexactInner(t, c, {PerturbTarget::kInner, 0.0, 1}, init.K, *p_k);
  const InnerResult exact = InnerLoop(t, init.K, 5.0, c.inner_max, c.tol);
  EXPECT_EQ(run.trace.P_final, exact.P);
  const EnvelopeFit fit = FitEnvelope(run.errors, run.plateau);
  EXPECT_GE(fit.points, 3);
  EXPECT_LT(fit.ratio, 1.0);
  EXPECT_GT(fit.r2, 0.9);
  EXPECT_GE(fit.lift, 1.0);
}

TEST(Envelope, ExactGeometricSequence) {
  std::vector<double> e;
  for (int i = 0; i < 12; ++i) e.push_back(3.0 * std::pow(0.4, i));
  const EnvelopeFit fit = FitEnvelope(e, 0.0);
  EXPECT_EQ(fit.points, 12);
  EXPECT_NEAR(fit.ratio, 0.4, 1e-12);
  EXPECT_NEAR(fit.r2, 1.0, 1e-12);
  EXPECT_NEAR(fit.lift, 1.0, 1e-12);
  // Points under twice the plateau are excluded.
  EXPECT_EQ(FitEnvelope(e, 3.0 * std::pow(0.4, 5)).points, 5);
  EXPECT_EQ(FitEnvelope({1.0, 0.5}, 0.0).points, 2);
  EXPECT_TRUE(std::isnan(FitEnvelope({1.0, 0.5}, 0.0).ratio));
}

TEST(Envelope, LogLogSlope) {
  const std::vector<double> x{0.1, 1.0, 10.0};
  EXPECT_NEAR(LogLogSlope(x, {0.02, 2.0, 200.0}), 2.0, 1e-12);
  EXPECT_NEAR(LogLogSlope(x, {5.0, 0.5, 0.05}), -1.0, 1e-12);
  // Non-positive pairs are skipped.
  EXPECT_NEAR(LogLogSlope({0.0, 0.1, 1.0, 10.0}, {1.0, 0.1, 1.0, 10.0}), 1.0, 1e-12);
}

TEST(IssSweep, ReportAndThreadIndependence) {
  IssSweepConfig s;
  s.seeds = 6;
  s.init = Scalar(3.0);
  s.threads = 1;
  const IssSweepResult one = RunIssSweep(GoldenScalar(), GoldenConfig(), s);
  s.threads = 4;
  const IssSweepResult four = RunIssSweep(GoldenScalar(), GoldenConfig(), s);
  EXPECT_EQ(one.report.plateau_mean, four.report.plateau_mean);
  EXPECT_TRUE(one.report.monotone);
  EXPECT_NEAR(one.report.slope, 2.0, 0.2);
  EXPECT_EQ(one.runs.size(), 3u);
  EXPECT_EQ(one.runs[0].size(), 6u);
  const nlohmann::json j = ISSReportToJson(one.report);
  EXPECT_EQ(j["target"], "outer");
  EXPECT_EQ(j["magnitudes"].size(), 3u);
  EXPECT_EQ(j["seeds"], 6);
}

}  // namespace
}  // namespace mixedpo
