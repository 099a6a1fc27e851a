#include "mixedpo/policy_iteration.h"

#include <chrono>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "mixedpo/riccati.h"
#include "mixedpo/trace_io.h"
#include "test_util.h"

namespace mixedpo {
namespace {

using test::CodeOf;

const double kPStar = (2.0 + std::sqrt(7.0)) / 1.5;

// Scalar recursion with a = b = d = q = r = 1: A_KL = 1 - K + L,
// Q_K - g^2 L^2 = 1 + K^2 - g^2 L^2, P = (Q_K - g^2 L^2) / (-2 A_KL).
std::vector<double> ScalarInnerSequence(double k, double gamma, int count) {
  std::vector<double> out;
  double l = 0.0;
  for (int i = 0; i < count; ++i) {
    const double p = (1 + k * k - gamma * gamma * l * l) / (-2.0 * (1 - k + l));
    out.push_back(p);
    l = p / (gamma * gamma);
  }
  return out;
}

// Stabilizing root of P^2 / g^2 + 2(1 - K) P + 1 + K^2 = 0.
double ScalarBoundedReal(double k, double gamma) {
  const double a = 1.0 / (gamma * gamma), b = 2.0 * (1.0 - k), c = 1.0 + k * k;
  return (-b - std::sqrt(b * b - 4 * a * c)) / (2 * a);
}

GainPair Scalar(double k) { return {Matrix::Constant(1, 1, k), Matrix::Zero(1, 1)}; }

TEST(InnerLoop, GoldenSequenceFromK3) {
  const InnerResult r = InnerLoop(GoldenScalar(), Matrix::Constant(1, 1, 3.0), 2.0, 200, 1e-13);
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.records[0].P(0, 0), 2.5, 1e-14);
  EXPECT_NEAR(r.records[1].P(0, 0), 3.06818, 5e-6);
  EXPECT_NEAR(r.records[2].P(0, 0), 3.1009, 5e-5);
  const std::vector<double> oracle = ScalarInnerSequence(3.0, 2.0, r.records.size());
  for (std::size_t q = 0; q < r.records.size(); ++q) {
    EXPECT_NEAR(r.records[q].P(0, 0), oracle[q], 1e-12) << q;
  }
  EXPECT_NEAR(r.P(0, 0), 8.0 - std::sqrt(24.0), 1e-12);
  EXPECT_NEAR(r.L(0, 0), r.P(0, 0) / 4.0, 1e-15);
}

TEST(InnerLoop, DivergesOutsideConstraintSet) {
  // K = 2: |T_zw| = sqrt(5) > 2, no bounded-real root; L grows until
  // A_KL = -1 + L loses stability.
  const Matrix k = Matrix::Constant(1, 1, 2.0);
  EXPECT_EQ(CodeOf([&] { InnerLoop(GoldenScalar(), k, 2.0, 500, 1e-12); }),
            ErrorCode::kInnerDivergence);
  const InnerResult r = InnerLoop(GoldenScalar(), k, 2.0, 500, 1e-12, {}, true);
  EXPECT_GT(r.diverged_at, 0);
  EXPECT_FALSE(r.converged);
}

TEST(InnerLoop, BudgetIsInnerMaxPlusOne) {
  const InnerResult r = InnerLoop(GoldenScalar(), Matrix::Constant(1, 1, 3.0), 2.0, 3, 1e-15);
  EXPECT_EQ(r.records.size(), 4u);
  EXPECT_FALSE(r.converged);
}

TEST(DoubleLoop, GoldenOuterSequenceFromK3) {
  DesignConfig c;
  c.gamma = 2.0;
  c.tol = 1e-12;
  c.inner_max = 500;
  const IterationTrace t = RunDoubleLoop(GoldenScalar(), c, Scalar(3.0));
  ASSERT_TRUE(t.converged);
  EXPECT_NEAR(t.outer[0].P(0, 0), 3.10102, 5e-6);
  // Exact value 3.0971731...; the quoted five-decimal figure is one unit high.
  EXPECT_NEAR(t.outer[1].P(0, 0), 3.09718, 1e-5);
  double k = 3.0;
  for (const OuterRecord& rec : t.outer) {
    EXPECT_NEAR(rec.K(0, 0), k, 1e-10);
    EXPECT_NEAR(rec.P(0, 0), ScalarBoundedReal(k, 2.0), 1e-10) << rec.p;
    k = ScalarBoundedReal(k, 2.0);
  }
  EXPECT_NEAR(t.P_final(0, 0), kPStar, 1e-10);
}

TEST(DoubleLoop, GoldenConvergesFast) {
  DesignConfig c;
  c.gamma = 2.0;
  const auto start = std::chrono::steady_clock::now();
  const IterationTrace t = RunDoubleLoop(GoldenScalar(), c);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ASSERT_TRUE(t.converged);
  EXPECT_LE(t.outer.size(), 10u);
  EXPECT_LE(std::abs(t.P_final(0, 0) - kPStar), 1e-8);
  EXPECT_LT(secs, 0.1);
}

TEST(DoubleLoop, FixedPointIsStationary) {
  DesignConfig c;
  c.gamma = 2.0;
  const IterationTrace t = RunDoubleLoop(GoldenScalar(), c, Scalar(kPStar));
  ASSERT_TRUE(t.converged);
  EXPECT_EQ(t.outer.size(), 1u);
  EXPECT_LE(t.outer[0].gain_step, 1e-8);
}

TEST(DoubleLoop, InfeasibleStartRejected) {
  DesignConfig c;
  c.gamma = 2.0;
  EXPECT_EQ(CodeOf([&] { RunDoubleLoop(GoldenScalar(), c, Scalar(2.0)); }),
            ErrorCode::kInfeasibleStart);
  EXPECT_EQ(CodeOf([&] { RunDoubleLoop(GoldenScalar(), c, Scalar(0.5)); }),
            ErrorCode::kInfeasibleStart);
}

TEST(DoubleLoop, OuterBudgetRespected) {
  DesignConfig c;
  c.gamma = 2.0;
  c.outer_max = 2;
  c.tol = 1e-14;
  const IterationTrace t = RunDoubleLoop(GoldenScalar(), c, Scalar(3.0));
  EXPECT_EQ(t.outer.size(), 2u);
  EXPECT_FALSE(t.converged);
}

TEST(DoubleLoop, TriplePendulumStaysInSet) {
  const StochasticPlant plant = TriplePendulum();
  DesignConfig c;
  IterationTrace t = RunDoubleLoop(plant, c);
  AttachDiagnostics(t, plant, c.gamma);
  ASSERT_TRUE(t.converged);
  for (const OuterRecord& rec : t.outer) {
    EXPECT_TRUE(rec.in_set) << rec.p;
    EXPECT_LT(rec.hinf, c.gamma);
  }
  const Matrix p_star = SolveGareOracle(plant, c.gamma);
  EXPECT_LT(test::RelFro(t.P_final, p_star), 1e-6);
}

// Property suite on a small random corpus; the acceptance binary runs the
// full one.
class CorpusProperties : public ::testing::TestWithParam<int> {};

TEST_P(CorpusProperties, MonotoneContractiveFeasible) {
  const auto entry = test::Corpus(1, 1 + static_cast<std::uint64_t>(GetParam()))[0];
  DesignConfig c;
  c.gamma = entry.gamma;
  IterationTrace t = RunDoubleLoop(entry.plant, c);
  AttachDiagnostics(t, entry.plant, c.gamma);
  ASSERT_TRUE(t.converged);
  const Matrix p_star = SolveGareOracle(entry.plant, c.gamma);
  EXPECT_LT(test::RelFro(t.P_final, p_star), 1e-6);
  for (std::size_t p = 0; p < t.outer.size(); ++p) {
    const OuterRecord& rec = t.outer[p];
    EXPECT_TRUE(rec.in_set);
    if (p + 1 < t.outer.size()) {
      const Matrix diff = rec.P - t.outer[p + 1].P;
      EXPECT_GE(MinSymEigenvalue(diff), -1e-9 * (1 + rec.P.norm())) << p;
    }
    for (std::size_t q = 0; q + 1 < rec.inner.size(); ++q) {
      const Matrix diff = rec.inner[q + 1].P - rec.inner[q].P;
      EXPECT_GE(MinSymEigenvalue(diff), -1e-9 * (1 + rec.P.norm())) << p << "," << q;
      EXPECT_TRUE(rec.inner[q].hurwitz_ok);
    }
  }
  const ConvergenceCertificate cert = Certify(t, entry.plant, c.gamma, p_star);
  EXPECT_TRUE(cert.ok()) << (cert.flags.empty() ? "" : cert.flags.front());
}

INSTANTIATE_TEST_SUITE_P(Random, CorpusProperties, ::testing::Range(0, 12));

TEST(Certificate, GoldenRatiosMatchScalarOracle) {
  const StochasticPlant g = GoldenScalar();
  DesignConfig c;
  c.gamma = 2.0;
  c.tol = 1e-12;
  c.inner_max = 500;
  IterationTrace t = RunDoubleLoop(g, c, Scalar(3.0));
  const ConvergenceCertificate cert = Certify(t, g, 2.0, Matrix::Constant(1, 1, kPStar));
  EXPECT_TRUE(cert.ok());
  ASSERT_GE(cert.outer_ratios.size(), 1u);
  const double r0 = (ScalarBoundedReal(ScalarBoundedReal(3.0, 2.0), 2.0) - kPStar) /
                    (ScalarBoundedReal(3.0, 2.0) - kPStar);
  EXPECT_NEAR(cert.outer_ratios[0], r0, 1e-6);
  EXPECT_GT(cert.c_h, 0.0);
  for (double r : cert.inner_ratios[0]) {
    if (!std::isnan(r)) {
      EXPECT_GE(r, 0.0);
      EXPECT_LT(r, 1.0);
    }
  }
}

TEST(Certificate, FlagsNonContractiveTrace) {
  const StochasticPlant g = GoldenScalar();
  DesignConfig c;
  c.gamma = 2.0;
  IterationTrace t = RunDoubleLoop(g, c, Scalar(3.0));
  ASSERT_GE(t.outer.size(), 3u);
  std::swap(t.outer[0].P, t.outer[1].P);  // makes the first ratio exceed 1
  const ConvergenceCertificate cert = Certify(t, g, 2.0, Matrix::Constant(1, 1, kPStar));
  EXPECT_FALSE(cert.ok());
}

TEST(TraceCsv, LayoutAndDeterminism) {
  const StochasticPlant g = GoldenScalar();
  DesignConfig c;
  c.gamma = 2.0;
  auto render = [&] {
    IterationTrace t = RunDoubleLoop(g, c, Scalar(3.0));
    AttachDiagnostics(t, g, 2.0);
    const ConvergenceCertificate cert = Certify(t, g, 2.0, Matrix::Constant(1, 1, kPStar));
    std::ostringstream out;
    WriteTraceCsv(out, t, &cert, false);
    return std::make_pair(out.str(), t);
  };
  const auto [a, trace] = render();
  const auto [b, unused] = render();
  EXPECT_EQ(a, b);
  std::istringstream in(a);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, kTraceHeader);
  std::size_t rows = 0, expected = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 8) << line;
    EXPECT_EQ(line.substr(line.rfind(',') + 1), "0");
  }
  for (const OuterRecord& rec : trace.outer) expected += rec.inner.size() + 1;
  EXPECT_EQ(rows, expected);
  EXPECT_EQ(a.find('\r'), std::string::npos);
}

TEST(FormatDouble, RoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, kPStar, 1e-300, -2.5e17, 0.0}) {
    EXPECT_EQ(std::strtod(FormatDouble(x).c_str(), nullptr), x);
  }
  EXPECT_EQ(FormatDouble(0.1), "0.1");
  EXPECT_EQ(FormatDouble(std::numeric_limits<double>::infinity()), "inf");
}

}  // namespace
}  // namespace mixedpo
