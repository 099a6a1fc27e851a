#include "mixedpo/npg.h"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "mixedpo/riccati.h"
#include "test_util.h"

namespace mixedpo {
namespace {

using test::CodeOf;
using test::RelFro;

const double kInf = std::numeric_limits<double>::infinity();

// Scalar LQR cost of u = -Kx for a = b = q = r = 1.
double ScalarLqrCost(double k) { return (1 + k * k) / (2 * (k - 1)); }

TEST(Npg, EvaluateMatchesScalarCost) {
  for (double k : {1.5, 2.0, 3.0, 10.0}) {
    EXPECT_NEAR(NpgEvaluate(GoldenScalar(), Matrix::Constant(1, 1, k), kInf)(0, 0),
                ScalarLqrCost(k), 1e-12);
  }
  EXPECT_EQ(CodeOf([] { NpgEvaluate(GoldenScalar(), Matrix::Constant(1, 1, 0.5), kInf); }),
            ErrorCode::kNotStabilizing);
  // hinf(2) = sqrt(5) > 2.
  EXPECT_EQ(CodeOf([] { NpgEvaluate(GoldenScalar(), Matrix::Constant(1, 1, 2.0), 2.0); }),
            ErrorCode::kEvaluationInfeasible);
}

TEST(Npg, HalfStepIsKleinman) {
  // eta = 1/(2r): K - (K - P_K) = P_K.
  const Matrix k = NpgStep(GoldenScalar(), Matrix::Constant(1, 1, 3.0), kInf, 0.5);
  EXPECT_NEAR(k(0, 0), 2.5, 1e-12);
}

TEST(Npg, ScalarLqrConverges) {
  NpgConfig c;
  c.eta = 0.5;
  const IterationTrace tr = RunNpg(GoldenScalar(), c, Matrix::Constant(1, 1, 3.0));
  EXPECT_TRUE(tr.converged);
  EXPECT_NEAR(tr.K_final(0, 0), 1 + std::sqrt(2.0), 1e-6);
  EXPECT_EQ(tr.method, "npg");
  for (std::size_t i = 1; i < tr.outer.size(); ++i) {
    EXPECT_LE(tr.outer[i].P.trace(), tr.outer[i - 1].P.trace() + 1e-12);
  }
}

TEST(Npg, SmallStepConvergesLinearly) {
  NpgConfig c;
  c.eta = 0.05;
  c.tol = 1e-10;
  const IterationTrace tr = RunNpg(GoldenScalar(), c, Matrix::Constant(1, 1, 3.0));
  EXPECT_TRUE(tr.converged);
  EXPECT_NEAR(tr.K_final(0, 0), 1 + std::sqrt(2.0), 1e-8);
  EXPECT_GT(tr.outer.size(), 20u);
}

TEST(Npg, LargeStepDiverges) {
  // 3 - 20 (3 - 2.5) = -7 is destabilizing.
  NpgConfig c;
  c.eta = 10.0;
  c.max_halvings = 0;
  EXPECT_EQ(CodeOf([&] { RunNpg(GoldenScalar(), c, Matrix::Constant(1, 1, 3.0)); }),
            ErrorCode::kDivergenceDetected);
}

TEST(Npg, MixedScalarFixedPoint) {
  NpgConfig c;
  c.gamma = 2.0;
  c.tol = 1e-10;
  const IterationTrace tr = RunNpg(GoldenScalar(), c, Matrix::Constant(1, 1, 3.0));
  EXPECT_TRUE(tr.converged);
  const double p_star = (2.0 + std::sqrt(7.0)) / 1.5;
  EXPECT_NEAR(tr.K_final(0, 0), p_star, 1e-8);
}

TEST(Npg, AgreesWithPolicyIterationOnCorpus) {
  for (const test::CorpusEntry& e : test::Corpus(10)) {
    DesignConfig dc;
    dc.gamma = e.gamma;
    dc.tol = 1e-10;
    const IterationTrace pi = RunDoubleLoop(e.plant, dc);
    NpgConfig c;
    c.gamma = e.gamma;
    c.tol = 1e-10;
    c.max_iterations = 20000;
    const GainPair init = InitialGainSearch(e.plant, e.gamma);
    const IterationTrace npg = RunNpg(e.plant, c, init.K);
    ASSERT_TRUE(npg.converged) << e.seed;
    EXPECT_LE((npg.K_final - pi.K_final).norm(), 1e-5 * (1 + pi.K_final.norm())) << e.seed;
    EXPECT_LT(RelFro(npg.P_final, SolveGareOracle(e.plant, e.gamma)), 1e-6) << e.seed;
  }
}

TEST(Npg, ConfigValidation) {
  NpgConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.eta = 0.0;
  EXPECT_EQ(CodeOf([&] { c.Validate(); }), ErrorCode::kValidation);
  c = NpgConfig{};
  c.tol = 0.0;
  EXPECT_EQ(CodeOf([&] { c.Validate(); }), ErrorCode::kValidation);
  c = NpgConfig{};
  c.gamma = -1.0;
  EXPECT_EQ(CodeOf([&] { c.Validate(); }), ErrorCode::kValidation);
  c = NpgConfig{};
  c.max_iterations = -1;
  EXPECT_EQ(CodeOf([&] { c.Validate(); }), ErrorCode::kValidation);
}

}  // namespace
}  // namespace mixedpo
