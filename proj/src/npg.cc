#include "mixedpo/npg.h"

#include <chrono>
#include <cmath>

#include "mixedpo/errors.h"
#include "mixedpo/riccati.h"

namespace mixedpo {

namespace {

using Clock = std::chrono::steady_clock;

double MsSince(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

void NpgConfig::Validate() const {
  if (std::isnan(eta) || eta == 0.0) {
    throw Error(ErrorCode::kValidation, "eta must be > 0 (negative selects the default)");
  }
  if (max_iterations < 0 || max_halvings < 0) {
    throw Error(ErrorCode::kValidation, "iteration budgets must be >= 0");
  }
  if (!(tol > 0.0)) throw Error(ErrorCode::kValidation, "tol must be > 0");
  if (!(gamma > 0.0)) throw Error(ErrorCode::kValidation, "gamma must be > 0");
}

CostMatrix NpgEvaluate(const StochasticPlant& plant, const Matrix& k, double gamma) {
  if (k.rows() != plant.m() || k.cols() != plant.n()) {
    throw Error(ErrorCode::kDimensionMismatch, "K must be m x n");
  }
  const Matrix a_k = plant.A() - plant.B() * k;
  if (!IsHurwitz(a_k).hurwitz) {
    throw Error(ErrorCode::kNotStabilizing, "A - B K is not Hurwitz");
  }
  if (std::isinf(gamma)) {
    return SolveLyapunov(a_k, plant.Q() + k.transpose() * plant.R() * k);
  }
  const auto p = BoundedRealSolve(plant, k, gamma);
  if (!p) {
    throw Error(ErrorCode::kEvaluationInfeasible,
                "bounded-real evaluation failed at gamma = " + std::to_string(gamma));
  }
  return *p;
}

Matrix NpgStep(const StochasticPlant& plant, const Matrix& k, double gamma, double eta) {
  const CostMatrix p = NpgEvaluate(plant, k, gamma);
  return k - 2.0 * eta * (plant.R() * k - plant.B().transpose() * p);
}

IterationTrace RunNpg(const StochasticPlant& plant, const NpgConfig& config,
                      const Matrix& k0) {
  config.Validate();
  const double eta0 = config.eta > 0.0 ? config.eta : 0.5 / SpectralNorm(plant.R());
  IterationTrace trace;
  trace.method = "npg";
  Matrix k = k0;
  CostMatrix p = NpgEvaluate(plant, k, config.gamma);
  auto diverged = [&](int i, const std::string& why) {
    return Error(ErrorCode::kDivergenceDetected,
                 "NPG diverged at iteration " + std::to_string(i) + ": " + why);
  };
  for (int i = 0; i < config.max_iterations; ++i) {
    const auto t0 = Clock::now();
    const Matrix grad = plant.R() * k - plant.B().transpose() * p;
    double eta = eta0;
    Matrix k_next;
    CostMatrix p_next;
    bool accepted = false;
    for (int h = 0; h <= config.max_halvings; ++h) {
      k_next = k - 2.0 * eta * grad;
      try {
        p_next = NpgEvaluate(plant, k_next, config.gamma);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kNotStabilizing ||
            e.code() == ErrorCode::kEvaluationInfeasible) {
          throw diverged(i, e.what());
        }
        throw;
      }
      if (p_next.trace() <= p.trace() + 1e-9 * (1.0 + std::abs(p.trace()))) {
        accepted = true;
        break;
      }
      eta *= 0.5;
    }
    if (!accepted) throw diverged(i, "no cost-decreasing step after halving");
    OuterRecord rec;
    rec.p = i;
    rec.K = k;
    rec.P = p;
    rec.K_next = k_next;
    rec.gain_step = (k_next - k).norm();
    rec.inner_converged = true;
    InnerRecord in;
    in.q = 0;
    in.L = Matrix::Zero(plant.v(), plant.n());
    in.P = p;
    rec.wall_ms = MsSince(t0);
    in.wall_ms = rec.wall_ms;
    rec.inner.push_back(in);
    trace.total_ms += rec.wall_ms;
    trace.outer.push_back(std::move(rec));
    trace.K_final = k_next;
    trace.P_final = p_next;
    const bool done = trace.outer.back().gain_step <= config.tol;
    k = k_next;
    p = p_next;
    if (done) {
      trace.converged = true;
      break;
    }
  }
  if (trace.outer.empty()) {
    trace.K_final = k;
    trace.P_final = p;
  }
  return trace;
}

}  // namespace mixedpo
