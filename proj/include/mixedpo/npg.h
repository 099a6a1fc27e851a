#pragma once

#include <limits>

#include "mixedpo/matops.h"
#include "mixedpo/plant.h"
#include "mixedpo/policy_iteration.h"

namespace mixedpo {

struct NpgConfig {
  double eta = -1.0;  // < 0: 1 / (2 |R|)
  int max_iterations = 10000;
  double tol = 1e-8;  // on |K_{i+1} - K_i|_F
  // Attenuation level for policy evaluation; +inf evaluates the plain H2
  // cost by a Lyapunov solve.
  double gamma = std::numeric_limits<double>::infinity();
  int max_halvings = 40;

  void Validate() const;
};

// P_K: bounded-real solution at gamma, or the Lyapunov solution when gamma
// is infinite. Throws kNotStabilizing / kEvaluationInfeasible.
CostMatrix NpgEvaluate(const StochasticPlant& plant, const Matrix& k, double gamma);

// K - 2 eta (R K - B^T P_K).
Matrix NpgStep(const StochasticPlant& plant, const Matrix& k, double gamma, double eta);

// Iterates NpgStep. The step is halved while Tr(P) would increase; an
// iterate that leaves the stabilizing (or feasible) region is reported as
// kDivergenceDetected. Trace rows use q = 0 only.
IterationTrace RunNpg(const StochasticPlant& plant, const NpgConfig& config,
                      const Matrix& k0);

}  // namespace mixedpo
