#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mixedpo/matops.h"
#include "mixedpo/plant.h"

namespace mixedpo {

inline constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

// One policy evaluation step (p, q): L_q and the cost P^{p,q} it produces.
struct InnerRecord {
  int q = 0;
  Matrix L;
  CostMatrix P;
  double step = kUnset;      // |P^{p,q} - P^{p,q-1}|_F
  double residual = kUnset;  // bounded-real residual of P^{p,q} at K_p
  bool hurwitz_ok = true;    // A_KL Hurwitz (unknown in model-free runs)
  double wall_ms = 0.0;
};

// Outer round p: gain K_p, its converged evaluation P_K^p, and the update.
struct OuterRecord {
  int p = 0;
  Matrix K;
  CostMatrix P;
  Matrix K_next;
  double gain_step = kUnset;  // |K_{p+1} - K_p|_F
  std::vector<InnerRecord> inner;
  bool inner_converged = false;
  double wall_ms = 0.0;
  // Filled by AttachDiagnostics; not part of the timed work.
  double residual = kUnset;  // game ARE residual of P_K^p
  double hinf = kUnset;      // |T_zw(K_p)|_inf
  bool hurwitz_ok = true;    // A - B K_p
  bool in_set = true;
};

struct IterationTrace {
  std::string method;
  std::vector<OuterRecord> outer;
  Matrix K_final;
  CostMatrix P_final;
  bool converged = false;
  double total_ms = 0.0;
  // Set when DoubleLoopOptions::stop_on_infeasible ended the run.
  bool feasibility_lost = false;
  int feasibility_lost_at = -1;
};

struct InnerResult {
  CostMatrix P;
  Matrix L;  // gamma^-2 D^T P from the last evaluation
  std::vector<InnerRecord> records;
  bool converged = false;
  int diverged_at = -1;  // q at which A_KL lost Hurwitz (tolerant mode)
};

// Perturbation added to L_{q+1} before it is used (inexact inner loop);
// called with q + 1. Empty means exact.
using InnerPerturbation = std::function<Matrix(int)>;
// Perturbation added to K_{p+1}; called with p + 1.
using OuterPerturbation = std::function<Matrix(int)>;

// L_0 = 0, L_{q+1} = gamma^-2 D^T P^{p,q}, with P^{p,q} solving
//   A_KL^T P + P A_KL + Q_K - gamma^2 L_q^T L_q = 0.
// Stops once |P^{p,q} - P^{p,q-1}|_F <= tol or after inner_max + 1
// evaluations; a step taken with a nonzero perturbation never counts as
// converged. Throws kInnerDivergence when A_KL loses the Hurwitz property,
// unless `tolerate_divergence`, in which case the loop stops and records q.
InnerResult InnerLoop(const StochasticPlant& plant, const Matrix& k, double gamma,
                      int inner_max, double tol,
                      const InnerPerturbation& perturb = {},
                      bool tolerate_divergence = false);

// K_{p+1} = R^-1 B^T P.
Matrix OuterStep(const StochasticPlant& plant, const CostMatrix& p);

struct DoubleLoopOptions {
  // Rounds whose K_{p+1} received a nonzero perturbation skip the gain-step
  // stop, so perturbed runs use the whole outer budget.
  OuterPerturbation outer_perturbation;
  // Stop on the first K_p outside the constraint set instead of throwing
  // (used by the inexact runner); the trace then ends at that round.
  bool stop_on_infeasible = false;
};

// Nested double loop. Initial gains from InitialGainSearch unless given.
// Throws kInfeasibleStart when K_0 is not in the constraint set.
IterationTrace RunDoubleLoop(const StochasticPlant& plant, const DesignConfig& config,
                             const std::optional<GainPair>& init = std::nullopt,
                             const DoubleLoopOptions& options = {});

// Evaluates residuals, H-infinity norms and Hurwitz flags against the true
// model for reporting. Model-free traces get the same treatment here.
void AttachDiagnostics(IterationTrace& trace, const StochasticPlant& plant,
                       double gamma);

struct ConvergenceCertificate {
  // Tr(P^{p+1} - P*) / Tr(P^p - P*); NaN when the denominator has vanished.
  std::vector<double> outer_ratios;
  // Tr(P_K^p - P^{p,q+1}) / Tr(P_K^p - P^{p,q}) per round, P_K^p from the
  // bounded-real solve.
  std::vector<std::vector<double>> inner_ratios;
  double c_h = kUnset;          // h = Tr(P_K^0 - P*)
  std::vector<double> d_K;      // per outer round
  std::vector<std::string> flags;

  bool ok() const { return flags.empty(); }
};

ConvergenceCertificate Certify(const IterationTrace& trace,
                               const StochasticPlant& plant, double gamma,
                               const CostMatrix& p_star);

}  // namespace mixedpo
