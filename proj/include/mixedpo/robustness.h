#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixedpo/matops.h"
#include "mixedpo/plant.h"
#include "mixedpo/policy_iteration.h"

namespace mixedpo {

enum class PerturbTarget { kOuter, kInner };

struct PerturbationSpec {
  PerturbTarget target = PerturbTarget::kOuter;
  double magnitude = 0.0;  // Frobenius norm of every injected matrix
  std::uint64_t seed = 1;
};

// Gaussian direction rescaled to Frobenius norm `magnitude`; deterministic
// in (seed, iteration).
Matrix PerturbGain(Eigen::Index rows, Eigen::Index cols, double magnitude,
                   std::uint64_t seed, int iteration = 0);

struct InexactRun {
  IterationTrace trace;
  std::vector<double> errors;  // |P^p - P*|_F (outer) or |P^{p,q} - P_K|_F (inner)
  double plateau = 0.0;        // error at the final iteration
  bool feasibility_lost = false;  // outer: K_p left the set; inner: A_KL lost Hurwitz
  int lost_at = -1;
  double cost_error_rel = 0.0;  // final |P - P_ref|_F / |P_ref|_F
  double gain_error_rel = 0.0;  // final |K - K_ref|_F / |K_ref|_F (outer only)
};

// Double loop with K_{p+1} = R^-1 B^T P + K~_{p+1}. The reference is the
// game solution P*.
InexactRun RunInexactOuter(const StochasticPlant& plant, const DesignConfig& config,
                           const PerturbationSpec& spec, const GainPair& init,
                           const CostMatrix& p_star);

// Inner loop at fixed K with L_{q+1} = gamma^-2 D^T P + L~_{q+1}, run as a
// single outer round. The reference is the bounded-real solution P_K.
InexactRun RunInexactInner(const StochasticPlant& plant, const DesignConfig& config,
                           const PerturbationSpec& spec, const Matrix& k,
                           const CostMatrix& p_k);

struct EnvelopeFit {
  double ratio = kUnset;  // geometric rate of the fitted envelope
  double r2 = kUnset;
  int points = 0;
  // Factor the fitted line must be raised by to bound every transient point.
  double lift = kUnset;
};

// Least-squares line through log(e_t) over the leading transient: points
// above twice the plateau (and above 1e-10 e_0).
EnvelopeFit FitEnvelope(const std::vector<double>& errors, double plateau);

// Slope of log(y) against log(x) over positive pairs.
double LogLogSlope(const std::vector<double>& x, const std::vector<double>& y);

struct ISSReport {
  PerturbTarget target = PerturbTarget::kOuter;
  std::vector<double> magnitudes;
  std::vector<double> plateau_mean;
  std::vector<double> plateau_std;
  std::vector<std::vector<double>> plateau_per_seed;
  std::vector<int> feasibility_lost;  // count of seeds per magnitude
  std::vector<double> cost_error_pct;  // seed means
  std::vector<double> gain_error_pct;
  std::vector<EnvelopeFit> envelopes;  // on the seed-mean error trace
  bool monotone = false;
  double slope = kUnset;
  int seeds = 0;
};

nlohmann::json ISSReportToJson(const ISSReport& report);

struct IssSweepConfig {
  PerturbTarget target = PerturbTarget::kOuter;
  std::vector<double> magnitudes{0.015, 0.05, 0.15};
  int seeds = 20;
  std::uint64_t base_seed = 1;
  int threads = 0;  // 0: hardware concurrency
  std::optional<GainPair> init;  // outer: start gains; inner: the fixed K
};

struct IssSweepResult {
  ISSReport report;
  // runs[magnitude index][seed index]
  std::vector<std::vector<InexactRun>> runs;
};

IssSweepResult RunIssSweep(const StochasticPlant& plant, const DesignConfig& config,
                           const IssSweepConfig& sweep);

}  // namespace mixedpo
