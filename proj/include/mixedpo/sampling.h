#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixedpo/matops.h"
#include "mixedpo/plant.h"
#include "mixedpo/policy_iteration.h"

namespace mixedpo {

// Per-interval data blocks, one row per interval [s_i, s_{i+1}].
//   dxx: vecv(x(s_{i+1})) - vecv(x(s_i))           l x n(n+1)/2
//   dww: vecv(w(s_{i+1})) - vecv(w(s_i))           l x v(v+1)/2
//   ixx: int x (x) x dt                            l x n^2
//   iww: int w (x) w dt                            l x v^2
//   ixw: int (w dt + sigma dbeta) (x) x, Ito       l x nv
//   iux: int u (x) x dt                            l x mn
// w is the applied disturbance-channel signal; sigma dbeta the Brownian part.
struct DataMatrices {
  Matrix dxx, dww, ixx, iww, ixw, iux;
  double interval = 0.0;  // delta s

  Eigen::Index rows() const { return dxx.rows(); }
};

struct SimulationConfig {
  double dt = 1e-4;
  double horizon = 10.0;
  double interval = 0.02;  // delta s
  std::uint64_t seed = 1;
  double r_u = -1.0;       // < 0: 0.1 |K0|_F (0.1 when K0 = 0)
  double r_w = -1.0;
  Vector x0;               // empty: all ones
  double blowup = 1e6;

  void Validate() const;
};

struct TrajectoryLog {
  Eigen::Index n = 0, m = 0, v = 0;
  double dt = 0.0;
  double interval = 0.0;
  std::uint64_t seed = 0;
  double noise_intensity = 0.0;
  std::vector<double> instants;  // s_0 .. s_l
  Matrix states;                 // (l+1) x n
  Matrix explore_u;              // l x m, piecewise-constant exploration
  Matrix explore_w;              // l x v
  Matrix increments;             // l x v, summed Brownian increments per interval
  DataMatrices data;

  Eigen::Index intervals() const { return data.rows(); }
};

// Euler-Maruyama on dx = (A x + B u + D w) dt + sigma D dbeta with
// u = -K0 x + eta_u, w = L0 x + eta_w. Exploration is redrawn at each
// sample instant with Frobenius norm exactly r. Throws kBlowup when |x|
// exceeds the bound, kBadParams on inconsistent timing.
TrajectoryLog Simulate(const StochasticPlant& plant, const GainPair& gains0,
                       const SimulationConfig& config);

void SaveTrajectoryCsv(const TrajectoryLog& log, const std::string& path);
TrajectoryLog LoadTrajectoryCsv(const std::string& path);

// What the identification step is allowed to know.
struct KnownWeights {
  Matrix D;
  Matrix Q;
  Matrix R;
};

KnownWeights KnownWeightsOf(const StochasticPlant& plant);

// Unknowns: [svec(P); vec(K'^T R); vec(L'^T); tau], tau = Tr(D^T P D W).
struct LSSystem {
  Matrix theta;
  Vector upsilon;
  Eigen::Index n = 0, m = 0, v = 0;
};

LSSystem Assemble(const DataMatrices& data, const Matrix& k, const Matrix& l,
                  const KnownWeights& known, double gamma);

struct RankReport {
  bool full_rank = false;
  double min_singular = 0.0;
  double max_singular = 0.0;
  double condition = 0.0;          // after column equilibration
  double raw_condition = 0.0;      // as assembled
  Eigen::Index rows = 0;
  Eigen::Index columns = 0;        // width of theta
  Eigen::Index required_blocks = 0;  // n(n+1)/2 + mn + nv + v^2
  Eigen::Index required_printed = 0; // n(n+1) + mn + nv + v^2
  bool enough_rows = false;        // rows >= columns
};

RankReport RankCheck(const LSSystem& sys);

struct LsEstimate {
  CostMatrix P;
  Matrix K_next;  // R^-1 (K'^T R)^T
  Matrix L_next;
  double trace_coefficient = 0.0;  // tau
  double condition = 0.0;
  bool ill_conditioned = false;    // condition above 1e10
  double residual = 0.0;           // |theta z - upsilon|
};

// Column-equilibrated rank-revealing QR. Throws kRankDeficient.
LsEstimate LsUpdate(const LSSystem& sys, const KnownWeights& known);

struct ModelFreeOptions {
  double divergence_bound = 1e6;  // on |K_p|_F
};

// Sampling-based double loop on a single reused log. Starts from `init`
// (the gains that generated the log unless told otherwise). Never touches
// A, B, C, E. Throws kRankDeficient before any update when the log is too
// poor, kDivergenceDetected when the gains blow up.
IterationTrace RunModelFree(const KnownWeights& known, const TrajectoryLog& log,
                            const DesignConfig& config, const GainPair& init,
                            const ModelFreeOptions& options = {});

}  // namespace mixedpo
