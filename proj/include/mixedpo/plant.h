#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixedpo/matops.h"

namespace mixedpo {

// dx = (A x + B u) dt + D dw,  z = C x + E u.
// Derived weights: Q = C^T C, R = E^T E. The Wiener increment dw has
// covariance W dt with W = noise_intensity^2 I_v.
class StochasticPlant {
 public:
  StochasticPlant() = default;

  // Checks shapes (n x n, n x m, p x n, n x v, p x m) and finiteness; throws
  // kDimensionMismatch / kNonFinite / kBadParams.
  StochasticPlant(Matrix a, Matrix b, Matrix c, Matrix d, Matrix e,
                  double noise_intensity = 0.0);

  const Matrix& A() const { return a_; }
  const Matrix& B() const { return b_; }
  const Matrix& C() const { return c_; }
  const Matrix& D() const { return d_; }
  const Matrix& E() const { return e_; }
  double noise_intensity() const { return noise_intensity_; }

  Eigen::Index n() const { return a_.rows(); }
  Eigen::Index m() const { return b_.cols(); }
  Eigen::Index v() const { return d_.cols(); }
  Eigen::Index p() const { return c_.rows(); }

  Matrix Q() const { return Symmetrize(c_.transpose() * c_); }
  Matrix R() const { return Symmetrize(e_.transpose() * e_); }
  Matrix W() const;

  StochasticPlant WithNoise(double noise_intensity) const;

 private:
  Matrix a_, b_, c_, d_, e_;
  double noise_intensity_ = 0.0;
};

struct DesignConfig {
  double gamma = 5.0;
  int outer_max = 20;  // p-bar
  int inner_max = 50;  // q-bar
  double tol = 1e-8;   // epsilon
  double hurwitz_margin = 0.0;

  // Throws kValidation on non-positive gamma/tol or negative counts/margin.
  void Validate() const;
};

struct GainPair {
  Matrix K;  // m x n, minimizing player, u = -K x
  Matrix L;  // v x n, maximizing player, w = L x
};

void CheckGainShapes(const StochasticPlant& plant, const GainPair& gains);

struct ValidationReport {
  bool q_positive_definite = false;
  bool q_psd = false;
  bool r_positive_definite = false;
  bool cross_term_zero = false;  // E^T C = 0
  bool stabilizable = false;     // (A, B), PBH at unstable eigenvalues
  bool detectable = false;       // (sqrt(Q), A), PBH on the dual pair
  std::vector<std::string> failures;

  bool ok() const {
    return q_psd && r_positive_definite && cross_term_zero && stabilizable &&
           detectable;
  }
};

ValidationReport ValidateAssumptions(const StochasticPlant& plant);

struct ClosedLoopMatrices {
  Matrix A_K;       // A - B K
  Matrix A_KL;      // A_K + D L
  Matrix Q_K;       // Q + K^T R K
  Matrix A_Kgamma;  // A_K + gamma^-2 D D^T P
};

ClosedLoopMatrices ComputeClosedLoop(const StochasticPlant& plant,
                                     const GainPair& gains, const Matrix& p,
                                     double gamma);

// Point-mass n-link inverted pendulum, absolute link angles measured from the
// upright vertical, linearized at the upright equilibrium.
struct PendulumParams {
  std::vector<double> masses;
  std::vector<double> lengths;
  double gravity = 9.81;
};

PendulumParams DefaultTripleParams();
PendulumParams DefaultDoubleParams();

// n = 6, m = 2 (hip and knee torques, ankle passive), v = 3.
// D = [0; I3], C = [I6; 0_{2x6}], E = [0_{6x2}; I2].
StochasticPlant TriplePendulum(const PendulumParams& params = DefaultTripleParams());

// n = 4, m = 1 (base torque), v = 2.
// D = [0; I2], C = [I4; 0_{1x4}], E = [0_{4x1}; 1].
StochasticPlant DoublePendulum(const PendulumParams& params = DefaultDoubleParams());

// a = b = d = 1, C = [1; 0], E = [0; 1].
StochasticPlant GoldenScalar();

// Deterministic per seed; rejection-samples until ValidateAssumptions passes.
StochasticPlant RandomPlant(std::uint64_t seed, int n, int m, int v);

// Names accepted by BuiltinPlant: golden-scalar, double-pendulum,
// triple-pendulum.
StochasticPlant BuiltinPlant(const std::string& name);
std::vector<std::string> BuiltinPlantNames();

// {"A": [[..]], "B": .., "C": .., "D": .., "E": .., "noise_intensity": x}.
// Ragged or non-numeric arrays are rejected with kValidation.
StochasticPlant PlantFromJson(const nlohmann::json& doc);
nlohmann::json PlantToJson(const StochasticPlant& plant);
StochasticPlant LoadPlantFile(const std::string& path);

// Builtin name or path to a JSON plant file.
StochasticPlant ResolvePlant(const std::string& source);

Matrix MatrixFromJson(const nlohmann::json& rows, const char* what);
nlohmann::json MatrixToJson(const Matrix& m);

}  // namespace mixedpo
