#include "mixedpo/plant.h"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "mixedpo/errors.h"

namespace mixedpo {

namespace {

std::string Shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

// Numerical rank of a complex matrix via singular values.
Eigen::Index ComplexRank(const Eigen::MatrixXcd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double tol = 1e-9 * std::max<double>(1.0, s(0));
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) rank += s(i) > tol ? 1 : 0;
  return rank;
}

// PBH: rank [A - lambda I, B] == n at each eigenvalue with Re >= 0.
bool PbhStabilizable(const Matrix& a, const Matrix& b) {
  const Eigen::Index n = a.rows();
  const Spectrum spec = ComputeSpectrum(a);
  for (const auto& lambda : spec.eigenvalues) {
    if (lambda.real() < -kHurwitzGuard) continue;
    Eigen::MatrixXcd pencil(n, n + b.cols());
    pencil.leftCols(n) = a.cast<std::complex<double>>() -
                         lambda * Eigen::MatrixXcd::Identity(n, n);
    pencil.rightCols(b.cols()) = b.cast<std::complex<double>>();
    if (ComplexRank(pencil) < n) return false;
  }
  return true;
}

Matrix PendulumMass(const PendulumParams& p) {
  const std::size_t links = p.masses.size();
  Matrix mass(links, links);
  for (std::size_t j = 0; j < links; ++j) {
    for (std::size_t k = 0; k < links; ++k) {
      double tail = 0.0;
      for (std::size_t i = std::max(j, k); i < links; ++i) tail += p.masses[i];
      mass(j, k) = p.lengths[j] * p.lengths[k] * tail;
    }
  }
  return mass;
}

Matrix PendulumGravity(const PendulumParams& p) {
  const std::size_t links = p.masses.size();
  Matrix g = Matrix::Zero(links, links);
  for (std::size_t k = 0; k < links; ++k) {
    double tail = 0.0;
    for (std::size_t i = k; i < links; ++i) tail += p.masses[i];
    g(k, k) = p.gravity * p.lengths[k] * tail;
  }
  return g;
}

void CheckPendulumParams(const PendulumParams& p, std::size_t links) {
  if (p.masses.size() != links || p.lengths.size() != links) {
    throw Error(ErrorCode::kBadParams,
                "pendulum needs " + std::to_string(links) +
                    " masses and lengths");
  }
  for (std::size_t i = 0; i < links; ++i) {
    if (!(p.masses[i] > 0.0) || !(p.lengths[i] > 0.0)) {
      throw Error(ErrorCode::kBadParams, "masses and lengths must be positive");
    }
  }
  if (!(p.gravity > 0.0)) {
    throw Error(ErrorCode::kBadParams, "gravity must be positive");
  }
}

// Linearization M thetadd = G theta + S tau as a first-order system.
// `actuated` lists the joints carrying torque; joint j joins link j-1 to link
// j, so its torque enters link j with +1 and link j-1 with -1.
std::pair<Matrix, Matrix> PendulumAB(const PendulumParams& p,
                                     const std::vector<int>& actuated) {
  const auto links = static_cast<Eigen::Index>(p.masses.size());
  const Matrix minv = PendulumMass(p).inverse();
  Matrix s = Matrix::Zero(links, static_cast<Eigen::Index>(actuated.size()));
  for (std::size_t c = 0; c < actuated.size(); ++c) {
    const int j = actuated[c];
    s(j, static_cast<Eigen::Index>(c)) = 1.0;
    if (j > 0) s(j - 1, static_cast<Eigen::Index>(c)) = -1.0;
  }
  Matrix a = Matrix::Zero(2 * links, 2 * links);
  a.topRightCorner(links, links).setIdentity();
  a.bottomLeftCorner(links, links) = minv * PendulumGravity(p);
  Matrix b = Matrix::Zero(2 * links, s.cols());
  b.bottomRows(links) = minv * s;
  return {a, b};
}

StochasticPlant PendulumPlant(const PendulumParams& p,
                              const std::vector<int>& actuated) {
  auto [a, b] = PendulumAB(p, actuated);
  const Eigen::Index n = a.rows();
  const Eigen::Index links = n / 2;
  const Eigen::Index m = b.cols();
  Matrix d = Matrix::Zero(n, links);
  d.bottomRows(links).setIdentity();
  Matrix c = Matrix::Zero(n + m, n);
  c.topRows(n).setIdentity();
  Matrix e = Matrix::Zero(n + m, m);
  e.bottomRows(m).setIdentity();
  return StochasticPlant(std::move(a), std::move(b), std::move(c), std::move(d),
                         std::move(e));
}

}  // namespace

StochasticPlant::StochasticPlant(Matrix a, Matrix b, Matrix c, Matrix d,
                                 Matrix e, double noise_intensity)
    : a_(std::move(a)),
      b_(std::move(b)),
      c_(std::move(c)),
      d_(std::move(d)),
      e_(std::move(e)),
      noise_intensity_(noise_intensity) {
  const Eigen::Index n = a_.rows();
  if (n < 1 || a_.cols() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "A must be square, got " + Shape(a_));
  }
  if (b_.rows() != n || b_.cols() < 1) {
    throw Error(ErrorCode::kDimensionMismatch, "B must be n x m, got " + Shape(b_));
  }
  if (c_.cols() != n || c_.rows() < 1) {
    throw Error(ErrorCode::kDimensionMismatch, "C must be p x n, got " + Shape(c_));
  }
  if (d_.rows() != n || d_.cols() < 1) {
    throw Error(ErrorCode::kDimensionMismatch, "D must be n x v, got " + Shape(d_));
  }
  if (e_.rows() != c_.rows() || e_.cols() != b_.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "E must be p x m, got " + Shape(e_));
  }
  RequireFinite(a_, "A");
  RequireFinite(b_, "B");
  RequireFinite(c_, "C");
  RequireFinite(d_, "D");
  RequireFinite(e_, "E");
  if (!(noise_intensity_ >= 0.0) || !std::isfinite(noise_intensity_)) {
    throw Error(ErrorCode::kBadParams, "noise_intensity must be finite and >= 0");
  }
}

Matrix StochasticPlant::W() const {
  return noise_intensity_ * noise_intensity_ * Matrix::Identity(v(), v());
}

StochasticPlant StochasticPlant::WithNoise(double noise_intensity) const {
  return StochasticPlant(a_, b_, c_, d_, e_, noise_intensity);
}

void DesignConfig::Validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw Error(ErrorCode::kValidation, "gamma must be a positive number");
  }
  if (!(tol > 0.0)) throw Error(ErrorCode::kValidation, "tol must be > 0");
  if (outer_max < 0 || inner_max < 1) {
    throw Error(ErrorCode::kValidation, "iteration budgets must be positive");
  }
  if (!(hurwitz_margin >= 0.0)) {
    throw Error(ErrorCode::kValidation, "hurwitz_margin must be >= 0");
  }
}

void CheckGainShapes(const StochasticPlant& plant, const GainPair& gains) {
  if (gains.K.rows() != plant.m() || gains.K.cols() != plant.n()) {
    throw Error(ErrorCode::kDimensionMismatch, "K must be m x n, got " + Shape(gains.K));
  }
  if (gains.L.rows() != plant.v() || gains.L.cols() != plant.n()) {
    throw Error(ErrorCode::kDimensionMismatch, "L must be v x n, got " + Shape(gains.L));
  }
}

ValidationReport ValidateAssumptions(const StochasticPlant& plant) {
  ValidationReport r;
  const Matrix q = plant.Q();
  const double qmin = MinSymEigenvalue(q);
  const double qscale = std::max(1.0, q.norm());
  r.q_psd = qmin >= -1e-10 * qscale;
  r.q_positive_definite = qmin > 1e-10 * qscale;
  if (!r.q_positive_definite) r.failures.push_back("Q = C^T C is not positive definite");
  if (!r.q_psd) r.failures.push_back("Q = C^T C is not positive semidefinite");

  const Matrix rr = plant.R();
  r.r_positive_definite = MinSymEigenvalue(rr) > 1e-10 * std::max(1.0, rr.norm());
  if (!r.r_positive_definite) r.failures.push_back("R = E^T E is not positive definite");

  r.cross_term_zero = (plant.E().transpose() * plant.C()).cwiseAbs().maxCoeff() <= 1e-10;
  if (!r.cross_term_zero) r.failures.push_back("E^T C != 0");

  r.stabilizable = PbhStabilizable(plant.A(), plant.B());
  if (!r.stabilizable) r.failures.push_back("(A, B) is not stabilizable");

  // Detectability of (C, A) is stabilizability of (A^T, C^T); null(C) =
  // null(Q) so C stands in for sqrt(Q).
  r.detectable = PbhStabilizable(plant.A().transpose(), plant.C().transpose());
  if (!r.detectable) r.failures.push_back("(sqrt(Q), A) is not detectable");
  return r;
}

ClosedLoopMatrices ComputeClosedLoop(const StochasticPlant& plant,
                                     const GainPair& gains, const Matrix& p,
                                     double gamma) {
  CheckGainShapes(plant, gains);
  if (p.rows() != plant.n() || p.cols() != plant.n()) {
    throw Error(ErrorCode::kDimensionMismatch, "P must be n x n, got " + Shape(p));
  }
  ClosedLoopMatrices cl;
  cl.A_K = plant.A() - plant.B() * gains.K;
  cl.A_KL = cl.A_K + plant.D() * gains.L;
  cl.Q_K = Symmetrize(plant.Q() + gains.K.transpose() * plant.R() * gains.K);
  cl.A_Kgamma = cl.A_K + plant.D() * plant.D().transpose() * p / (gamma * gamma);
  return cl;
}

// Ankle link heaviest, short segments: keeps the gamma = 5 benchmark feasible
// (attenuation limit about 3.54) with two actuated joints.
PendulumParams DefaultTripleParams() { return {{2.0, 1.0, 0.5}, {0.3, 0.3, 0.3}, 9.81}; }

PendulumParams DefaultDoubleParams() { return {{1.0, 1.0}, {0.5, 0.5}, 9.81}; }

StochasticPlant TriplePendulum(const PendulumParams& params) {
  CheckPendulumParams(params, 3);
  return PendulumPlant(params, {1, 2});
}

StochasticPlant DoublePendulum(const PendulumParams& params) {
  CheckPendulumParams(params, 2);
  return PendulumPlant(params, {0});
}

StochasticPlant GoldenScalar() {
  Matrix c(2, 1), e(2, 1);
  c << 1.0, 0.0;
  e << 0.0, 1.0;
  return StochasticPlant(Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 1.0),
                         c, Matrix::Constant(1, 1, 1.0), e);
}

StochasticPlant RandomPlant(std::uint64_t seed, int n, int m, int v) {
  if (n < 1 || m < 1 || v < 1) {
    throw Error(ErrorCode::kBadParams, "random plant needs n, m, v >= 1");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> weight(0.5, 1.5);
  auto randn = [&](int rows, int cols, double scale) {
    Matrix out(rows, cols);
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) out(i, j) = scale * normal(rng);
    return out;
  };
  constexpr int kRetries = 100;
  for (int attempt = 0; attempt < kRetries; ++attempt) {
    Matrix a = randn(n, n, 1.0 / std::sqrt(static_cast<double>(n)));
    Matrix b = randn(n, m, 1.0);
    Matrix d = randn(n, v, 0.5);
    Matrix c = Matrix::Zero(n + m, n);
    Matrix e = Matrix::Zero(n + m, m);
    for (int i = 0; i < n; ++i) c(i, i) = weight(rng);
    for (int i = 0; i < m; ++i) e(n + i, i) = weight(rng);
    StochasticPlant plant(std::move(a), std::move(b), std::move(c), std::move(d),
                          std::move(e));
    if (ValidateAssumptions(plant).ok()) return plant;
  }
  throw Error(ErrorCode::kGenerationFailure,
              "no valid plant after " + std::to_string(kRetries) + " draws");
}

std::vector<std::string> BuiltinPlantNames() {
  return {"golden-scalar", "double-pendulum", "triple-pendulum"};
}

StochasticPlant BuiltinPlant(const std::string& name) {
  if (name == "golden-scalar") return GoldenScalar();
  if (name == "double-pendulum") return DoublePendulum();
  if (name == "triple-pendulum") return TriplePendulum();
  throw Error(ErrorCode::kValidation, "unknown builtin plant '" + name + "'");
}

Matrix MatrixFromJson(const nlohmann::json& rows, const char* what) {
  if (!rows.is_array() || rows.empty()) {
    throw Error(ErrorCode::kValidation, std::string(what) + " must be a non-empty array of rows");
  }
  const std::size_t cols = rows.front().is_array() ? rows.front().size() : 0;
  if (cols == 0) {
    throw Error(ErrorCode::kValidation, std::string(what) + " rows must be non-empty arrays");
  }
  Matrix out(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (!row.is_array() || row.size() != cols) {
      throw Error(ErrorCode::kValidation, std::string(what) + " is ragged at row " + std::to_string(i));
    }
    for (std::size_t j = 0; j < cols; ++j) {
      if (!row[j].is_number()) {
        throw Error(ErrorCode::kValidation, std::string(what) + " has a non-numeric entry");
      }
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j].get<double>();
    }
  }
  return out;
}

nlohmann::json MatrixToJson(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

StochasticPlant PlantFromJson(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::kValidation, "plant document must be an object");
  for (const char* key : {"A", "B", "C", "D", "E"}) {
    if (!doc.contains(key)) {
      throw Error(ErrorCode::kValidation, std::string("plant is missing key ") + key);
    }
  }
  double noise = 0.0;
  if (doc.contains("noise_intensity")) {
    if (!doc["noise_intensity"].is_number()) {
      throw Error(ErrorCode::kValidation, "noise_intensity must be a number");
    }
    noise = doc["noise_intensity"].get<double>();
  }
  try {
    return StochasticPlant(MatrixFromJson(doc["A"], "A"), MatrixFromJson(doc["B"], "B"),
                           MatrixFromJson(doc["C"], "C"), MatrixFromJson(doc["D"], "D"),
                           MatrixFromJson(doc["E"], "E"), noise);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kValidation) throw;
    throw Error(ErrorCode::kValidation, e.what());
  }
}

nlohmann::json PlantToJson(const StochasticPlant& plant) {
  return {{"A", MatrixToJson(plant.A())}, {"B", MatrixToJson(plant.B())},
          {"C", MatrixToJson(plant.C())}, {"D", MatrixToJson(plant.D())},
          {"E", MatrixToJson(plant.E())}, {"noise_intensity", plant.noise_intensity()}};
}

StochasticPlant LoadPlantFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open plant file " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kValidation, "plant file " + path + ": " + e.what());
  }
  return PlantFromJson(doc);
}

StochasticPlant ResolvePlant(const std::string& source) {
  for (const auto& name : BuiltinPlantNames()) {
    if (name == source) return BuiltinPlant(name);
  }
  return LoadPlantFile(source);
}

}  // namespace mixedpo
