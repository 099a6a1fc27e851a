#include "mixedpo/riccati.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mixedpo/errors.h"

namespace mixedpo {

namespace {

Matrix GameWeight(const StochasticPlant& plant, double gamma) {
  const Matrix rinv = plant.R().inverse();
  return Symmetrize(plant.B() * rinv * plant.B().transpose() -
                    plant.D() * plant.D().transpose() / (gamma * gamma));
}

Matrix RiccatiResidual(const Matrix& a, const Matrix& s, const Matrix& q,
                       const Matrix& p) {
  return a.transpose() * p + p * a - p * s * p + q;
}

Matrix Hamiltonian(const Matrix& a, const Matrix& s, const Matrix& q) {
  const Eigen::Index n = a.rows();
  Matrix h(2 * n, 2 * n);
  h << a, -s, -q, -a.transpose();
  return h;
}

// Natural magnitude of the terms in A^T P + P A - P S P + Q; residuals are
// judged against it because their round-off floor grows with |P|.
double RiccatiScale(const Matrix& a, const Matrix& s, const Matrix& q, const Matrix& p) {
  const double pn = p.norm();
  return 1.0 + q.norm() + 2.0 * a.norm() * pn + s.norm() * pn * pn;
}

struct NewtonResult {
  Matrix p;
  double residual = std::numeric_limits<double>::infinity();
  bool converged = false;
};

// Damped Newton on A^T P + P A - P S P + Q = 0. Each step solves the
// Lyapunov equation with F = A - S P; the step is halved while the residual
// grows. `rel_target` is relative to RiccatiScale.
NewtonResult DampedNewton(const Matrix& a, const Matrix& s, const Matrix& q,
                          Matrix p, int max_iterations, double rel_target) {
  NewtonResult out;
  double res = RiccatiResidual(a, s, q, p).norm();
  for (int it = 0; it < max_iterations; ++it) {
    if (res <= rel_target * RiccatiScale(a, s, q, p)) {
      out.converged = true;
      break;
    }
    const Matrix f = a - s * p;
    Matrix delta;
    try {
      delta = Symmetrize(SolveLyapunovGeneral(f, RiccatiResidual(a, s, q, p)));
    } catch (const Error&) {
      break;
    }
    if (!delta.allFinite()) break;
    double step = 1.0;
    Matrix trial = p + delta;
    double trial_res = RiccatiResidual(a, s, q, trial).norm();
    while (!(trial_res < res) && step > 1e-6) {
      step *= 0.5;
      trial = p + step * delta;
      trial_res = RiccatiResidual(a, s, q, trial).norm();
    }
    if (!(trial_res < res)) break;
    p = Symmetrize(trial);
    res = trial_res;
  }
  out.converged = out.converged || res <= rel_target * RiccatiScale(a, s, q, p);
  out.p = p;
  out.residual = res;
  return out;
}

bool IsStabilizingPsd(const Matrix& a, const Matrix& s, const Matrix& p) {
  if (!p.allFinite()) return false;
  const double scale = std::max(1.0, p.norm());
  if (MinSymEigenvalue(p) < -1e-9 * scale) return false;
  return IsHurwitz(a - s * p).hurwitz;
}

// Newton iteration for the matrix sign function with determinant scaling.
std::optional<Matrix> MatrixSign(const Matrix& h) {
  const Eigen::Index dim = h.rows();
  Matrix z = h;
  bool scaling = true;
  double previous = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 100; ++it) {
    Eigen::PartialPivLU<Matrix> lu(z);
    const Matrix& lu_mat = lu.matrixLU();
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double d = std::abs(lu_mat(i, i));
      if (d == 0.0 || !std::isfinite(d)) return std::nullopt;
      log_det += std::log(d);
    }
    const double c = scaling ? std::exp(-log_det / static_cast<double>(dim)) : 1.0;
    const Matrix zinv = lu.inverse();
    if (!zinv.allFinite()) return std::nullopt;
    const Matrix next = 0.5 * (c * z + zinv / c);
    const double change = (next - z).lpNorm<1>();
    const double size = next.lpNorm<1>();
    z = next;
    if (change <= 1e-2 * size) scaling = false;
    if (change <= 1e-13 * size) return z;
    // Badly scaled Hamiltonians stall at the round-off floor; the caller
    // polishes with Newton, so a stalled iterate near convergence will do.
    if (!scaling && change <= 1e-6 * size && change >= previous) return z;
    if (!scaling) previous = change;
  }
  return std::nullopt;
}

}  // namespace

Matrix GareResidual(const Matrix& p, const StochasticPlant& plant, double gamma) {
  if (p.rows() != plant.n() || p.cols() != plant.n()) {
    throw Error(ErrorCode::kDimensionMismatch, "GARE residual: P must be n x n");
  }
  return RiccatiResidual(plant.A(), GameWeight(plant, gamma), plant.Q(), p);
}

bool HamiltonianHasImaginaryEigenvalues(const Matrix& h, double rel_tol) {
  const Spectrum spec = ComputeSpectrum(h);
  const double scale = std::max(1.0, h.norm());
  for (const auto& l : spec.eigenvalues) {
    if (std::abs(l.real()) <= rel_tol * scale) return true;
  }
  return false;
}

std::optional<Matrix> SolveRiccatiBySign(const Matrix& a, const Matrix& s,
                                         const Matrix& q) {
  const Eigen::Index n = a.rows();
  const Matrix h = Hamiltonian(a, s, q);
  if (HamiltonianHasImaginaryEigenvalues(h)) return std::nullopt;
  const auto z = MatrixSign(h);
  if (!z) return std::nullopt;
  // Stable subspace: (Z + I) [I; P] = 0.
  Matrix lhs(2 * n, n), rhs(2 * n, n);
  lhs << z->topRightCorner(n, n), z->bottomRightCorner(n, n) + Matrix::Identity(n, n);
  rhs << -(z->topLeftCorner(n, n) + Matrix::Identity(n, n)), -z->bottomLeftCorner(n, n);
  Eigen::ColPivHouseholderQR<Matrix> qr(lhs);
  if (qr.rank() < n) return std::nullopt;
  Matrix p = Symmetrize(qr.solve(rhs));
  if (!p.allFinite()) return std::nullopt;
  // Polish with Newton; harmless when already accurate.
  const NewtonResult polished = DampedNewton(a, s, q, p, 20, 1e-15);
  if (polished.residual < RiccatiResidual(a, s, q, p).norm()) p = polished.p;
  return p;
}

CostMatrix SolveGareOracle(const StochasticPlant& plant, double gamma,
                           const std::optional<CostMatrix>& init) {
  if (!(gamma > 0.0)) throw Error(ErrorCode::kValidation, "gamma must be > 0");
  const Matrix& a = plant.A();
  const Matrix q = plant.Q();
  const Matrix s = GameWeight(plant, gamma);
  constexpr double target = 1e-14;
  constexpr double accept = 1e-9;
  constexpr int kMaxIterations = 200;

  auto acceptable = [&](const NewtonResult& r) {
    return r.residual <= accept * RiccatiScale(a, s, q, r.p) &&
           IsStabilizingPsd(a, s, r.p);
  };

  Matrix seed;
  if (init) {
    seed = *init;
  } else {
    const Matrix k0 = StabilizingGain(plant);
    seed = KleinmanLqr(a, plant.B(), q, plant.R(), k0).P;
  }
  NewtonResult direct = DampedNewton(a, s, q, seed, kMaxIterations, target);
  if (acceptable(direct)) return direct.p;

  if (HamiltonianHasImaginaryEigenvalues(Hamiltonian(a, s, q))) {
    throw Error(ErrorCode::kInfeasible,
                "game Hamiltonian has imaginary-axis eigenvalues at gamma = " +
                    std::to_string(gamma));
  }

  // Continuation in gamma^-2 from (nearly) the LQR problem down to the target.
  const Matrix bs = plant.B() * plant.R().inverse() * plant.B().transpose();
  const Matrix dd = plant.D() * plant.D().transpose();
  const Matrix k0 = StabilizingGain(plant);
  Matrix p = KleinmanLqr(a, plant.B(), q, plant.R(), k0).P;
  constexpr int kSteps = 40;
  bool lost = false;
  for (int j = 1; j <= kSteps; ++j) {
    const double frac = static_cast<double>(j) / kSteps;
    const double inv_g2 = frac / (gamma * gamma);
    const Matrix sj = Symmetrize(bs - inv_g2 * dd);
    NewtonResult r = DampedNewton(a, sj, q, p, kMaxIterations, target);
    if (!(r.residual <= accept * RiccatiScale(a, sj, q, r.p) &&
          IsStabilizingPsd(a, sj, r.p))) {
      lost = true;
      break;
    }
    p = r.p;
  }
  if (!lost && IsStabilizingPsd(a, s, p) &&
      RiccatiResidual(a, s, q, p).norm() <= accept * RiccatiScale(a, s, q, p)) {
    return p;
  }
  if (lost) {
    throw Error(ErrorCode::kInfeasible,
                "no stabilizing PSD game solution at gamma = " + std::to_string(gamma));
  }
  throw Error(ErrorCode::kNoConvergence,
              "game Riccati Newton iteration did not converge");
}

std::optional<CostMatrix> BoundedRealSolve(const StochasticPlant& plant,
                                           const Matrix& k, double gamma) {
  if (!(gamma > 0.0)) throw Error(ErrorCode::kValidation, "gamma must be > 0");
  if (k.rows() != plant.m() || k.cols() != plant.n()) {
    throw Error(ErrorCode::kDimensionMismatch, "K must be m x n");
  }
  const Matrix a_k = plant.A() - plant.B() * k;
  if (!IsHurwitz(a_k).hurwitz) {
    throw Error(ErrorCode::kNotStabilizing, "A - B K is not Hurwitz");
  }
  const Matrix q_k = Symmetrize(plant.Q() + k.transpose() * plant.R() * k);
  // Written as A^T P + P A - P S P + Q = 0 with S = -gamma^-2 D D^T.
  const Matrix s = -plant.D() * plant.D().transpose() / (gamma * gamma);
  const auto p = SolveRiccatiBySign(a_k, s, q_k);
  if (!p) return std::nullopt;
  const double res = RiccatiResidual(a_k, s, q_k, *p).norm();
  if (res > 1e-9 * RiccatiScale(a_k, s, q_k, *p)) return std::nullopt;
  if (!IsStabilizingPsd(a_k, s, *p)) return std::nullopt;
  return *p;
}

StateSpace ClosedLoopTzw(const StochasticPlant& plant, const Matrix& k) {
  if (k.rows() != plant.m() || k.cols() != plant.n()) {
    throw Error(ErrorCode::kDimensionMismatch, "K must be m x n");
  }
  return {plant.A() - plant.B() * k, plant.D(), plant.C() - plant.E() * k};
}

double SigmaMax(const StateSpace& ss, double omega) {
  const Eigen::Index n = ss.A.rows();
  Eigen::MatrixXcd m = -ss.A.cast<std::complex<double>>();
  m.diagonal().array() += std::complex<double>(0.0, omega);
  const Eigen::MatrixXcd x =
      Eigen::PartialPivLU<Eigen::MatrixXcd>(m).solve(ss.B.cast<std::complex<double>>());
  const Eigen::MatrixXcd g = ss.C.cast<std::complex<double>>() * x;
  (void)n;
  if (g.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(g);
  return svd.singularValues()(0);
}

double HinfFrequencySweep(const StateSpace& ss, int points, double omega_min,
                          double omega_max) {
  double best = SigmaMax(ss, 0.0);
  const double lo = std::log10(omega_min), hi = std::log10(omega_max);
  for (int i = 0; i < points; ++i) {
    const double t = points > 1 ? static_cast<double>(i) / (points - 1) : 0.0;
    best = std::max(best, SigmaMax(ss, std::pow(10.0, lo + t * (hi - lo))));
  }
  return best;
}

double HinfNorm(const StateSpace& ss, double tol) {
  const Eigen::Index n = ss.A.rows();
  if (!IsHurwitz(ss.A).hurwitz) {
    throw Error(ErrorCode::kNotHurwitz, "H-infinity norm needs a Hurwitz realization");
  }
  if (ss.B.norm() == 0.0 || ss.C.norm() == 0.0) return 0.0;
  const Matrix bb = ss.B * ss.B.transpose();
  const Matrix cc = ss.C.transpose() * ss.C;

  // Frequencies where sigma-max crosses g: imaginary eigenvalues of the
  // Hamiltonian at level g, sorted.
  auto crossings = [&](double g) {
    Matrix h(2 * n, 2 * n);
    h << ss.A, bb / (g * g), -cc, -ss.A.transpose();
    const Spectrum spec = ComputeSpectrum(h);
    const double scale = std::max(1.0, h.norm());
    std::vector<double> w;
    for (const auto& l : spec.eigenvalues) {
      if (l.imag() >= 0.0 && std::abs(l.real()) <= 1e-8 * std::max(scale, std::abs(l))) {
        w.push_back(l.imag());
      }
    }
    std::sort(w.begin(), w.end());
    return w;
  };

  double lb = SigmaMax(ss, 0.0);
  for (const auto& l : ComputeSpectrum(ss.A).eigenvalues) {
    lb = std::max(lb, SigmaMax(ss, std::abs(l.imag())));
    lb = std::max(lb, SigmaMax(ss, std::abs(l)));
  }
  // Two-step level-set iteration: raise g just above the best known value;
  // no crossings certifies the norm is below g, otherwise sigma-max at the
  // midpoints of the crossing intervals gives a strictly better lower bound.
  for (int it = 0; it < 80; ++it) {
    const double g = (1.0 + 2.0 * tol) * lb;
    const std::vector<double> w = crossings(g);
    if (w.empty()) break;
    double best = lb;
    if (w.size() == 1) best = std::max(best, SigmaMax(ss, w[0]));
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
      best = std::max(best, SigmaMax(ss, 0.5 * (w[i] + w[i + 1])));
    }
    best = std::max(best, SigmaMax(ss, 0.5 * w[0]));
    if (best <= lb) break;
    lb = best;
  }
  return lb;
}

ConstraintCheck InConstraintSet(const StochasticPlant& plant, const Matrix& k,
                                double gamma) {
  ConstraintCheck out;
  const StateSpace ss = ClosedLoopTzw(plant, k);
  const HurwitzCheck hc = IsHurwitz(ss.A);
  out.hurwitz = hc.hurwitz;
  out.abscissa = hc.spectrum.abscissa;
  if (!out.hurwitz) {
    out.hinf = std::numeric_limits<double>::infinity();
    return out;
  }
  out.hinf = HinfNorm(ss);
  out.brl_feasible = BoundedRealSolve(plant, k, gamma).has_value();
  out.member = out.hinf < gamma;
  return out;
}

Matrix StabilizingGain(const StochasticPlant& plant) {
  const Matrix& a = plant.A();
  const Matrix& b = plant.B();
  const Eigen::Index n = plant.n();
  const HurwitzCheck open = IsHurwitz(a);
  if (open.hurwitz) return Matrix::Zero(plant.m(), n);
  // Bass: with beta beyond the spectral abscissa, X solving
  // -(A + beta I) X - X (A + beta I)^T + 2 B B^T = 0 gives K = B^T X^-1.
  double beta = 1.0;
  for (const auto& l : open.spectrum.eigenvalues) {
    beta = std::max(beta, std::abs(l.real()) + 1.0);
  }
  const Matrix shifted = -(a + beta * Matrix::Identity(n, n));
  try {
    const Matrix x = SolveLyapunov(shifted.transpose(), 2.0 * b * b.transpose());
    Eigen::LDLT<Matrix> ldlt(x);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() &&
        MinSymEigenvalue(x) > 1e-10 * std::max(1.0, x.norm())) {
      const Matrix k = ldlt.solve(b).transpose();
      if (k.allFinite() && IsHurwitz(a - b * k).hurwitz) return k;
    }
  } catch (const Error&) {
  }
  const Matrix rinv = plant.R().inverse();
  const auto p = SolveRiccatiBySign(a, b * rinv * b.transpose(), plant.Q());
  if (p) {
    const Matrix k = rinv * b.transpose() * *p;
    if (IsHurwitz(a - b * k).hurwitz) return k;
  }
  throw Error(ErrorCode::kSearchFailure, "could not construct a stabilizing gain");
}

LqrSolution KleinmanLqr(const Matrix& a, const Matrix& b, const Matrix& q,
                        const Matrix& r, const Matrix& k0, double tol,
                        int max_iterations) {
  LqrSolution out;
  out.K = k0;
  const Matrix rinv = r.inverse();
  for (int it = 0; it < max_iterations; ++it) {
    const Matrix a_k = a - b * out.K;
    out.P = SolveLyapunov(a_k, q + out.K.transpose() * r * out.K);
    const Matrix next = rinv * b.transpose() * out.P;
    const double change = (next - out.K).norm();
    out.K = next;
    out.iterations = it + 1;
    if (change <= tol * (1.0 + next.norm())) break;
  }
  out.P = SolveLyapunov(a - b * out.K, q + out.K.transpose() * r * out.K);
  return out;
}

GainPair InitialGainSearch(const StochasticPlant& plant, double gamma) {
  if (!(gamma > 0.0)) throw Error(ErrorCode::kValidation, "gamma must be > 0");
  const Matrix zero_l = Matrix::Zero(plant.v(), plant.n());
  double best_hinf = std::numeric_limits<double>::infinity();
  auto accept = [&](const Matrix& k) {
    const ConstraintCheck c = InConstraintSet(plant, k, gamma);
    best_hinf = std::min(best_hinf, c.hinf);
    return c.member;
  };

  const Matrix k_stab = StabilizingGain(plant);
  const Matrix q = plant.Q();
  const Matrix r = plant.R();
  const LqrSolution lqr = KleinmanLqr(plant.A(), plant.B(), q, r, k_stab);
  if (accept(lqr.K)) return {lqr.K, zero_l};

  Matrix k_prev = lqr.K;
  for (int i = 1; i <= 10; ++i) {
    const double rho = std::ldexp(1.0, -i);
    const LqrSolution scaled = KleinmanLqr(plant.A(), plant.B(), q, rho * r, k_prev);
    k_prev = scaled.K;
    if (accept(scaled.K)) return {scaled.K, zero_l};
  }

  // Game gains at levels gamma_h < gamma satisfy |T_zw| < gamma_h < gamma;
  // the last rung is gamma itself, whose saddle gain is strictly inside.
  const Matrix rinv = r.inverse();
  std::optional<CostMatrix> warm;
  for (double factor : {2.0, 1.0}) {
    try {
      warm = SolveGareOracle(plant, factor * gamma, warm);
    } catch (const Error&) {
      warm.reset();
    }
  }
  for (double factor : {0.8, 0.9, 0.95, 1.0}) {
    try {
      const CostMatrix p = SolveGareOracle(plant, factor * gamma);
      const Matrix k = rinv * plant.B().transpose() * p;
      if (accept(k)) return {k, zero_l};
    } catch (const Error&) {
    }
  }
  throw Error(ErrorCode::kSearchFailure,
              "no gain with |T_zw|_inf < " + std::to_string(gamma) +
                  "; best level reached " + std::to_string(best_hinf));
}

}  // namespace mixedpo
