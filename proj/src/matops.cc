#include "mixedpo/matops.h"

#include <algorithm>
#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "mixedpo/errors.h"

namespace mixedpo {

namespace {

using ComplexMatrix = Eigen::MatrixXcd;

// Solves T^H Y + Y T = C for upper-triangular complex T, column by column.
// Column j couples only to columns k < j through T(k, j), and each column
// reduces to a lower-triangular system with matrix T^H + T(j,j) I.
ComplexMatrix SolveTriangularLyapunov(const ComplexMatrix& t,
                                      const ComplexMatrix& c) {
  const Eigen::Index n = t.rows();
  const double scale = std::max(1.0, t.cwiseAbs().maxCoeff());
  ComplexMatrix y = ComplexMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::VectorXcd rhs = c.col(j);
    for (Eigen::Index k = 0; k < j; ++k) rhs -= y.col(k) * t(k, j);
    // Forward substitution with L = T^H + t_jj I (lower triangular).
    for (Eigen::Index i = 0; i < n; ++i) {
      std::complex<double> acc = rhs(i);
      for (Eigen::Index k = 0; k < i; ++k) acc -= std::conj(t(k, i)) * y(k, j);
      const std::complex<double> diag = std::conj(t(i, i)) + t(j, j);
      if (std::abs(diag) <= 1e-14 * scale) {
        throw Error(ErrorCode::kSolveFailure,
                    "Lyapunov operator is singular (eigenvalue pair sums to "
                    "zero)");
      }
      y(i, j) = acc / diag;
    }
  }
  return y;
}

Matrix LyapunovResidual(const Matrix& f, const Matrix& x, const Matrix& qs) {
  return f.transpose() * x + x * f + qs;
}

// Residual accumulated in extended precision for refinement.
Matrix ExtendedResidual(const Matrix& f, const Matrix& x, const Matrix& qs) {
  using Wide = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const Wide fw = f.cast<long double>(), xw = x.cast<long double>();
  return (fw.transpose() * xw + xw * fw + qs.cast<long double>()).cast<double>();
}

}  // namespace

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kAsymmetricInput: return "AsymmetricInput";
    case ErrorCode::kBadLength: return "BadLength";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kNotHurwitz: return "NotHurwitz";
    case ErrorCode::kSolveFailure: return "SolveFailure";
    case ErrorCode::kBadParams: return "BadParams";
    case ErrorCode::kGenerationFailure: return "GenerationFailure";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kNotStabilizing: return "NotStabilizing";
    case ErrorCode::kSearchFailure: return "SearchFailure";
    case ErrorCode::kInnerDivergence: return "InnerDivergence";
    case ErrorCode::kInfeasibleStart: return "InfeasibleStart";
    case ErrorCode::kBlowup: return "Blowup";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kDivergenceDetected: return "DivergenceDetected";
    case ErrorCode::kEvaluationInfeasible: return "EvaluationInfeasible";
    case ErrorCode::kValidation: return "Validation";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

Vector Vec(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

Matrix Unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols) {
    throw Error(ErrorCode::kBadLength, "Unvec: length " +
                                           std::to_string(v.size()) +
                                           " does not fit the target shape");
  }
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

Vector Svec(const Matrix& p, double tol) {
  if (p.rows() != p.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "Svec: matrix is not square");
  }
  if (p.size() > 0 && (p - p.transpose()).cwiseAbs().maxCoeff() > tol) {
    throw Error(ErrorCode::kAsymmetricInput,
                "Svec: input violates the symmetry tolerance");
  }
  const Matrix s = Symmetrize(p);
  const Eigen::Index n = s.rows();
  Vector out(n * (n + 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    out(k++) = s(i, i);
    for (Eigen::Index j = i + 1; j < n; ++j) out(k++) = M_SQRT2 * s(i, j);
  }
  return out;
}

Eigen::Index TriangularRoot(Eigen::Index len) {
  const auto n = static_cast<Eigen::Index>(
      std::floor((std::sqrt(8.0 * static_cast<double>(len) + 1.0) - 1.0) / 2.0 + 0.5));
  return n * (n + 1) / 2 == len ? n : -1;
}

Matrix Smat(const Vector& v) {
  const Eigen::Index n = TriangularRoot(v.size());
  if (n < 0) {
    throw Error(ErrorCode::kBadLength,
                "Smat: length " + std::to_string(v.size()) +
                    " is not a triangular number");
  }
  Matrix p(n, n);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    p(i, i) = v(k++);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      p(i, j) = p(j, i) = v(k++) / M_SQRT2;
    }
  }
  return p;
}

Vector Vecv(const Vector& x) {
  const Eigen::Index n = x.size();
  Vector out(n * (n + 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) out(k++) = x(i) * x(j);
  }
  return out;
}

Matrix Kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Matrix Symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

bool AllFinite(const Matrix& m) { return m.allFinite(); }

void RequireFinite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::kNonFinite, std::string(what) + " has NaN/Inf");
  }
}

Spectrum ComputeSpectrum(const Matrix& a) {
  Spectrum s;
  if (a.rows() != a.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "spectrum of non-square matrix");
  }
  if (a.size() == 0) {
    s.abscissa = -std::numeric_limits<double>::infinity();
    return s;
  }
  Eigen::EigenSolver<Matrix> es(a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::kSolveFailure, "eigenvalue iteration failed");
  }
  const Eigen::VectorXcd& ev = es.eigenvalues();
  s.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  s.abscissa = -std::numeric_limits<double>::infinity();
  for (const auto& l : s.eigenvalues) s.abscissa = std::max(s.abscissa, l.real());
  return s;
}

HurwitzCheck IsHurwitz(const Matrix& a, double margin) {
  HurwitzCheck check;
  check.spectrum = ComputeSpectrum(a);
  check.hurwitz = check.spectrum.abscissa < -(margin + kHurwitzGuard);
  return check;
}

Matrix SolveLyapunovGeneral(const Matrix& f, const Matrix& qs) {
  if (f.rows() != f.cols() || qs.rows() != f.rows() || qs.cols() != f.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "Lyapunov operand shapes");
  }
  const Eigen::Index n = f.rows();
  if (n == 0) return Matrix(0, 0);
  Eigen::ComplexSchur<ComplexMatrix> schur(f.cast<std::complex<double>>());
  if (schur.info() != Eigen::Success) {
    throw Error(ErrorCode::kSolveFailure, "Schur decomposition failed");
  }
  const ComplexMatrix& u = schur.matrixU();
  const ComplexMatrix& t = schur.matrixT();
  // F = U T U^H, so U^H (F^T X + X F) U = T^H Y + Y T with Y = U^H X U.
  const ComplexMatrix c = -(u.adjoint() * qs.cast<std::complex<double>>() * u);
  const ComplexMatrix y = SolveTriangularLyapunov(t, c);
  Matrix x = (u * y * u.adjoint()).real();
  // Iterative refinement on the same factorization.
  for (int step = 0; step < 2; ++step) {
    const Matrix r = ExtendedResidual(f, x, qs);
    const ComplexMatrix dc = -(u.adjoint() * r.cast<std::complex<double>>() * u);
    x += (u * SolveTriangularLyapunov(t, dc) * u.adjoint()).real();
  }
  return x;
}

CostMatrix SolveLyapunov(const Matrix& f, const Matrix& qs) {
  if (f.rows() != f.cols() || qs.rows() != f.rows() || qs.cols() != f.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "Lyapunov operand shapes");
  }
  const auto check = IsHurwitz(f);
  if (!check.hurwitz) {
    throw Error(ErrorCode::kNotHurwitz,
                "Lyapunov: spectral abscissa " +
                    std::to_string(check.spectrum.abscissa) + " >= 0");
  }
  const Matrix qsym = Symmetrize(qs);
  CostMatrix p = Symmetrize(SolveLyapunovGeneral(f, qsym));
  if (!p.allFinite()) {
    throw Error(ErrorCode::kSolveFailure, "Lyapunov solution is not finite");
  }
  // Gross failure only: well-conditioned inputs land near 1e-14 relative.
  const double res = LyapunovResidual(f, p, qsym).norm();
  const double scale =
      1.0 + qsym.norm() + 2.0 * f.norm() * p.norm();
  if (res > 1e-6 * scale) {
    throw Error(ErrorCode::kSolveFailure,
                "Lyapunov residual " + std::to_string(res) + " too large");
  }
  return p;
}

Matrix LyapunovQuadratureOracle(const Matrix& f, const Matrix& qs,
                                double horizon, int steps) {
  if (!IsHurwitz(f).hurwitz) {
    throw Error(ErrorCode::kNotHurwitz, "quadrature oracle needs Hurwitz F");
  }
  if (steps <= 0 || !(horizon > 0.0)) {
    throw Error(ErrorCode::kBadParams, "quadrature needs steps > 0, T > 0");
  }
  const double h = horizon / steps;
  const Matrix step = (f * h).exp();
  Matrix phi = Matrix::Identity(f.rows(), f.cols());
  Matrix acc = 0.5 * qs;  // t = 0 endpoint
  for (int k = 1; k <= steps; ++k) {
    phi = phi * step;
    const Matrix g = phi.transpose() * qs * phi;
    acc += (k == steps ? 0.5 : 1.0) * g;
  }
  return Symmetrize(acc * h);
}

double SpectralNorm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double MinSymEigenvalue(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(Symmetrize(m),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace mixedpo
