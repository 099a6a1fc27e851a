#pragma once

// Dense linear-algebra kernels and the vectorization conventions shared by
// every other module.
//
// Conventions:
//   Vec(X)   column stacking, [x11, x21, ..., xm1, x12, ...].
//   Svec(P)  upper triangle row by row with sqrt(2) on off-diagonals,
//            [p11, sqrt2 p12, ..., sqrt2 p1n, p22, ..., pnn].
//   Vecv(x)  quadratic monomials in the same order, no weights,
//            [x1^2, x1 x2, ..., x1 xn, x2^2, ..., xn^2].

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace mixedpo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CostMatrix = Eigen::MatrixXd;

// Guard added to every Hurwitz margin: an abscissa in [-1e-9, 0) is treated
// as marginal, not stable.
inline constexpr double kHurwitzGuard = 1e-9;

Vector Vec(const Matrix& m);

// Inverse of Vec for an m x n target.
Matrix Unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols);

// Throws kAsymmetricInput if max|P - P^T| exceeds `tol`; the symmetric part
// is what gets vectorized.
Vector Svec(const Matrix& p, double tol = 1e-10);

// Throws kBadLength unless v.size() is a triangular number.
Matrix Smat(const Vector& v);

Vector Vecv(const Vector& x);

// n such that n(n+1)/2 == len, or -1.
Eigen::Index TriangularRoot(Eigen::Index len);

Matrix Kron(const Matrix& a, const Matrix& b);

Matrix Symmetrize(const Matrix& m);

bool AllFinite(const Matrix& m);

// Throws kNonFinite naming `what` if any entry is NaN or Inf.
void RequireFinite(const Matrix& m, const char* what);

struct Spectrum {
  std::vector<std::complex<double>> eigenvalues;
  double abscissa = 0.0;  // max real part
};

Spectrum ComputeSpectrum(const Matrix& a);

struct HurwitzCheck {
  bool hurwitz = false;
  Spectrum spectrum;
};

// True iff the spectral abscissa is below -(margin + kHurwitzGuard).
HurwitzCheck IsHurwitz(const Matrix& a, double margin = 0.0);

// Unique symmetric P with F^T P + P F + Qs = 0, computed by complex Schur
// reduction (Bartels-Stewart). Requires F Hurwitz (kNotHurwitz otherwise).
// The result is symmetrized and its residual is checked against
// 1e-10 (1 + |Qs|_F) up to the conditioning of the problem.
CostMatrix SolveLyapunov(const Matrix& f, const Matrix& qs);

// Same reduction without the Hurwitz precondition: solves
// F^T X + X F + Qs = 0 whenever lambda_i + conj(lambda_j) != 0 for all pairs.
// Throws kSolveFailure when that sum is numerically zero.
Matrix SolveLyapunovGeneral(const Matrix& f, const Matrix& qs);

// Trapezoidal approximation of int_0^T exp(F^T t) Qs exp(F t) dt.
Matrix LyapunovQuadratureOracle(const Matrix& f, const Matrix& qs,
                                double horizon, int steps);

double SpectralNorm(const Matrix& m);

// Smallest eigenvalue of the symmetric part.
double MinSymEigenvalue(const Matrix& m);

}  // namespace mixedpo
