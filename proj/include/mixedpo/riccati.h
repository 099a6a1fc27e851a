#pragma once

#include <optional>
#include <vector>

#include "mixedpo/matops.h"
#include "mixedpo/plant.h"

namespace mixedpo {

// A^T P + P A - P (B R^-1 B^T - gamma^-2 D D^T) P + Q.
Matrix GareResidual(const Matrix& p, const StochasticPlant& plant, double gamma);

// Stabilizing solution of the game ARE by damped Newton iteration.
//
// Seeded from `init` when given, else from the LQR solution; when the direct
// Newton run does not land on a stabilizing PSD root the solve is repeated
// along a gamma continuation path from a large attenuation level down to
// `gamma`. Throws kInfeasible when the Hamiltonian has imaginary-axis
// eigenvalues or no stabilizing PSD root exists, kNoConvergence when the
// iteration budget runs out.
CostMatrix SolveGareOracle(const StochasticPlant& plant, double gamma,
                           const std::optional<CostMatrix>& init = std::nullopt);

// Stabilizing solution P_K of
//   A_K^T P + P A_K + Q_K + gamma^-2 P D D^T P = 0,  A_K + gamma^-2 D D^T P Hurwitz,
// or nullopt when none exists (equivalently |T_zw(K)|_inf >= gamma).
// Throws kNotStabilizing when A - B K is not Hurwitz.
std::optional<CostMatrix> BoundedRealSolve(const StochasticPlant& plant,
                                           const Matrix& k, double gamma);

// Realization (A_cl, B_in, C_out, 0).
struct StateSpace {
  Matrix A;
  Matrix B;
  Matrix C;
};

// T_zw(K) = (C - E K)(sI - A + B K)^-1 D.
StateSpace ClosedLoopTzw(const StochasticPlant& plant, const Matrix& k);

// Largest singular value of C (j omega I - A)^-1 B.
double SigmaMax(const StateSpace& ss, double omega);

// Level-set iteration on the Hamiltonian imaginary-axis test: sigma-max is
// evaluated between consecutive crossing frequencies until a level (1 + 2 tol)
// above the best value has no crossings. `tol` is relative.
// Throws kNotHurwitz when A is not Hurwitz.
double HinfNorm(const StateSpace& ss, double tol = 1e-9);

// Dense sweep over omega = 0 and `points` log-spaced frequencies in
// [omega_min, omega_max]; a lower bound on the true norm.
double HinfFrequencySweep(const StateSpace& ss, int points = 100000,
                          double omega_min = 1e-4, double omega_max = 1e4);

struct ConstraintCheck {
  bool member = false;       // hurwitz && hinf < gamma
  bool hurwitz = false;      // A - B K
  double abscissa = 0.0;
  double hinf = 0.0;         // +inf when A - B K is not Hurwitz
  bool brl_feasible = false; // BoundedRealSolve found a stabilizing root
};

ConstraintCheck InConstraintSet(const StochasticPlant& plant, const Matrix& k,
                                double gamma);

// K with A - B K Hurwitz. Bass's shifted-Lyapunov construction, falling back
// to the LQR Hamiltonian when the controllability Gramian is singular.
Matrix StabilizingGain(const StochasticPlant& plant);

// Kleinman iteration for the LQR problem (Q, R) from a stabilizing K0.
struct LqrSolution {
  Matrix K;
  CostMatrix P;
  int iterations = 0;
};
LqrSolution KleinmanLqr(const Matrix& a, const Matrix& b, const Matrix& q,
                        const Matrix& r, const Matrix& k0, double tol = 1e-12,
                        int max_iterations = 100);

// Returns (K0, 0) with K0 in the constraint set. Tries the LQR gain first,
// then LQR gains with the control weight scaled down, then game gains along
// a gamma ladder at or below the target. Throws kSearchFailure (with the best
// H-infinity level reached) when nothing feasible is found.
GainPair InitialGainSearch(const StochasticPlant& plant, double gamma);

// Stabilizing solution of A^T P + P A - P S P + Q = 0 from the matrix sign
// function of [[A, -S], [-Q, -A^T]]; nullopt when the Hamiltonian has
// eigenvalues on the imaginary axis or the stable subspace is not a graph.
// Exposed for tests.
std::optional<Matrix> SolveRiccatiBySign(const Matrix& a, const Matrix& s,
                                         const Matrix& q);

// True if any eigenvalue of the Hamiltonian lies within a relative band of
// the imaginary axis.
bool HamiltonianHasImaginaryEigenvalues(const Matrix& h, double rel_tol = 1e-8);

}  // namespace mixedpo
