#include "mixedpo/policy_iteration.h"

#include <chrono>
#include <cmath>

#include "mixedpo/errors.h"
#include "mixedpo/riccati.h"

namespace mixedpo {

namespace {

using Clock = std::chrono::steady_clock;

double MsSince(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Ratio of traces with a guard band: NaN once the denominator has vanished,
// numerators inside the band count as zero.
double GuardedRatio(double num, double den, double band) {
  if (std::abs(den) <= band) return kUnset;
  if (std::abs(num) <= band) num = 0.0;
  return num / den;
}

}  // namespace

InnerResult InnerLoop(const StochasticPlant& plant, const Matrix& k, double gamma,
                      int inner_max, double tol, const InnerPerturbation& perturb,
                      bool tolerate_divergence) {
  if (k.rows() != plant.m() || k.cols() != plant.n()) {
    throw Error(ErrorCode::kDimensionMismatch, "K must be m x n");
  }
  const Matrix a_k = plant.A() - plant.B() * k;
  const Matrix q_k = Symmetrize(plant.Q() + k.transpose() * plant.R() * k);
  const double g2 = gamma * gamma;

  InnerResult out;
  Matrix l = Matrix::Zero(plant.v(), plant.n());
  bool perturbed = false;  // a nonzero L~ went into this evaluation
  for (int q = 0; q <= inner_max; ++q) {
    const auto t0 = Clock::now();
    const Matrix a_kl = a_k + plant.D() * l;
    CostMatrix p;
    try {
      p = SolveLyapunov(a_kl, q_k - g2 * l.transpose() * l);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNotHurwitz) throw;
      if (tolerate_divergence) {
        out.diverged_at = q;
        break;
      }
      throw Error(ErrorCode::kInnerDivergence,
                  "inner loop: A_KL not Hurwitz at q = " + std::to_string(q));
    }
    InnerRecord rec;
    rec.q = q;
    rec.L = l;
    rec.P = p;
    if (q > 0) rec.step = (p - out.P).norm();
    rec.wall_ms = MsSince(t0);
    out.records.push_back(rec);
    out.P = p;
    out.L = plant.D().transpose() * p / g2;
    if (q > 0 && !perturbed && rec.step <= tol) {
      out.converged = true;
      break;
    }
    l = out.L;
    if (perturb) {
      const Matrix extra = perturb(q + 1);
      perturbed = extra.norm() > 0.0;
      l += extra;
    }
  }
  return out;
}

Matrix OuterStep(const StochasticPlant& plant, const CostMatrix& p) {
  return plant.R().llt().solve(plant.B().transpose() * p);
}

IterationTrace RunDoubleLoop(const StochasticPlant& plant, const DesignConfig& config,
                             const std::optional<GainPair>& init,
                             const DoubleLoopOptions& options) {
  config.Validate();
  const double gamma = config.gamma;
  GainPair start = init ? *init : InitialGainSearch(plant, gamma);
  CheckGainShapes(plant, start);
  const ConstraintCheck c0 = InConstraintSet(plant, start.K, gamma);
  if (!c0.member) {
    throw Error(ErrorCode::kInfeasibleStart,
                "initial gain outside the constraint set (hinf = " +
                    std::to_string(c0.hinf) + ", gamma = " + std::to_string(gamma) + ")");
  }

  IterationTrace trace;
  trace.method = "model-based";
  Matrix k = start.K;
  for (int p = 0; p < config.outer_max; ++p) {
    if (options.stop_on_infeasible && p > 0 &&
        !InConstraintSet(plant, k, gamma).member) {
      trace.feasibility_lost = true;
      trace.feasibility_lost_at = p;
      break;
    }
    const auto t0 = Clock::now();
    InnerResult inner;
    try {
      inner = InnerLoop(plant, k, gamma, config.inner_max, config.tol);
    } catch (const Error& e) {
      if (!options.stop_on_infeasible || e.code() != ErrorCode::kInnerDivergence) throw;
      trace.feasibility_lost = true;
      trace.feasibility_lost_at = p;
      break;
    }
    Matrix k_next = OuterStep(plant, inner.P);
    bool perturbed = false;
    if (options.outer_perturbation) {
      const Matrix extra = options.outer_perturbation(p + 1);
      perturbed = extra.norm() > 0.0;
      k_next += extra;
    }
    OuterRecord rec;
    rec.wall_ms = MsSince(t0);
    trace.total_ms += rec.wall_ms;
    rec.p = p;
    rec.K = k;
    rec.P = inner.P;
    rec.K_next = k_next;
    rec.gain_step = (k_next - k).norm();
    rec.inner = std::move(inner.records);
    rec.inner_converged = inner.converged;
    trace.outer.push_back(std::move(rec));
    trace.K_final = k_next;
    trace.P_final = inner.P;
    if (!perturbed && trace.outer.back().gain_step <= config.tol) {
      trace.converged = true;
      break;
    }
    k = k_next;
  }
  return trace;
}

void AttachDiagnostics(IterationTrace& trace, const StochasticPlant& plant,
                       double gamma) {
  const Matrix dd = plant.D() * plant.D().transpose() / (gamma * gamma);
  for (OuterRecord& rec : trace.outer) {
    rec.residual = GareResidual(rec.P, plant, gamma).norm();
    const ConstraintCheck c = InConstraintSet(plant, rec.K, gamma);
    rec.hinf = c.hinf;
    rec.hurwitz_ok = c.hurwitz;
    rec.in_set = c.member;
    const Matrix a_k = plant.A() - plant.B() * rec.K;
    const Matrix q_k = plant.Q() + rec.K.transpose() * plant.R() * rec.K;
    for (InnerRecord& in : rec.inner) {
      in.residual =
          (a_k.transpose() * in.P + in.P * a_k + q_k + in.P * dd * in.P).norm();
      in.hurwitz_ok = IsHurwitz(a_k + plant.D() * in.L).hurwitz;
    }
  }
}

ConvergenceCertificate Certify(const IterationTrace& trace,
                               const StochasticPlant& plant, double gamma,
                               const CostMatrix& p_star) {
  ConvergenceCertificate cert;
  const double tr_star = p_star.trace();
  const double band = 1e-9 * (1.0 + std::abs(tr_star));
  const auto& outer = trace.outer;
  for (std::size_t p = 0; p + 1 < outer.size(); ++p) {
    const double r = GuardedRatio((outer[p + 1].P - p_star).trace(),
                                  (outer[p].P - p_star).trace(), band);
    cert.outer_ratios.push_back(r);
    if (!std::isnan(r) && (r < 0.0 || r >= 1.0)) {
      cert.flags.push_back("outer ratio " + std::to_string(r) + " at p = " +
                           std::to_string(p));
    }
  }

  const double g2 = gamma * gamma;
  const double dd_norm = SpectralNorm(plant.D() * plant.D().transpose());
  for (const OuterRecord& rec : outer) {
    std::vector<double> ratios;
    std::optional<CostMatrix> p_k;
    try {
      p_k = BoundedRealSolve(plant, rec.K, gamma);
    } catch (const Error&) {
    }
    if (!p_k) {
      cert.flags.push_back("no bounded-real solution at p = " + std::to_string(rec.p));
      cert.inner_ratios.push_back(ratios);
      cert.d_K.push_back(kUnset);
      continue;
    }
    const double inner_band = 1e-10 * (1.0 + std::abs(p_k->trace()));
    for (std::size_t q = 0; q + 1 < rec.inner.size(); ++q) {
      const double r = GuardedRatio((*p_k - rec.inner[q + 1].P).trace(),
                                    (*p_k - rec.inner[q].P).trace(), inner_band);
      ratios.push_back(r);
      if (!std::isnan(r) && (r < 0.0 || r >= 1.0)) {
        cert.flags.push_back("inner ratio " + std::to_string(r) + " at (p, q) = (" +
                             std::to_string(rec.p) + ", " + std::to_string(q) + ")");
      }
    }
    cert.inner_ratios.push_back(std::move(ratios));
    const Matrix a_k = plant.A() - plant.B() * rec.K;
    cert.d_K.push_back(std::log(1.25) /
                       (SpectralNorm(a_k) + dd_norm * SpectralNorm(*p_k) / g2));
  }

  if (!outer.empty()) {
    const double h = (outer.front().P - p_star).trace();
    const Matrix bs = plant.B() * plant.R().inverse() * plant.B().transpose();
    cert.c_h = std::log(1.25) /
               (SpectralNorm(plant.A()) + (SpectralNorm(bs) + dd_norm / g2) * h);
  }
  return cert;
}

}  // namespace mixedpo
