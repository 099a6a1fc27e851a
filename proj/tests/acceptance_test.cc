// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when any
// criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "mixedpo/npg.h"
#include "mixedpo/policy_iteration.h"
#include "mixedpo/riccati.h"
#include "mixedpo/robustness.h"
#include "mixedpo/sampling.h"
#include "test_util.h"

namespace mixedpo {
namespace {

using Clock = std::chrono::steady_clock;
using test::RelFro;

// Pinned tolerances.
constexpr double kGoldenTol = 1e-8;
constexpr int kGoldenRounds = 10;
constexpr double kGoldenSeconds = 0.1;
constexpr int kCorpusSize = 50;
constexpr double kOracleTol = 1e-6;
constexpr double kCorpusSeconds = 30.0;
constexpr double kEigTol = 1e-9;
constexpr double kKroneckerTol = 1e-10;
constexpr double kQuadratureTol = 1e-6;
constexpr double kSweepTol = 1e-4;
constexpr double kSuiteSeconds = 10.0;
constexpr double kModelFreeTol = 1e-3;
constexpr double kSeedSpread = 3.0;
constexpr double kTensMin = 0.1, kTensMax = 1.0;
constexpr double kSlope = 2.0, kSlopeBand = 0.7;
constexpr double kSpeedRatio = 0.5;
constexpr double kNpgLqrTol = 1e-6;
constexpr double kNpgGainTol = 1e-5;

const double kPStar = (2.0 + std::sqrt(7.0)) / 1.5;

struct Line {
  int id;
  std::string name;
  bool pass;
  std::string detail;
};

std::vector<Line> lines;

void Report(int id, const std::string& name, bool pass, const std::string& detail) {
  lines.push_back({id, name, pass, detail});
  std::printf("AC%-2d %s  %s: %s\n", id, pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string Fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

template <typename F>
double Seconds(F&& f) {
  const auto t0 = Clock::now();
  f();
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

DesignConfig Design(double gamma, double tol = 1e-8) {
  DesignConfig c;
  c.gamma = gamma;
  c.tol = tol;
  return c;
}

struct CorpusRun {
  test::CorpusEntry entry;
  IterationTrace trace;
  Matrix p_star;
};

void Ac1() {
  IterationTrace t;
  const double s = Seconds([&] { t = RunDoubleLoop(GoldenScalar(), Design(2.0)); });
  const double err = std::abs(t.P_final(0, 0) - kPStar);
  const int rounds = static_cast<int>(t.outer.size());
  Report(1, "golden scalar convergence",
         t.converged && err <= kGoldenTol && rounds <= kGoldenRounds && s < kGoldenSeconds,
         "|P - P*| = " + Fmt("%.2e", err) + ", " + std::to_string(rounds) + " outer rounds, " +
             Fmt("%.4f", s) + " s");
}

void Ac2(const std::vector<CorpusRun>& runs, double seconds) {
  double worst = 0.0;
  int unconverged = 0;
  for (const CorpusRun& r : runs) {
    worst = std::max(worst, RelFro(r.trace.P_final, r.p_star));
    unconverged += r.trace.converged ? 0 : 1;
  }
  Report(2, "oracle equivalence",
         runs.size() >= kCorpusSize && worst <= kOracleTol && unconverged == 0 &&
             seconds < kCorpusSeconds,
         std::to_string(runs.size()) + " plants, worst rel. Frobenius " + Fmt("%.2e", worst) +
             ", " + std::to_string(unconverged) + " unconverged, " + Fmt("%.2f", seconds) + " s");
}

// Eigenvalue tolerance scaled by 1 + |P|_F: at |P| ~ 1e4 the rounding floor of
// the data Q_K - gamma^2 L^T L is already ~1e-9.
void Ac3(const std::vector<CorpusRun>& runs) {
  int outer_bad = 0, inner_bad = 0, checks = 0, absolute_bad = 0;
  double worst = 0.0;
  for (const CorpusRun& r : runs) {
    const auto& outer = r.trace.outer;
    for (std::size_t p = 0; p < outer.size(); ++p) {
      const double scale = 1.0 + outer[p].P.norm();
      if (p + 1 < outer.size()) {
        const double e = MinSymEigenvalue(outer[p].P - outer[p + 1].P);
        worst = std::min(worst, e / scale);
        outer_bad += e < -kEigTol * scale ? 1 : 0;
        absolute_bad += e < -kEigTol ? 1 : 0;
        ++checks;
      }
      for (std::size_t q = 0; q + 1 < outer[p].inner.size(); ++q) {
        const double e = MinSymEigenvalue(outer[p].inner[q + 1].P - outer[p].inner[q].P);
        worst = std::min(worst, e / scale);
        inner_bad += e < -kEigTol * scale ? 1 : 0;
        absolute_bad += e < -kEigTol ? 1 : 0;
        ++checks;
      }
    }
  }
  Report(3, "monotonicity", outer_bad == 0 && inner_bad == 0,
         std::to_string(checks) + " iterate pairs, " + std::to_string(outer_bad) +
             " outer and " + std::to_string(inner_bad) +
             " inner violations, most negative eigenvalue / (1 + |P|) " + Fmt("%.2e", worst) +
             "; unscaled 1e-9 would flag " + std::to_string(absolute_bad));
}

void Ac4(std::vector<CorpusRun>& runs) {
  int bad = 0, checked = 0;
  double margin = 1e300;
  auto scan = [&](IterationTrace& t, const StochasticPlant& plant, double gamma) {
    AttachDiagnostics(t, plant, gamma);
    for (const OuterRecord& rec : t.outer) {
      ++checked;
      if (!(rec.hinf < gamma) || !rec.hurwitz_ok) ++bad;
      margin = std::min(margin, (gamma - rec.hinf) / gamma);
    }
  };
  for (CorpusRun& r : runs) scan(r.trace, r.entry.plant, r.entry.gamma);
  const StochasticPlant triple = TriplePendulum();
  IterationTrace t = RunDoubleLoop(triple, Design(5.0));
  scan(t, triple, 5.0);
  Report(4, "constraint invariance", bad == 0,
         std::to_string(checked) + " outer iterates incl. triple pendulum at gamma 5, " +
             std::to_string(bad) + " outside, smallest relative margin " +
             Fmt("%.3e", margin));
}

void Ac5(const std::vector<CorpusRun>& runs) {
  int outer_bad = 0, inner_bad = 0, outer_n = 0, inner_n = 0;
  double outer_max = 0.0, inner_max = 0.0;
  for (const CorpusRun& r : runs) {
    const ConvergenceCertificate c =
        Certify(r.trace, r.entry.plant, r.entry.gamma, r.p_star);
    for (double x : c.outer_ratios) {
      if (std::isnan(x)) continue;
      ++outer_n;
      outer_max = std::max(outer_max, x);
      outer_bad += x < 1.0 ? 0 : 1;
    }
    for (const auto& row : c.inner_ratios) {
      for (double x : row) {
        if (std::isnan(x)) continue;
        ++inner_n;
        inner_max = std::max(inner_max, x);
        inner_bad += x < 1.0 ? 0 : 1;
      }
    }
  }
  Report(5, "contraction", outer_bad == 0 && inner_bad == 0 && outer_n > 0 && inner_n > 0,
         std::to_string(outer_n) + " outer ratios (max " + Fmt("%.4f", outer_max) + "), " +
             std::to_string(inner_n) + " inner ratios (max " + Fmt("%.4f", inner_max) +
             "), " + std::to_string(outer_bad + inner_bad) + " >= 1");
}

void Ac6() {
  std::mt19937_64 rng(61);
  double kron = 0.0, quad = 0.0, sweep = 0.0;
  const double s1 = Seconds([&] {
    for (int trial = 0; trial < 200; ++trial) {
      const int n = 1 + trial % 8;
      const Matrix f = test::RandomHurwitz(rng, n, 0.1 + 0.05 * (trial % 5));
      const Matrix q = test::RandomPsd(rng, n, 0.1);
      kron = std::max(kron, RelFro(SolveLyapunov(f, q), test::KroneckerLyapunov(f, q)));
    }
  });
  const double s2 = Seconds([&] {
    for (int trial = 0; trial < 10; ++trial) {
      const int n = 2 + trial % 4;
      const Matrix f = test::RandomHurwitz(rng, n, 1.0);
      const Matrix q = test::RandomPsd(rng, n, 0.5);
      quad = std::max(quad,
                      RelFro(LyapunovQuadratureOracle(f, q, 20.0, 200000), SolveLyapunov(f, q)));
    }
  });
  const double s3 = Seconds([&] {
    for (int trial = 0; trial < 30; ++trial) {
      const int n = 1 + trial % 6;
      StateSpace ss{test::RandomHurwitz(rng, n, 0.2 + 0.1 * (trial % 3)),
                    test::RandomMatrix(rng, n, 1 + trial % 3),
                    test::RandomMatrix(rng, 1 + trial % 2, n)};
      const double h = HinfNorm(ss);
      sweep = std::max(sweep, std::abs(h - HinfFrequencySweep(ss)) / h);
    }
  });
  Report(6, "solver cross-checks",
         kron <= kKroneckerTol && quad <= kQuadratureTol && sweep <= kSweepTol &&
             std::max({s1, s2, s3}) < kSuiteSeconds,
         "Kronecker " + Fmt("%.2e", kron) + " (" + Fmt("%.2f", s1) + " s), quadrature " +
             Fmt("%.2e", quad) + " (" + Fmt("%.2f", s2) + " s), sweep " + Fmt("%.2e", sweep) +
             " (" + Fmt("%.2f", s3) + " s)");
}

void Ac7() {
  const StochasticPlant g = GoldenScalar();
  const DesignConfig dc = Design(2.0);
  const GainPair init = InitialGainSearch(g, 2.0);
  const IterationTrace mb = RunDoubleLoop(g, dc, init);
  SimulationConfig sc;
  sc.seed = 11;
  const IterationTrace a = RunModelFree(KnownWeightsOf(g), Simulate(g, init, sc), dc, init);
  const IterationTrace b = RunModelFree(KnownWeightsOf(g), Simulate(g, init, sc), dc, init);
  const double err = RelFro(a.K_final, mb.K_final);
  const bool same = a.K_final == b.K_final && a.P_final == b.P_final;
  Report(7, "model-free noiseless", err <= kModelFreeTol && same,
         "relative gain error " + Fmt("%.2e", err) + ", repeat run " +
             (same ? "identical" : "differs"));
}

void Ac8() {
  const StochasticPlant g = GoldenScalar().WithNoise(3.0);
  const DesignConfig dc = Design(2.0);
  const GainPair init = InitialGainSearch(g, 2.0);
  const Matrix p_star = SolveGareOracle(g, 2.0);
  const Matrix k_star = OuterStep(g, p_star);
  std::vector<double> gain, cost;
  bool finite = true;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SimulationConfig sc;
    sc.seed = seed;
    sc.horizon = 10.0;
    try {
      const IterationTrace t = RunModelFree(KnownWeightsOf(g), Simulate(g, init, sc), dc, init);
      gain.push_back(RelFro(t.K_final, k_star));
      cost.push_back(RelFro(t.P_final, p_star));
    } catch (const std::exception&) {
      finite = false;
    }
  }
  for (double x : gain) finite = finite && std::isfinite(x) && x > 0.0;
  for (double x : cost) finite = finite && std::isfinite(x) && x > 0.0;
  if (!finite || gain.size() != 20) {
    Report(8, "model-free noisy", false, "non-finite or failed run");
    return;
  }
  const auto [gmin, gmax] = std::minmax_element(gain.begin(), gain.end());
  const auto [cmin, cmax] = std::minmax_element(cost.begin(), cost.end());
  const double gspread = *gmax / *gmin, cspread = *cmax / *cmin;
  const double gmed = Median(gain), cmed = Median(cost);
  Report(8, "model-free noisy",
         gspread <= kSeedSpread && cspread <= kSeedSpread && gmed >= kTensMin &&
             gmed < kTensMax && cmed >= kTensMin && cmed < kTensMax,
         "golden plant, sigma 3, 20 seeds: gain error median " + Fmt("%.1f%%", 100 * gmed) +
             " (" + Fmt("%.1f", 100 * *gmin) + Fmt("-%.1f%%", 100 * *gmax) + ", spread " +
             Fmt("%.2f", gspread) + "x), cost error median " + Fmt("%.1f%%", 100 * cmed) +
             " (" + Fmt("%.1f", 100 * *cmin) + Fmt("-%.1f%%", 100 * *cmax) + ", spread " +
             Fmt("%.2f", cspread) + "x)");
}

void Ac9() {
  const StochasticPlant g = GoldenScalar();
  const DesignConfig dc = Design(2.0);
  IssSweepConfig s;
  s.seeds = 20;
  const IssSweepResult res = RunIssSweep(g, dc, s);
  const GainPair init = InitialGainSearch(g, 2.0);
  const IterationTrace exact = RunDoubleLoop(g, dc, init);
  const InexactRun zero = RunInexactOuter(g, dc, {PerturbTarget::kOuter, 0.0, 1}, init,
                                          SolveGareOracle(g, 2.0));
  bool identical = zero.trace.outer.size() == exact.outer.size();
  for (std::size_t p = 0; identical && p < exact.outer.size(); ++p) {
    identical = zero.trace.outer[p].K == exact.outer[p].K &&
                zero.trace.outer[p].P == exact.outer[p].P;
  }
  const ISSReport& r = res.report;
  std::string plateaus;
  for (double x : r.plateau_mean) plateaus += Fmt(" %.3e", x);
  Report(9, "ISS plateau scaling",
         r.monotone && std::abs(r.slope - kSlope) <= kSlopeBand && identical,
         "plateaus" + plateaus + ", slope " + Fmt("%.3f", r.slope) + ", zero magnitude " +
             (identical ? "bit-identical" : "differs"));
}

void Ac10() {
  bool pass = true;
  std::string detail;
  for (const std::string& name : {"double-pendulum", "triple-pendulum"}) {
    const StochasticPlant plant = BuiltinPlant(name);
    const DesignConfig dc = Design(5.0, 1e-6);
    const GainPair init = InitialGainSearch(plant, 5.0);
    NpgConfig nc;
    nc.gamma = 5.0;
    nc.tol = 1e-6;
    std::vector<double> pi, npg;
    bool converged = true;
    for (int rep = 0; rep < 21; ++rep) {
      pi.push_back(Seconds([&] { converged &= RunDoubleLoop(plant, dc, init).converged; }));
      npg.push_back(Seconds([&] { converged &= RunNpg(plant, nc, init.K).converged; }));
    }
    const double ratio = Median(pi) / Median(npg);
    pass = pass && converged && ratio <= kSpeedRatio;
    if (!detail.empty()) detail += "; ";
    detail += name + " PI " + Fmt("%.3f ms", 1e3 * Median(pi)) + " vs NPG " +
              Fmt("%.3f ms", 1e3 * Median(npg)) + " (ratio " + Fmt("%.2f", ratio) + ")";
  }
  Report(10, "baseline ordering", pass, detail);
}

void Ac11(const std::vector<CorpusRun>& runs) {
  NpgConfig lqr;
  lqr.eta = 0.5;
  const IterationTrace s = RunNpg(GoldenScalar(), lqr, Matrix::Constant(1, 1, 3.0));
  const double lqr_err = std::abs(s.K_final(0, 0) - (1 + std::sqrt(2.0)));
  double worst = 0.0;
  int failed = 0;
  for (const CorpusRun& r : runs) {
    NpgConfig nc;
    nc.gamma = r.entry.gamma;
    try {
      const GainPair init = InitialGainSearch(r.entry.plant, r.entry.gamma);
      const IterationTrace t = RunNpg(r.entry.plant, nc, init.K);
      if (!t.converged) ++failed;
      worst = std::max(worst, (t.K_final - r.trace.K_final).norm());
    } catch (const std::exception&) {
      ++failed;
    }
  }
  Report(11, "NPG correctness",
         s.converged && lqr_err <= kNpgLqrTol && failed == 0 && worst <= kNpgGainTol,
         "scalar LQR error " + Fmt("%.2e", lqr_err) + ", corpus max |K_NPG - K_PI|_F " +
             Fmt("%.2e", worst) + ", " + std::to_string(failed) + " failed");
}

int Main() {
  Ac1();
  std::vector<CorpusRun> runs;
  const double corpus_seconds = Seconds([&] {
    for (test::CorpusEntry& e : test::Corpus(kCorpusSize)) {
      CorpusRun r{std::move(e), {}, {}};
      r.trace = RunDoubleLoop(r.entry.plant, Design(r.entry.gamma));
      r.p_star = SolveGareOracle(r.entry.plant, r.entry.gamma);
      runs.push_back(std::move(r));
    }
  });
  Ac2(runs, corpus_seconds);
  Ac3(runs);
  Ac4(runs);
  Ac5(runs);
  Ac6();
  Ac7();
  Ac8();
  Ac9();
  Ac10();
  Ac11(runs);
  int failed = 0;
  for (const Line& l : lines) failed += l.pass ? 0 : 1;
  std::printf("%d of %zu criteria passed\n", static_cast<int>(lines.size()) - failed,
              lines.size());
  return failed == 0 ? 0 : 1;
}

}  // namespace
}  // namespace mixedpo

int main() {
  try {
    return mixedpo::Main();
  } catch (const std::exception& e) {
    std::printf("acceptance run aborted: %s\n", e.what());
    return 2;
  }
}
