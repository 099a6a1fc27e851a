#include "mixedpo/robustness.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "mixedpo/errors.h"
#include "mixedpo/riccati.h"

namespace mixedpo {

namespace {

double Plateau(const std::vector<double>& errors) {
  return errors.empty() ? kUnset : errors.back();
}

struct Line {
  double slope = kUnset;
  double intercept = kUnset;
  double r2 = kUnset;
};

Line FitLine(const std::vector<double>& x, const std::vector<double>& y) {
  Line out;
  const std::size_t n = x.size();
  if (n < 2) return out;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) return out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  out.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return out;
}

const char* TargetName(PerturbTarget t) {
  return t == PerturbTarget::kOuter ? "outer" : "inner";
}

}  // namespace

Matrix PerturbGain(Eigen::Index rows, Eigen::Index cols, double magnitude,
                   std::uint64_t seed, int iteration) {
  if (!(magnitude >= 0.0)) throw Error(ErrorCode::kBadParams, "magnitude must be >= 0");
  Matrix out = Matrix::Zero(rows, cols);
  if (magnitude == 0.0 || out.size() == 0) return out;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(iteration)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  do {
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = normal(rng);
    }
  } while (out.norm() == 0.0);
  return out * (magnitude / out.norm());
}

InexactRun RunInexactOuter(const StochasticPlant& plant, const DesignConfig& config,
                           const PerturbationSpec& spec, const GainPair& init,
                           const CostMatrix& p_star) {
  DoubleLoopOptions options;
  options.stop_on_infeasible = true;
  const Eigen::Index m = plant.m(), n = plant.n();
  options.outer_perturbation = [&](int p) {
    return PerturbGain(m, n, spec.magnitude, spec.seed, p);
  };
  InexactRun run;
  run.trace = RunDoubleLoop(plant, config, init, options);
  run.feasibility_lost = run.trace.feasibility_lost;
  run.lost_at = run.trace.feasibility_lost_at;
  for (const OuterRecord& rec : run.trace.outer) {
    run.errors.push_back((rec.P - p_star).norm());
  }
  run.plateau = Plateau(run.errors);
  if (!run.trace.outer.empty()) {
    const Matrix k_star = OuterStep(plant, p_star);
    const OuterRecord& last = run.trace.outer.back();
    run.cost_error_rel = (last.P - p_star).norm() / p_star.norm();
    run.gain_error_rel = (last.K - k_star).norm() / std::max(k_star.norm(), 1e-300);
  }
  return run;
}

InexactRun RunInexactInner(const StochasticPlant& plant, const DesignConfig& config,
                           const PerturbationSpec& spec, const Matrix& k,
                           const CostMatrix& p_k) {
  config.Validate();
  const Eigen::Index v = plant.v(), n = plant.n();
  auto perturb = [&](int q) { return PerturbGain(v, n, spec.magnitude, spec.seed, q); };
  InnerResult inner =
      InnerLoop(plant, k, config.gamma, config.inner_max, config.tol, perturb, true);
  InexactRun run;
  run.trace.method = "inexact-inner";
  OuterRecord rec;
  rec.K = k;
  rec.P = inner.P;
  rec.K_next = k;
  rec.inner = inner.records;
  rec.inner_converged = inner.converged;
  for (const InnerRecord& in : rec.inner) {
    run.errors.push_back((in.P - p_k).norm());
    rec.wall_ms += in.wall_ms;
  }
  run.trace.total_ms = rec.wall_ms;
  run.trace.outer.push_back(std::move(rec));
  run.trace.K_final = k;
  run.trace.P_final = inner.P;
  run.trace.converged = inner.converged;
  run.feasibility_lost = inner.diverged_at >= 0;
  run.lost_at = inner.diverged_at;
  run.plateau = Plateau(run.errors);
  if (!inner.records.empty()) run.cost_error_rel = (inner.P - p_k).norm() / p_k.norm();
  return run;
}

EnvelopeFit FitEnvelope(const std::vector<double>& errors, double plateau) {
  EnvelopeFit fit;
  if (errors.empty() || !(errors.front() > 0.0)) return fit;
  const double floor = std::max(2.0 * (std::isnan(plateau) ? 0.0 : plateau),
                                1e-10 * errors.front());
  std::vector<double> t, y;
  for (std::size_t i = 0; i < errors.size() && errors[i] > floor; ++i) {
    t.push_back(static_cast<double>(i));
    y.push_back(std::log(errors[i]));
  }
  fit.points = static_cast<int>(t.size());
  if (t.size() < 3) return fit;
  const Line line = FitLine(t, y);
  fit.ratio = std::exp(line.slope);
  fit.r2 = line.r2;
  double lift = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    lift = std::max(lift, y[i] - (line.intercept + line.slope * t[i]));
  }
  fit.lift = std::exp(lift);
  return fit;
}

double LogLogSlope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  return FitLine(lx, ly).slope;
}

nlohmann::json ISSReportToJson(const ISSReport& r) {
  nlohmann::json j;
  j["target"] = TargetName(r.target);
  j["seeds"] = r.seeds;
  j["magnitudes"] = r.magnitudes;
  j["plateau_mean"] = r.plateau_mean;
  j["plateau_std"] = r.plateau_std;
  j["plateau_per_seed"] = r.plateau_per_seed;
  j["feasibility_lost"] = r.feasibility_lost;
  j["cost_error_pct"] = r.cost_error_pct;
  j["gain_error_pct"] = r.gain_error_pct;
  nlohmann::json env = nlohmann::json::array();
  for (const EnvelopeFit& e : r.envelopes) {
    nlohmann::json ej;
    ej["points"] = e.points;
    ej["ratio"] = std::isnan(e.ratio) ? nlohmann::json() : nlohmann::json(e.ratio);
    ej["r2"] = std::isnan(e.r2) ? nlohmann::json() : nlohmann::json(e.r2);
    ej["lift"] = std::isnan(e.lift) ? nlohmann::json() : nlohmann::json(e.lift);
    env.push_back(ej);
  }
  j["envelopes"] = env;
  j["monotone"] = r.monotone;
  j["slope"] = std::isnan(r.slope) ? nlohmann::json() : nlohmann::json(r.slope);
  return j;
}

IssSweepResult RunIssSweep(const StochasticPlant& plant, const DesignConfig& config,
                           const IssSweepConfig& sweep) {
  config.Validate();
  if (sweep.seeds <= 0) throw Error(ErrorCode::kValidation, "seeds must be > 0");
  for (double mag : sweep.magnitudes) {
    if (!(mag >= 0.0)) throw Error(ErrorCode::kValidation, "magnitudes must be >= 0");
  }
  const GainPair init = sweep.init ? *sweep.init : InitialGainSearch(plant, config.gamma);
  CostMatrix reference;
  if (sweep.target == PerturbTarget::kOuter) {
    reference = SolveGareOracle(plant, config.gamma);
  } else {
    const auto p_k = BoundedRealSolve(plant, init.K, config.gamma);
    if (!p_k) throw Error(ErrorCode::kInfeasibleStart, "fixed K is outside the set");
    reference = *p_k;
  }

  const std::size_t mags = sweep.magnitudes.size();
  const auto seeds = static_cast<std::size_t>(sweep.seeds);
  IssSweepResult result;
  result.runs.assign(mags, std::vector<InexactRun>(seeds));
  std::vector<std::string> failures(mags * seeds);

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t job = next++; job < mags * seeds; job = next++) {
      const std::size_t mi = job / seeds, si = job % seeds;
      PerturbationSpec spec{sweep.target, sweep.magnitudes[mi], sweep.base_seed + si};
      try {
        result.runs[mi][si] =
            sweep.target == PerturbTarget::kOuter
                ? RunInexactOuter(plant, config, spec, init, reference)
                : RunInexactInner(plant, config, spec, init.K, reference);
      } catch (const std::exception& e) {
        failures[job] = e.what();
      }
    }
  };
  unsigned threads = sweep.threads > 0 ? static_cast<unsigned>(sweep.threads)
                                       : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, mags * seeds));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const std::string& f : failures) {
    if (!f.empty()) throw Error(ErrorCode::kNoConvergence, "ISS run failed: " + f);
  }

  ISSReport& rep = result.report;
  rep.target = sweep.target;
  rep.magnitudes = sweep.magnitudes;
  rep.seeds = sweep.seeds;
  for (std::size_t mi = 0; mi < mags; ++mi) {
    std::vector<double> plateaus;
    int lost = 0;
    double cost = 0.0, gain = 0.0, mean = 0.0;
    std::size_t longest = 0;
    for (const InexactRun& run : result.runs[mi]) {
      plateaus.push_back(run.plateau);
      lost += run.feasibility_lost ? 1 : 0;
      cost += 100.0 * run.cost_error_rel;
      gain += 100.0 * run.gain_error_rel;
      mean += run.plateau;
      longest = std::max(longest, run.errors.size());
    }
    mean /= static_cast<double>(seeds);
    double var = 0.0;
    for (double p : plateaus) var += (p - mean) * (p - mean);
    // Seed-mean error trace, shorter runs held at their last value.
    std::vector<double> avg(longest, 0.0);
    for (const InexactRun& run : result.runs[mi]) {
      for (std::size_t t = 0; t < longest; ++t) {
        avg[t] += run.errors.empty() ? 0.0
                                     : run.errors[std::min(t, run.errors.size() - 1)];
      }
    }
    for (double& a : avg) a /= static_cast<double>(seeds);
    rep.plateau_mean.push_back(mean);
    rep.plateau_std.push_back(seeds > 1 ? std::sqrt(var / static_cast<double>(seeds - 1))
                                        : 0.0);
    rep.plateau_per_seed.push_back(plateaus);
    rep.feasibility_lost.push_back(lost);
    rep.cost_error_pct.push_back(cost / static_cast<double>(seeds));
    rep.gain_error_pct.push_back(gain / static_cast<double>(seeds));
    rep.envelopes.push_back(FitEnvelope(avg, mean));
  }
  rep.monotone = true;
  for (std::size_t i = 1; i < mags; ++i) {
    if (rep.magnitudes[i] >= rep.magnitudes[i - 1] &&
        rep.plateau_mean[i] < rep.plateau_mean[i - 1]) {
      rep.monotone = false;
    }
  }
  rep.slope = LogLogSlope(rep.magnitudes, rep.plateau_mean);
  return result;
}

}  // namespace mixedpo
