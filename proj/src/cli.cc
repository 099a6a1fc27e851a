#include "mixedpo/cli.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mixedpo/npg.h"
#include "mixedpo/plant.h"
#include "mixedpo/policy_iteration.h"
#include "mixedpo/riccati.h"
#include "mixedpo/robustness.h"
#include "mixedpo/sampling.h"
#include "mixedpo/trace_io.h"

namespace mixedpo {

namespace {

using nlohmann::json;

struct CommonOptions {
  std::string plant = "triple-pendulum";
  double gamma = 5.0;
  int outer_max = 20;
  int inner_max = 50;
  double tol = 1e-8;
  std::string out_dir;
  bool record_timing = false;
};

struct LearnOptions {
  double noise = -1.0;  // < 0: keep the plant's own intensity
  double dt = 1e-4;
  double horizon = 10.0;
  double interval = 0.02;
  std::uint64_t seed = 1;
  double r_u = -1.0;
  double r_w = -1.0;
  bool save_log = false;
  std::string load_log;
};

void AddCommon(CLI::App* sub, CommonOptions& o) {
  sub->add_option("--plant", o.plant,
                  "builtin plant (golden-scalar, double-pendulum, triple-pendulum) or JSON file")
      ->capture_default_str();
  sub->add_option("--gamma", o.gamma, "attenuation level")->capture_default_str();
  sub->add_option("--outer-max", o.outer_max, "outer iteration budget")->capture_default_str();
  sub->add_option("--inner-max", o.inner_max, "inner iteration budget")->capture_default_str();
  sub->add_option("--tol", o.tol, "stopping tolerance")->capture_default_str();
  sub->add_option("--out", o.out_dir, "output directory");
  sub->add_flag("--record-timing", o.record_timing,
                "write measured wall clock (output is then not byte-reproducible)");
}

void AddLearn(CLI::App* sub, LearnOptions& o) {
  sub->add_option("--noise", o.noise, "noise intensity sigma (W = sigma^2 I)");
  sub->add_option("--dt", o.dt, "integration step")->capture_default_str();
  sub->add_option("--horizon", o.horizon, "simulated time")->capture_default_str();
  sub->add_option("--interval", o.interval, "sampling interval")->capture_default_str();
  sub->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
  sub->add_option("--r-u", o.r_u, "input exploration norm (default 0.1 |K0|_F)");
  sub->add_option("--r-w", o.r_w, "disturbance exploration norm (default 0.1 |K0|_F)");
  sub->add_flag("--save-log", o.save_log, "write trajectory.csv");
  sub->add_option("--load-log", o.load_log, "reuse a saved trajectory instead of simulating");
}

DesignConfig ToDesign(const CommonOptions& o) {
  DesignConfig c;
  c.gamma = o.gamma;
  c.outer_max = o.outer_max;
  c.inner_max = o.inner_max;
  c.tol = o.tol;
  c.Validate();
  return c;
}

json DesignJson(const DesignConfig& c) {
  return {{"gamma", c.gamma},
          {"outer_max", c.outer_max},
          {"inner_max", c.inner_max},
          {"tol", c.tol}};
}

std::string PrepareOutDir(const CommonOptions& o) {
  const std::string dir = o.out_dir.empty() ? DefaultOutputDir() : o.out_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create output directory " + dir);
  return dir;
}

StochasticPlant LoadValidPlant(const std::string& source) {
  StochasticPlant plant = ResolvePlant(source);
  const ValidationReport rep = ValidateAssumptions(plant);
  if (!rep.ok()) {
    std::string msg = "plant fails standing assumptions:";
    for (const auto& f : rep.failures) msg += " " + f + ";";
    throw Error(ErrorCode::kValidation, msg);
  }
  return plant;
}

std::optional<CostMatrix> TryOracle(const StochasticPlant& plant, double gamma) {
  try {
    return SolveGareOracle(plant, gamma);
  } catch (const Error&) {
    return std::nullopt;
  }
}

double RelErr(const Matrix& a, const Matrix& ref) {
  return (a - ref).norm() / std::max(ref.norm(), 1e-300);
}

Matrix ParseInlineMatrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream rs(text);
  std::string row;
  while (std::getline(rs, row, ';')) {
    std::vector<double> vals;
    std::stringstream cs(row);
    std::string cell;
    while (std::getline(cs, cell, ',')) {
      char* end = nullptr;
      const double x = std::strtod(cell.c_str(), &end);
      if (cell.empty() || *end != '\0') {
        throw Error(ErrorCode::kValidation, "bad gain entry '" + cell + "'");
      }
      vals.push_back(x);
    }
    rows.push_back(vals);
  }
  json j = rows;
  return MatrixFromJson(j, "K");
}

Matrix ResolveGain(const std::string& spec, const StochasticPlant& plant, double gamma) {
  if (spec == "star") {
    return OuterStep(plant, SolveGareOracle(plant, gamma));
  }
  if (spec == "lqr") {
    return KleinmanLqr(plant.A(), plant.B(), plant.Q(), plant.R(), StabilizingGain(plant)).K;
  }
  if (spec == "zero") return Matrix::Zero(plant.m(), plant.n());
  if (spec == "init") return InitialGainSearch(plant, gamma).K;
  if (std::filesystem::exists(spec)) {
    std::ifstream in(spec);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kValidation, std::string("gain file: ") + e.what());
    }
    return MatrixFromJson(doc.is_object() && doc.contains("K") ? doc["K"] : doc, "K");
  }
  return ParseInlineMatrix(spec);
}

std::vector<double> ParseList(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    char* end = nullptr;
    const double x = std::strtod(cell.c_str(), &end);
    if (cell.empty() || *end != '\0') {
      throw Error(ErrorCode::kValidation, "bad list entry '" + cell + "'");
    }
    out.push_back(x);
  }
  return out;
}

std::vector<std::string> SplitNames(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty()) out.push_back(cell);
  }
  return out;
}

SimulationConfig ToSimulation(const LearnOptions& o) {
  SimulationConfig s;
  s.dt = o.dt;
  s.horizon = o.horizon;
  s.interval = o.interval;
  s.seed = o.seed;
  s.r_u = o.r_u;
  s.r_w = o.r_w;
  s.Validate();
  return s;
}

int CmdSolve(const CommonOptions& o, std::ostream& out) {
  const DesignConfig config = ToDesign(o);
  const StochasticPlant plant = LoadValidPlant(o.plant);
  const std::string dir = PrepareOutDir(o);
  IterationTrace trace = RunDoubleLoop(plant, config);
  AttachDiagnostics(trace, plant, config.gamma);
  const auto p_star = TryOracle(plant, config.gamma);
  std::optional<ConvergenceCertificate> cert;
  if (p_star) cert = Certify(trace, plant, config.gamma, *p_star);
  WriteTraceCsvFile(dir + "/trace.csv", trace, cert ? &*cert : nullptr, o.record_timing);

  json summary;
  summary["command"] = "solve";
  summary["plant"] = o.plant;
  summary["config"] = DesignJson(config);
  summary["result"] = TraceSummaryJson(trace);
  const ConstraintCheck final_check = InConstraintSet(plant, trace.K_final, config.gamma);
  summary["hinf_final"] = final_check.hinf;
  if (cert) {
    summary["certificate"] = CertificateToJson(*cert);
    summary["oracle_P_rel_error"] = RelErr(trace.P_final, *p_star);
  }
  if (o.record_timing) summary["wall_ms"] = trace.total_ms;
  WriteJsonFile(dir + "/summary.json", summary);

  out << "solve: " << (trace.converged ? "converged" : "not converged") << " after "
      << trace.outer.size() << " outer iterations; |T_zw|_inf = "
      << FormatDouble(final_check.hinf) << "; K = " << MatrixToJson(trace.K_final).dump()
      << "\n";
  if (!trace.converged) {
    throw Error(ErrorCode::kNoConvergence, "outer loop did not converge within budget");
  }
  return 0;
}

int CmdLearn(const CommonOptions& o, const LearnOptions& lo, std::ostream& out) {
  const DesignConfig config = ToDesign(o);
  const SimulationConfig sim = ToSimulation(lo);
  StochasticPlant plant = LoadValidPlant(o.plant);
  if (lo.noise >= 0.0) plant = plant.WithNoise(lo.noise);
  const std::string dir = PrepareOutDir(o);
  const GainPair init = InitialGainSearch(plant, config.gamma);
  const TrajectoryLog log =
      lo.load_log.empty() ? Simulate(plant, init, sim) : LoadTrajectoryCsv(lo.load_log);
  if (lo.save_log) SaveTrajectoryCsv(log, dir + "/trajectory.csv");

  const KnownWeights known = KnownWeightsOf(plant);
  const RankReport rank = RankCheck(
      Assemble(log.data, init.K, Matrix::Zero(plant.v(), plant.n()), known, config.gamma));
  json rank_json = {{"full_rank", rank.full_rank},
                    {"intervals", rank.rows},
                    {"unknowns", rank.columns},
                    {"required_block_count", rank.required_blocks},
                    {"required_printed_count", rank.required_printed},
                    {"condition", std::isfinite(rank.condition) ? json(rank.condition) : json()},
                    {"raw_condition",
                     std::isfinite(rank.raw_condition) ? json(rank.raw_condition) : json()}};
  if (!rank.full_rank) {
    WriteJsonFile(dir + "/summary.json", {{"command", "learn"}, {"rank", rank_json}});
    throw Error(ErrorCode::kRankDeficient,
                "rank check failed: " + std::to_string(rank.rows) + " intervals recorded, " +
                    std::to_string(rank.columns) + " required (printed count " +
                    std::to_string(rank.required_printed) + ")");
  }
  IterationTrace trace = RunModelFree(known, log, config, init);
  AttachDiagnostics(trace, plant, config.gamma);
  const auto p_star = TryOracle(plant, config.gamma);
  std::optional<ConvergenceCertificate> cert;
  if (p_star) cert = Certify(trace, plant, config.gamma, *p_star);
  WriteTraceCsvFile(dir + "/trace.csv", trace, cert ? &*cert : nullptr, o.record_timing);

  json summary;
  summary["command"] = "learn";
  summary["plant"] = o.plant;
  summary["config"] = DesignJson(config);
  summary["simulation"] = {{"dt", sim.dt},       {"horizon", sim.horizon},
                           {"interval", sim.interval}, {"seed", sim.seed},
                           {"noise_intensity", plant.noise_intensity()}};
  summary["rank"] = rank_json;
  summary["result"] = TraceSummaryJson(trace);
  if (p_star) {
    const Matrix k_star = OuterStep(plant, *p_star);
    summary["gain_error_rel"] = RelErr(trace.K_final, k_star);
    summary["cost_error_rel"] = RelErr(trace.P_final, *p_star);
  }
  if (o.record_timing) summary["wall_ms"] = trace.total_ms;
  WriteJsonFile(dir + "/summary.json", summary);
  out << "learn: " << trace.outer.size() << " outer iterations";
  if (p_star) {
    out << "; gain error " << FormatDouble(summary["gain_error_rel"].get<double>())
        << ", cost error " << FormatDouble(summary["cost_error_rel"].get<double>());
  }
  out << "\n";
  return 0;
}

int CmdNpg(const CommonOptions& o, double eta, int max_iter, bool lqr, std::ostream& out) {
  const DesignConfig config = ToDesign(o);
  const StochasticPlant plant = LoadValidPlant(o.plant);
  const std::string dir = PrepareOutDir(o);
  NpgConfig nc;
  nc.eta = eta;
  nc.max_iterations = max_iter;
  nc.tol = config.tol;
  nc.gamma = lqr ? std::numeric_limits<double>::infinity() : config.gamma;
  nc.Validate();
  const Matrix k0 = lqr ? StabilizingGain(plant) : InitialGainSearch(plant, config.gamma).K;
  IterationTrace trace = RunNpg(plant, nc, k0);
  if (!lqr) AttachDiagnostics(trace, plant, config.gamma);
  WriteTraceCsvFile(dir + "/trace.csv", trace, nullptr, o.record_timing);
  json summary;
  summary["command"] = "npg";
  summary["plant"] = o.plant;
  summary["gamma"] = lqr ? json("inf") : json(config.gamma);
  summary["eta"] = eta > 0.0 ? eta : 0.5 / SpectralNorm(plant.R());
  summary["result"] = TraceSummaryJson(trace);
  if (o.record_timing) summary["wall_ms"] = trace.total_ms;
  WriteJsonFile(dir + "/summary.json", summary);
  out << "npg: " << (trace.converged ? "converged" : "not converged") << " after "
      << trace.outer.size() << " iterations; K = " << MatrixToJson(trace.K_final).dump()
      << "\n";
  if (!trace.converged) {
    throw Error(ErrorCode::kNoConvergence, "NPG did not converge within budget");
  }
  return 0;
}

std::string CellStatus(const std::exception& e) {
  const auto* err = dynamic_cast<const Error*>(&e);
  if (err && err->code() == ErrorCode::kDivergenceDetected) return "diverged";
  std::string what = e.what();
  std::replace(what.begin(), what.end(), ',', ';');
  return "error: " + what;
}

int CmdBench(const CommonOptions& o, const LearnOptions& lo, const std::string& plants,
             double eta, std::ostream& out) {
  const DesignConfig config = ToDesign(o);
  const SimulationConfig sim = ToSimulation(lo);
  const std::string dir = PrepareOutDir(o);
  std::ofstream csv(dir + "/bench.csv", std::ios::binary);
  if (!csv) throw Error(ErrorCode::kIo, "cannot write bench.csv");
  const std::string header =
      "plant,pi_ms,pi_outer,pi_inner,pi_status,model_free_ms,model_free_outer,"
      "model_free_status,npg_ms,npg_iterations,npg_status,pi_over_npg,"
      "gain_gap_pi_npg";
  csv << header << "\n";
  out << header << "\n";
  for (const std::string& name : SplitNames(plants)) {
    std::string row = name;
    auto add = [&](const std::string& cell) { row += "," + cell; };
    std::optional<Matrix> k_pi, k_npg;
    double pi_ms = kUnset, npg_ms = kUnset;
    StochasticPlant plant;
    GainPair init;
    std::string setup_error;
    try {
      plant = LoadValidPlant(name);
      if (lo.noise >= 0.0) plant = plant.WithNoise(lo.noise);
      init = InitialGainSearch(plant, config.gamma);
    } catch (const std::exception& e) {
      setup_error = CellStatus(e);
    }
    if (!setup_error.empty()) {
      for (int i = 0; i < 12; ++i) add(i == 3 || i == 6 || i == 9 ? setup_error : "");
      csv << row << "\n";
      out << row << "\n";
      continue;
    }
    try {
      const IterationTrace t = RunDoubleLoop(plant, config, init);
      std::size_t inner = 0;
      for (const auto& r : t.outer) inner += r.inner.size();
      pi_ms = t.total_ms;
      k_pi = t.K_final;
      add(FormatDouble(t.total_ms));
      add(std::to_string(t.outer.size()));
      add(std::to_string(inner));
      add(t.converged ? "converged" : "budget");
    } catch (const std::exception& e) {
      add("");
      add("");
      add("");
      add(CellStatus(e));
    }
    try {
      const TrajectoryLog log = Simulate(plant, init, sim);
      const IterationTrace t = RunModelFree(KnownWeightsOf(plant), log, config, init);
      add(FormatDouble(t.total_ms));
      add(std::to_string(t.outer.size()));
      add(t.converged ? "converged" : "budget");
    } catch (const std::exception& e) {
      add("");
      add("");
      add(CellStatus(e));
    }
    try {
      NpgConfig nc;
      nc.eta = eta;
      nc.tol = config.tol;
      nc.gamma = config.gamma;
      const IterationTrace t = RunNpg(plant, nc, init.K);
      npg_ms = t.total_ms;
      k_npg = t.K_final;
      add(FormatDouble(t.total_ms));
      add(std::to_string(t.outer.size()));
      add(t.converged ? "converged" : "budget");
    } catch (const std::exception& e) {
      add("");
      add("");
      add(CellStatus(e));
    }
    add(k_pi && k_npg && npg_ms > 0.0 ? FormatDouble(pi_ms / npg_ms) : "");
    add(k_pi && k_npg ? FormatDouble((*k_pi - *k_npg).norm()) : "");
    csv << row << "\n";
    out << row << "\n";
  }
  return 0;
}

int CmdHinf(const CommonOptions& o, const std::string& gain, bool sweep, std::ostream& out) {
  if (!(o.gamma > 0.0)) throw Error(ErrorCode::kValidation, "gamma must be > 0");
  const StochasticPlant plant = LoadValidPlant(o.plant);
  const Matrix k = ResolveGain(gain, plant, o.gamma);
  if (k.rows() != plant.m() || k.cols() != plant.n()) {
    throw Error(ErrorCode::kValidation, "gain must be m x n");
  }
  const StateSpace ss = ClosedLoopTzw(plant, k);
  if (!IsHurwitz(ss.A).hurwitz) {
    throw Error(ErrorCode::kNotStabilizing, "A - B K is not Hurwitz");
  }
  const double h = HinfNorm(ss);
  out << "hinf " << FormatDouble(h) << "\n";
  out << "gamma " << FormatDouble(o.gamma) << " in_set " << (h < o.gamma ? 1 : 0) << "\n";
  if (sweep) out << "sweep " << FormatDouble(HinfFrequencySweep(ss)) << "\n";
  return 0;
}

int CmdIss(const CommonOptions& o, const std::string& magnitudes, int seeds,
           const std::string& target, std::uint64_t base_seed, int threads, bool traces,
           std::ostream& out) {
  const DesignConfig config = ToDesign(o);
  IssSweepConfig sweep;
  if (target == "outer") {
    sweep.target = PerturbTarget::kOuter;
  } else if (target == "inner") {
    sweep.target = PerturbTarget::kInner;
  } else {
    throw Error(ErrorCode::kValidation, "target must be outer or inner");
  }
  sweep.magnitudes = ParseList(magnitudes);
  if (sweep.magnitudes.empty()) throw Error(ErrorCode::kValidation, "no magnitudes");
  sweep.seeds = seeds;
  sweep.base_seed = base_seed;
  sweep.threads = threads;
  const StochasticPlant plant = LoadValidPlant(o.plant);
  const std::string dir = PrepareOutDir(o);
  const IssSweepResult res = RunIssSweep(plant, config, sweep);
  json doc;
  doc["command"] = "iss";
  doc["plant"] = o.plant;
  doc["config"] = DesignJson(config);
  doc["report"] = ISSReportToJson(res.report);
  WriteJsonFile(dir + "/iss_report.json", doc);
  if (traces) {
    for (std::size_t mi = 0; mi < res.runs.size(); ++mi) {
      for (std::size_t si = 0; si < res.runs[mi].size(); ++si) {
        WriteTraceCsvFile(dir + "/iss_" + target + "_m" + std::to_string(mi) + "_s" +
                              std::to_string(base_seed + si) + ".csv",
                          res.runs[mi][si].trace, nullptr, o.record_timing);
      }
    }
  }
  out << "magnitude,plateau_mean,plateau_std,feasibility_lost\n";
  const ISSReport& r = res.report;
  for (std::size_t i = 0; i < r.magnitudes.size(); ++i) {
    out << FormatDouble(r.magnitudes[i]) << "," << FormatDouble(r.plateau_mean[i]) << ","
        << FormatDouble(r.plateau_std[i]) << "," << r.feasibility_lost[i] << "\n";
  }
  out << "monotone " << (r.monotone ? 1 : 0) << " slope " << FormatDouble(r.slope) << "\n";
  return 0;
}

}  // namespace

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInfeasible:
    case ErrorCode::kInfeasibleStart:
    case ErrorCode::kSearchFailure:
    case ErrorCode::kEvaluationInfeasible:
    case ErrorCode::kNotStabilizing:
    case ErrorCode::kNotHurwitz:
      return 2;
    case ErrorCode::kRankDeficient:
      return 3;
    default:
      return 1;
  }
}

std::string DefaultOutputDir() {
  const char* env = std::getenv("MIXEDPO_OUTPUT_DIR");
  return env && *env ? std::string(env) : std::string("mixedpo_out");
}

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mixed H2/H-infinity policy optimization toolkit", "mixedpo"};
  app.require_subcommand(1);
  // Flags override file values; subcommand keys go under [solve], [learn], ...
  app.set_config("--config", "", "TOML/INI file with option defaults");
  CommonOptions common;
  LearnOptions learn;

  CLI::App* solve = app.add_subcommand("solve", "model-based double-loop policy iteration");
  AddCommon(solve, common);

  CLI::App* learn_cmd = app.add_subcommand("learn", "sampling-based policy iteration");
  AddCommon(learn_cmd, common);
  AddLearn(learn_cmd, learn);

  double eta = -1.0;
  int max_iter = 10000;
  bool lqr = false;
  CLI::App* npg = app.add_subcommand("npg", "natural policy gradient baseline");
  AddCommon(npg, common);
  npg->add_option("--eta", eta, "step size (default 1/(2|R|))");
  npg->add_option("--max-iter", max_iter, "iteration budget")->capture_default_str();
  npg->add_flag("--lqr", lqr, "drop the attenuation constraint (plain H2 cost)");

  std::string plants = "double-pendulum,triple-pendulum";
  CLI::App* bench = app.add_subcommand("bench", "timing table: PI, model-free, NPG");
  AddCommon(bench, common);
  AddLearn(bench, learn);
  bench->add_option("--plants", plants, "comma-separated corpus")->capture_default_str();
  bench->add_option("--eta", eta, "NPG step size");

  std::string gain = "star";
  bool sweep = false;
  CLI::App* hinf = app.add_subcommand("hinf", "H-infinity norm of T_zw(K)");
  AddCommon(hinf, common);
  hinf->add_option("--gain", gain,
                   "star | lqr | zero | init | JSON file | inline rows 'a,b;c,d'")
      ->capture_default_str();
  hinf->add_flag("--sweep", sweep, "also print the frequency-sweep lower bound");

  std::string magnitudes = "0.015,0.05,0.15";
  int seeds = 20;
  std::string target = "outer";
  std::uint64_t base_seed = 1;
  int threads = 0;
  bool traces = false;
  CLI::App* iss = app.add_subcommand("iss", "inexact-update (ISS) magnitude sweep");
  AddCommon(iss, common);
  iss->add_option("--magnitudes", magnitudes, "perturbation norms")->capture_default_str();
  iss->add_option("--seeds", seeds, "Monte-Carlo repetitions")->capture_default_str();
  iss->add_option("--target", target, "outer | inner")->capture_default_str();
  iss->add_option("--base-seed", base_seed, "first seed")->capture_default_str();
  iss->add_option("--threads", threads, "worker threads (0: all cores)");
  iss->add_flag("--traces", traces, "write per-seed trace CSVs");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (*solve) return CmdSolve(common, out);
    if (*learn_cmd) return CmdLearn(common, learn, out);
    if (*npg) return CmdNpg(common, eta, max_iter, lqr, out);
    if (*bench) return CmdBench(common, learn, plants, eta, out);
    if (*hinf) return CmdHinf(common, gain, sweep, out);
    if (*iss) {
      return CmdIss(common, magnitudes, seeds, target, base_seed, threads, traces, out);
    }
  } catch (const Error& e) {
    err << "error [" << ErrorCodeName(e.code()) << "]: " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace mixedpo
