#include "mixedpo/trace_io.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "mixedpo/errors.h"
#include "mixedpo/plant.h"

namespace mixedpo {

namespace {

std::string Field(double x) { return std::isnan(x) ? std::string() : FormatDouble(x); }

nlohmann::json NumberOrNull(double x) {
  return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json();
}

}  // namespace

std::string FormatDouble(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

void WriteTraceCsv(std::ostream& out, const IterationTrace& trace,
                   const ConvergenceCertificate* cert, bool record_timing) {
  out << kTraceHeader << "\n";
  auto ms = [&](double v) { return record_timing ? FormatDouble(v) : std::string("0"); };
  for (std::size_t pi = 0; pi < trace.outer.size(); ++pi) {
    const OuterRecord& rec = trace.outer[pi];
    const std::string k_norm = FormatDouble(rec.K.norm());
    const std::string hinf = Field(rec.hinf);
    for (std::size_t qi = 0; qi < rec.inner.size(); ++qi) {
      const InnerRecord& in = rec.inner[qi];
      double ratio = kUnset;
      if (cert && pi < cert->inner_ratios.size() && qi > 0 &&
          qi - 1 < cert->inner_ratios[pi].size()) {
        ratio = cert->inner_ratios[pi][qi - 1];
      }
      out << rec.p << "," << in.q << "," << k_norm << "," << FormatDouble(in.P.trace())
          << "," << Field(in.residual) << "," << hinf << ","
          << (in.hurwitz_ok ? 1 : 0) << "," << Field(ratio) << "," << ms(in.wall_ms)
          << "\n";
    }
    double ratio = kUnset;
    if (cert && pi > 0 && pi - 1 < cert->outer_ratios.size()) {
      ratio = cert->outer_ratios[pi - 1];
    }
    out << rec.p << ",-1," << k_norm << "," << FormatDouble(rec.P.trace()) << ","
        << Field(rec.residual) << "," << hinf << "," << (rec.hurwitz_ok ? 1 : 0) << ","
        << Field(ratio) << "," << ms(rec.wall_ms) << "\n";
  }
}

void WriteTraceCsvFile(const std::string& path, const IterationTrace& trace,
                       const ConvergenceCertificate* cert, bool record_timing) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  WriteTraceCsv(out, trace, cert, record_timing);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

nlohmann::json CertificateToJson(const ConvergenceCertificate& cert) {
  nlohmann::json j;
  nlohmann::json outer = nlohmann::json::array();
  for (double r : cert.outer_ratios) outer.push_back(NumberOrNull(r));
  j["outer_ratios"] = outer;
  nlohmann::json inner = nlohmann::json::array();
  for (const auto& row : cert.inner_ratios) {
    nlohmann::json jr = nlohmann::json::array();
    for (double r : row) jr.push_back(NumberOrNull(r));
    inner.push_back(jr);
  }
  j["inner_ratios"] = inner;
  j["c_h"] = NumberOrNull(cert.c_h);
  nlohmann::json dk = nlohmann::json::array();
  for (double d : cert.d_K) dk.push_back(NumberOrNull(d));
  j["d_K"] = dk;
  j["flags"] = cert.flags;
  j["ok"] = cert.ok();
  return j;
}

nlohmann::json TraceSummaryJson(const IterationTrace& trace) {
  nlohmann::json j;
  j["method"] = trace.method;
  j["converged"] = trace.converged;
  j["outer_iterations"] = trace.outer.size();
  std::size_t inner_total = 0;
  nlohmann::json steps = nlohmann::json::array();
  nlohmann::json hinf = nlohmann::json::array();
  bool all_in_set = true;
  for (const OuterRecord& rec : trace.outer) {
    inner_total += rec.inner.size();
    steps.push_back(NumberOrNull(rec.gain_step));
    hinf.push_back(NumberOrNull(rec.hinf));
    all_in_set = all_in_set && rec.in_set;
  }
  j["inner_evaluations"] = inner_total;
  j["gain_steps"] = steps;
  j["hinf_per_iterate"] = hinf;
  j["all_iterates_in_set"] = all_in_set;
  if (trace.K_final.size() > 0) j["K"] = MatrixToJson(trace.K_final);
  if (trace.P_final.size() > 0) j["P"] = MatrixToJson(trace.P_final);
  if (trace.feasibility_lost) j["feasibility_lost_at"] = trace.feasibility_lost_at;
  return j;
}

void WriteJsonFile(const std::string& path, const nlohmann::json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << doc.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

}  // namespace mixedpo
