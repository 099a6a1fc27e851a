#pragma once

#include <ostream>
#include <string>

#include <json.hpp>

#include "mixedpo/policy_iteration.h"

namespace mixedpo {

inline constexpr const char* kTraceHeader =
    "p,q,frobenius_K,trace_P,residual,hinf,hurwitz_ok,ratio,wall_ms";

// Inner rows carry q >= 0, the outer summary row of round p has q = -1.
// Unknown values and undefined ratios are empty fields. With
// `record_timing` false the wall_ms column is written as 0 so that
// repeated runs produce identical bytes.
void WriteTraceCsv(std::ostream& out, const IterationTrace& trace,
                   const ConvergenceCertificate* cert, bool record_timing);
void WriteTraceCsvFile(const std::string& path, const IterationTrace& trace,
                       const ConvergenceCertificate* cert, bool record_timing);

nlohmann::json CertificateToJson(const ConvergenceCertificate& cert);

// Final gains and cost, convergence flag and per-round gain steps.
nlohmann::json TraceSummaryJson(const IterationTrace& trace);

// Shortest round-trip decimal form.
std::string FormatDouble(double x);

// Pretty-printed JSON with a trailing newline.
void WriteJsonFile(const std::string& path, const nlohmann::json& doc);

}  // namespace mixedpo
