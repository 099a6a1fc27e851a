#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mixedpo {

// Failure categories raised across the toolkit. The CLI maps these onto
// process exit codes, so keep the list in sync with cli.cc.
enum class ErrorCode {
  kAsymmetricInput,
  kBadLength,
  kDimensionMismatch,
  kNonFinite,
  kNotHurwitz,
  kSolveFailure,
  kBadParams,
  kGenerationFailure,
  kInfeasible,
  kNoConvergence,
  kNotStabilizing,
  kSearchFailure,
  kInnerDivergence,
  kInfeasibleStart,
  kBlowup,
  kRankDeficient,
  kDivergenceDetected,
  kEvaluationInfeasible,
  kValidation,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mixedpo
