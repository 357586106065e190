#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ensk {

enum class Errc {
  DuplicateId,
  AccuracyOutOfRange,
  NonPositiveCost,
  EmptyPool,
  EmptyInput,
  TooLarge,
  NoFeasibleSubset,
  WeightsLengthMismatch,
  WeightsNotMonotone,
  DomainError,
  NoConvergence,
  TooFewSamples,
  TooFewInteriorPoints,
  InvalidMoments,
  DegenerateVariance,
  AllZero,
  InvalidArgument,
};

inline const char* errc_name(Errc code) {
  switch (code) {
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::AccuracyOutOfRange: return "AccuracyOutOfRange";
    case Errc::NonPositiveCost: return "NonPositiveCost";
    case Errc::EmptyPool: return "EmptyPool";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::TooLarge: return "TooLarge";
    case Errc::NoFeasibleSubset: return "NoFeasibleSubset";
    case Errc::WeightsLengthMismatch: return "WeightsLengthMismatch";
    case Errc::WeightsNotMonotone: return "WeightsNotMonotone";
    case Errc::DomainError: return "DomainError";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::TooFewInteriorPoints: return "TooFewInteriorPoints";
    case Errc::InvalidMoments: return "InvalidMoments";
    case Errc::DegenerateVariance: return "DegenerateVariance";
    case Errc::AllZero: return "AllZero";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Error";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

/// Raised by validate_pool; carries one entry per violated invariant.
class ValidationError : public Error {
 public:
  ValidationError(Errc first_code, std::vector<std::string> issues)
      : Error(first_code, join(issues)), issues_(std::move(issues)) {}

  const std::vector<std::string>& issues() const { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& issues) {
    std::string out;
    for (const auto& s : issues) {
      if (!out.empty()) out += "; ";
      out += s;
    }
    return out;
  }

  std::vector<std::string> issues_;
};

}  // namespace ensk
