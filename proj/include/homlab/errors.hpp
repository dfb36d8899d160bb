#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace homlab {

enum class ErrorCode {
  MeanNotZero,
  ResolutionTooSmall,
  SolveFailed,
  FitFailed,
  TruncationTooSmall,
  NegativeRadicand,
  UnstableStep,
  GridMismatch,
  ZeroMode,
  InvalidConfig,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MeanNotZero: return "MeanNotZero";
    case ErrorCode::ResolutionTooSmall: return "ResolutionTooSmall";
    case ErrorCode::SolveFailed: return "SolveFailed";
    case ErrorCode::FitFailed: return "FitFailed";
    case ErrorCode::TruncationTooSmall: return "TruncationTooSmall";
    case ErrorCode::NegativeRadicand: return "NegativeRadicand";
    case ErrorCode::UnstableStep: return "UnstableStep";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::ZeroMode: return "ZeroMode";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

}  // namespace homlab
