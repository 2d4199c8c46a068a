#pragma once

#include <stdexcept>
#include <string>

namespace maskblur {

enum class ErrorCode {
  DimensionMismatch,
  NonIntegralFactor,
  KernelLargerThanImage,
  BudgetExceeded,
  NotSymmetric,
  OddLength,
  ZeroOuterTap,
  TooManyPatterns,
  UnsupportedFormat,
  NonIntegralDownscale,
  MissingResponse,
  AllDarkBackground,
  TrimTooLarge,
  RadiusOutOfBounds,
  ConfigInvalid,
  ChecksumMismatch,
  NumericFailure,
  IoFailure,
  InvalidArgument,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonIntegralFactor: return "NonIntegralFactor";
    case ErrorCode::KernelLargerThanImage: return "KernelLargerThanImage";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::OddLength: return "OddLength";
    case ErrorCode::ZeroOuterTap: return "ZeroOuterTap";
    case ErrorCode::TooManyPatterns: return "TooManyPatterns";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::NonIntegralDownscale: return "NonIntegralDownscale";
    case ErrorCode::MissingResponse: return "MissingResponse";
    case ErrorCode::AllDarkBackground: return "AllDarkBackground";
    case ErrorCode::TrimTooLarge: return "TrimTooLarge";
    case ErrorCode::RadiusOutOfBounds: return "RadiusOutOfBounds";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::NumericFailure: return "NumericFailure";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Library error type. `code()` identifies the failure class so callers can
/// branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace maskblur
