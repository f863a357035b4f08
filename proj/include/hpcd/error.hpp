#ifndef HPCD_ERROR_HPP_
#define HPCD_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace hpcd {

enum class ErrorCode {
  InvalidConfig,
  PlatformUnsupported,
  PermissionDenied,
  NoSuchProcess,
  EventUnavailable,
  MalformedTrace,
  MissingHeader,
  InconsistentWidth,
  InvalidProfile,
  ClassTooSmall,
  TooFewRows,
  UnlabeledData,
  SingleClass,
  NonFiniteFeature,
  SchemaMismatch,
  MissingFeature,
  ConvergenceFailure,
  VersionMismatch,
  CorruptModel,
  EmptyMatrix,
  ClassAbsent,
  IoError,
};

constexpr std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::PlatformUnsupported: return "PlatformUnsupported";
    case ErrorCode::PermissionDenied: return "PermissionDenied";
    case ErrorCode::NoSuchProcess: return "NoSuchProcess";
    case ErrorCode::EventUnavailable: return "EventUnavailable";
    case ErrorCode::MalformedTrace: return "MalformedTrace";
    case ErrorCode::MissingHeader: return "MissingHeader";
    case ErrorCode::InconsistentWidth: return "InconsistentWidth";
    case ErrorCode::InvalidProfile: return "InvalidProfile";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::UnlabeledData: return "UnlabeledData";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::NonFiniteFeature: return "NonFiniteFeature";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::MissingFeature: return "MissingFeature";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptModel: return "CorruptModel";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::ClassAbsent: return "ClassAbsent";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Single exception type for the whole library; `code()` identifies the
/// failure kind so callers can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hpcd

#endif  // HPCD_ERROR_HPP_
