#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace crembo {

enum class ErrorCode {
  DimensionMismatch,
  NotPositiveDefinite,
  RankDeficient,
  InvalidDimensions,
  OutOfSearchBox,
  IndexOutOfRange,
  OutOfDomain,
  StaleState,
  BudgetExhausted,
  InvalidConfig,
  SchemaError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-checkable error category.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), message_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::InvalidDimensions: return "InvalidDimensions";
    case ErrorCode::OutOfSearchBox: return "OutOfSearchBox";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::StaleState: return "StaleState";
    case ErrorCode::BudgetExhausted: return "BudgetExhausted";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::SchemaError: return "SchemaError";
  }
  return "Unknown";
}

}  // namespace crembo
