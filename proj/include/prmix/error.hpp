#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace prmix {

enum class ErrorCode {
  TableInvalid,
  OrderCapExceeded,
  RepsUnavailable,
  ValidationFailed,
  NotConverged,
  NotGenerating,
  NTooSmall,
  RejectionBudgetExceeded,
  LengthMismatch,
  EmptyRow,
  RowSumMismatch,
  StateBudgetExceeded,
  StartNotInChain,
  SpaceTooLarge,
  IntegralityViolated,
  OutsideMDelta,
  DZero,
  NoValidDelta,
  DominationViolated,
  NoiseBoundViolated,
  PreconditionViolated,
  InvalidArgument,
  Io,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::TableInvalid: return "TableInvalid";
    case ErrorCode::OrderCapExceeded: return "OrderCapExceeded";
    case ErrorCode::RepsUnavailable: return "RepsUnavailable";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::NotGenerating: return "NotGenerating";
    case ErrorCode::NTooSmall: return "NTooSmall";
    case ErrorCode::RejectionBudgetExceeded: return "RejectionBudgetExceeded";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyRow: return "EmptyRow";
    case ErrorCode::RowSumMismatch: return "RowSumMismatch";
    case ErrorCode::StateBudgetExceeded: return "StateBudgetExceeded";
    case ErrorCode::StartNotInChain: return "StartNotInChain";
    case ErrorCode::SpaceTooLarge: return "SpaceTooLarge";
    case ErrorCode::IntegralityViolated: return "IntegralityViolated";
    case ErrorCode::OutsideMDelta: return "OutsideMDelta";
    case ErrorCode::DZero: return "DZero";
    case ErrorCode::NoValidDelta: return "NoValidDelta";
    case ErrorCode::DominationViolated: return "DominationViolated";
    case ErrorCode::NoiseBoundViolated: return "NoiseBoundViolated";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace prmix
