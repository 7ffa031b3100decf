#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace unitask {

enum class ErrorCode {
  EmptyDataset,
  ContractViolation,
  InvalidMove,
  UnknownWorker,
  StateMissing,
  InsufficientSamples,
  EmptySet,
  NoWork,
  IterationFailed,
  NoHistory,
  NoWorkersLeft,
  TooLarge,
  UnknownNode,
  WorkerUnavailable,
  ParseError,
  IoError,
  ConfigError,
  ProtocolError,
};

std::string_view to_string(ErrorCode code);

// All library failures surface as this type; `code()` identifies the kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace unitask
