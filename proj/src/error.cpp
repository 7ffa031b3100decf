#include "unitask/error.hpp"

namespace unitask {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::ContractViolation: return "ContractViolation";
    case ErrorCode::InvalidMove: return "InvalidMove";
    case ErrorCode::UnknownWorker: return "UnknownWorker";
    case ErrorCode::StateMissing: return "StateMissing";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::NoWork: return "NoWork";
    case ErrorCode::IterationFailed: return "IterationFailed";
    case ErrorCode::NoHistory: return "NoHistory";
    case ErrorCode::NoWorkersLeft: return "NoWorkersLeft";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::WorkerUnavailable: return "WorkerUnavailable";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::ProtocolError: return "ProtocolError";
  }
  return "Unknown";
}

}  // namespace unitask
