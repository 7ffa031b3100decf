#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "unitask/core_data.hpp"
#include "unitask/error.hpp"
#include "unitask/solvers.hpp"

namespace unitask {

struct StartIteration {
  std::uint64_t iteration = 0;
  std::uint64_t seed = 0;
  HyperParams hp;  // resolved; hp.base_lr is the step size to use
  std::uint64_t n_total = 0;
  std::uint64_t steps = 0;  // SCD steps; 0 = local sample count
  bool operator==(const StartIteration&) const = default;
};
struct IterationFinished {
  LocalUpdate update;
  bool operator==(const IterationFinished&) const = default;
};
struct BroadcastModel {
  Model model;
  bool operator==(const BroadcastModel&) const = default;
};
struct FetchModel {
  bool operator==(const FetchModel&) const = default;
};
struct ModelSnapshot {
  Model model;
  bool operator==(const ModelSnapshot&) const = default;
};
struct AddChunks {
  std::vector<DataChunk> chunks;
  bool operator==(const AddChunks&) const = default;
};
struct RemoveChunks {
  std::vector<ChunkId> chunks;
  bool operator==(const RemoveChunks&) const = default;
};
struct FetchChunks {
  bool operator==(const FetchChunks&) const = default;
};
struct ChunksPayload {
  std::vector<DataChunk> chunks;
  bool operator==(const ChunksPayload&) const = default;
};
// Scales this iteration's dual changes by the worker's merge weight.
struct CommitDuals {
  double scale = 1.0;
  bool operator==(const CommitDuals&) const = default;
};
struct EndIteration {
  bool operator==(const EndIteration&) const = default;
};
struct QueryGapTerms {
  bool operator==(const QueryGapTerms&) const = default;
};
struct GapTermsReply {
  GapTerms terms;
  bool operator==(const GapTermsReply&) const = default;
};
struct Ack {
  bool operator==(const Ack&) const = default;
};
struct Failure {
  ErrorCode code = ErrorCode::ProtocolError;
  std::string message;
  bool operator==(const Failure&) const = default;
};
struct Shutdown {
  bool operator==(const Shutdown&) const = default;
};

// The wire tag of each alternative is its index + 1.
using Message = std::variant<StartIteration, IterationFinished, BroadcastModel, FetchModel, ModelSnapshot,
                             AddChunks, RemoveChunks, FetchChunks, ChunksPayload, CommitDuals, EndIteration,
                             QueryGapTerms, GapTermsReply, Ack, Failure, Shutdown>;

std::uint16_t message_tag(const Message& message);

// 2-byte big-endian tag followed by the payload.
std::vector<std::uint8_t> encode_message(const Message& message);
Message decode_message(std::span<const std::uint8_t> bytes);

// encode_message() prefixed by its 4-byte big-endian length.
std::vector<std::uint8_t> frame_message(const Message& message);

// Standalone chunk encoding (same layout as inside AddChunks).
std::vector<std::uint8_t> encode_chunk(const DataChunk& chunk);
DataChunk decode_chunk(std::span<const std::uint8_t> bytes);

}  // namespace unitask
