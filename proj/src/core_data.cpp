#include "unitask/core_data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "unitask/error.hpp"
#include "unitask/random.hpp"

namespace unitask {

double Sample::squared_norm() const {
  double sum = 0.0;
  for (const auto& f : features) sum += f.value * f.value;
  return sum;
}

double Sample::dot(std::span<const double> weights) const {
  double sum = 0.0;
  for (const auto& f : features) {
    if (f.index < weights.size()) sum += f.value * weights[f.index];
  }
  return sum;
}

void Sample::add_scaled_to(double scale, std::span<double> weights) const {
  for (const auto& f : features) weights[f.index] += scale * f.value;
}

std::size_t sample_byte_size(const Sample& sample, StateLayout state) {
  std::size_t bytes = sample.features.size() * (layout::kIndexBytes + layout::kValueBytes) +
                      layout::kLabelBytes;
  if (state == StateLayout::Dual) bytes += layout::kStateBytes;
  return bytes;
}

std::size_t DataChunk::byte_size() const {
  std::size_t bytes = 0;
  for (const auto& s : samples) bytes += sample_byte_size(s, StateLayout::None);
  return bytes + dual_state.size() * layout::kStateBytes;
}

std::vector<DataChunk> partition_into_chunks(std::span<const Sample> dataset,
                                             std::size_t capacity_bytes, std::uint64_t seed,
                                             StateLayout state) {
  if (dataset.empty()) throw Error(ErrorCode::EmptyDataset, "cannot partition an empty dataset");
  if (capacity_bytes == 0) throw Error(ErrorCode::ConfigError, "chunk capacity must be positive");

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<DataChunk> chunks;
  DataChunk current;
  std::size_t current_bytes = 0;
  auto flush = [&] {
    if (current.samples.empty()) return;
    current.id = chunks.size();
    if (state == StateLayout::Dual) current.init_dual_state();
    chunks.push_back(std::move(current));
    current = DataChunk{};
    current_bytes = 0;
  };

  for (std::size_t idx : order) {
    const Sample& sample = dataset[idx];
    const std::size_t bytes = sample_byte_size(sample, state);
    if (current_bytes + bytes > capacity_bytes) flush();
    current.samples.push_back(sample);
    current_bytes += bytes;
    // oversized singleton: close it immediately
    if (current_bytes > capacity_bytes) flush();
  }
  flush();
  return chunks;
}

void ChunkAssignment::add_worker(WorkerId worker) { workers_.insert(worker); }

void ChunkAssignment::remove_worker(WorkerId worker) {
  if (!has_worker(worker)) {
    throw Error(ErrorCode::UnknownWorker, "worker " + std::to_string(worker));
  }
  if (chunk_count(worker) != 0) {
    throw Error(ErrorCode::InvalidMove,
                "worker " + std::to_string(worker) + " still owns chunks");
  }
  workers_.erase(worker);
}

void ChunkAssignment::assign(ChunkId chunk, WorkerId worker) {
  if (!has_worker(worker)) {
    throw Error(ErrorCode::UnknownWorker, "worker " + std::to_string(worker));
  }
  owner_[chunk] = worker;
}

WorkerId ChunkAssignment::owner(ChunkId chunk) const {
  auto it = owner_.find(chunk);
  if (it == owner_.end()) throw Error(ErrorCode::InvalidMove, "unknown chunk " + std::to_string(chunk));
  return it->second;
}

std::vector<ChunkId> ChunkAssignment::chunks_of(WorkerId worker) const {
  std::vector<ChunkId> out;
  for (const auto& [chunk, owner] : owner_) {
    if (owner == worker) out.push_back(chunk);
  }
  return out;
}

std::size_t ChunkAssignment::chunk_count(WorkerId worker) const {
  return static_cast<std::size_t>(std::count_if(
      owner_.begin(), owner_.end(), [worker](const auto& kv) { return kv.second == worker; }));
}

void OwnershipContract::begin_iteration() {
  require(OwnershipPhase::SchedulerOwned, "begin_iteration");
  phase_ = OwnershipPhase::TaskOwned;
}

void OwnershipContract::end_iteration() {
  require(OwnershipPhase::TaskOwned, "end_iteration");
  phase_ = OwnershipPhase::SchedulerOwned;
}

void OwnershipContract::require(OwnershipPhase needed, const char* operation) const {
  if (phase_ != needed) {
    const char* held = phase_ == OwnershipPhase::TaskOwned ? "TaskOwned" : "SchedulerOwned";
    throw Error(ErrorCode::ContractViolation, std::string(operation) + " not allowed while " + held);
  }
}

ChunkAssignment apply_moves(const ChunkAssignment& assignment, std::span<const ChunkMove> moves,
                            OwnershipPhase phase) {
  if (phase != OwnershipPhase::SchedulerOwned) {
    throw Error(ErrorCode::ContractViolation, "chunk moves require SchedulerOwned phase");
  }
  ChunkAssignment next = assignment;
  for (const auto& move : moves) {
    if (!next.has_chunk(move.chunk) || next.owner(move.chunk) != move.from) {
      throw Error(ErrorCode::InvalidMove, "chunk " + std::to_string(move.chunk) +
                                              " is not owned by worker " +
                                              std::to_string(move.from));
    }
    if (!next.has_worker(move.to)) {
      throw Error(ErrorCode::InvalidMove, "destination worker " + std::to_string(move.to) +
                                              " is not registered");
    }
    next.assign(move.chunk, move.to);
  }
  return next;
}

ChunkSizes chunk_sample_counts(std::span<const DataChunk> chunks) {
  ChunkSizes sizes;
  for (const auto& c : chunks) sizes[c.id] = c.size();
  return sizes;
}

std::size_t worker_sample_count(const ChunkAssignment& assignment, const ChunkSizes& sizes,
                                WorkerId worker) {
  if (!assignment.has_worker(worker)) {
    throw Error(ErrorCode::UnknownWorker, "worker " + std::to_string(worker));
  }
  std::size_t total = 0;
  for (const auto& [chunk, owner] : assignment.owners()) {
    if (owner != worker) continue;
    auto it = sizes.find(chunk);
    if (it != sizes.end()) total += it->second;
  }
  return total;
}

bool Model::all_finite() const {
  return std::all_of(weights.begin(), weights.end(), [](double w) { return std::isfinite(w); });
}

std::size_t dimension_of(std::span<const Sample> dataset) {
  std::size_t d = 0;
  for (const auto& s : dataset) {
    if (!s.features.empty()) d = std::max<std::size_t>(d, s.features.back().index + std::size_t{1});
  }
  return d;
}

}  // namespace unitask
