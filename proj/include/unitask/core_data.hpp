#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <vector>

namespace unitask {

using SampleId = std::uint64_t;
using ChunkId = std::uint64_t;
using WorkerId = std::uint32_t;
using FeatureIndex = std::uint32_t;

struct Feature {
  FeatureIndex index = 0;
  double value = 0.0;

  bool operator==(const Feature&) const = default;
};

// One training sample. Feature indices are strictly increasing.
struct Sample {
  SampleId id = 0;
  std::vector<Feature> features;
  double label = 0.0;

  double squared_norm() const;
  double dot(std::span<const double> weights) const;
  // weights += scale * x
  void add_scaled_to(double scale, std::span<double> weights) const;

  bool operator==(const Sample&) const = default;
};

// Byte accounting used for chunk capacity. This is the in-memory payload
// only: framing and ids added by the wire format are not counted.
namespace layout {
inline constexpr std::size_t kIndexBytes = 4;
inline constexpr std::size_t kValueBytes = 8;
inline constexpr std::size_t kLabelBytes = 8;
inline constexpr std::size_t kStateBytes = 8;
}  // namespace layout

enum class StateLayout { None, Dual };

std::size_t sample_byte_size(const Sample& sample, StateLayout state = StateLayout::None);

// A movable container of samples together with their per-sample solver state.
struct DataChunk {
  ChunkId id = 0;
  std::vector<Sample> samples;
  // Empty, or one dual variable per sample.
  std::vector<double> dual_state;

  std::size_t size() const { return samples.size(); }
  bool has_state() const { return !samples.empty() && dual_state.size() == samples.size(); }
  std::size_t byte_size() const;
  void init_dual_state() { dual_state.assign(samples.size(), 0.0); }

  bool operator==(const DataChunk&) const = default;
};

// Greedy sequential packing after a seeded shuffle. Chunk ids are dense from 0.
// A sample larger than the capacity gets a chunk of its own.
std::vector<DataChunk> partition_into_chunks(std::span<const Sample> dataset,
                                             std::size_t capacity_bytes, std::uint64_t seed,
                                             StateLayout state = StateLayout::None);

struct ChunkMove {
  ChunkId chunk = 0;
  WorkerId from = 0;
  WorkerId to = 0;

  bool operator==(const ChunkMove&) const = default;
};

// Total mapping chunk -> owning worker, plus the set of registered workers
// (a worker may own nothing).
class ChunkAssignment {
 public:
  void add_worker(WorkerId worker);
  // The worker must not own any chunk.
  void remove_worker(WorkerId worker);
  void assign(ChunkId chunk, WorkerId worker);

  bool has_worker(WorkerId worker) const { return workers_.contains(worker); }
  bool has_chunk(ChunkId chunk) const { return owner_.contains(chunk); }
  WorkerId owner(ChunkId chunk) const;
  std::vector<ChunkId> chunks_of(WorkerId worker) const;
  std::size_t chunk_count(WorkerId worker) const;

  const std::set<WorkerId>& workers() const { return workers_; }
  const std::map<ChunkId, WorkerId>& owners() const { return owner_; }

  bool operator==(const ChunkAssignment&) const = default;

 private:
  std::map<ChunkId, WorkerId> owner_;
  std::set<WorkerId> workers_;
};

enum class OwnershipPhase { TaskOwned, SchedulerOwned };

// Chunk contents may change only while tasks own them; chunk placement may
// change only while the scheduler owns them.
class OwnershipContract {
 public:
  OwnershipPhase phase() const { return phase_; }
  void begin_iteration();
  void end_iteration();
  void require(OwnershipPhase needed, const char* operation) const;

 private:
  OwnershipPhase phase_ = OwnershipPhase::SchedulerOwned;
};

ChunkAssignment apply_moves(const ChunkAssignment& assignment, std::span<const ChunkMove> moves,
                            OwnershipPhase phase);

// chunk id -> number of samples
using ChunkSizes = std::map<ChunkId, std::size_t>;

ChunkSizes chunk_sample_counts(std::span<const DataChunk> chunks);

std::size_t worker_sample_count(const ChunkAssignment& assignment, const ChunkSizes& sizes,
                                WorkerId worker);

struct Model {
  std::vector<double> weights;
  std::uint64_t iteration = 0;

  bool all_finite() const;
  bool operator==(const Model&) const = default;
};

// Largest feature index + 1 over the dataset.
std::size_t dimension_of(std::span<const Sample> dataset);

}  // namespace unitask
