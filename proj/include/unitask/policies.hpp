#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "unitask/core_data.hpp"

namespace unitask {

// Runtime observations of one worker over the last `window` iterations.
struct WorkerProfile {
  WorkerId worker = 0;
  std::size_t window = 5;
  std::deque<double> runtime_history;
  std::deque<double> per_sample_history;  // runtime / samples, same iterations

  WorkerProfile() = default;
  WorkerProfile(WorkerId id, std::size_t history_window) : worker(id), window(history_window) {}

  void observe(double runtime, std::size_t samples);
  bool profiled() const { return !per_sample_history.empty(); }
  // Median per-sample time over the window. Equals
  // estimate_per_sample_time() when the sample count did not change.
  double per_sample_time() const;
};

struct RebalanceConfig {
  std::size_t history_window = 5;                   // I
  std::optional<std::size_t> max_moves_per_round;  // unset: ⌈chunks / (10·workers)⌉

  std::size_t moves_per_round(std::size_t chunks, std::size_t workers) const;
};

double median(std::vector<double> values);

// median(runtime_history) / samples_per_iteration
double estimate_per_sample_time(const WorkerProfile& profile, std::size_t samples_per_iteration);

// Moves chunks from the predicted-slowest to the predicted-fastest workers.
// Returns an empty plan once the predicted runtime spread is below the time
// the fastest worker needs for one average chunk.
std::vector<ChunkMove> plan_rebalance(std::span<const WorkerProfile> profiles, const ChunkAssignment& assignment,
                                      const ChunkSizes& sizes, const RebalanceConfig& config);

// Seeded random chunks from existing workers so every worker ends near the
// same sample count. New workers must be registered and own nothing.
std::vector<ChunkMove> plan_scale_out(std::span<const WorkerId> new_workers, const ChunkAssignment& assignment,
                                      const ChunkSizes& sizes, std::uint64_t seed);

// Chunks of the removed workers (ascending id) dealt round-robin over the
// remaining workers (ascending id).
std::vector<ChunkMove> plan_scale_in(std::span<const WorkerId> removed, const ChunkAssignment& assignment);

}  // namespace unitask
