#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "unitask/cluster.hpp"
#include "unitask/core_data.hpp"
#include "unitask/policies.hpp"
#include "unitask/solvers.hpp"
#include "unitask/worker.hpp"

namespace unitask {

enum class ExecutionMode { UniTasks, MicroTasks };

// A reference iteration of local SGD runs this many tasks of H·L samples, each
// taking total_work / kReferenceTasks time units on a reference node.
inline constexpr std::size_t kReferenceTasks = 16;

struct TrainerConfig {
  ExecutionMode mode = ExecutionMode::UniTasks;
  std::size_t micro_tasks = 16;  // K, fixed for the run in MicroTasks mode
  HyperParams hp;
  // Duality gap threshold (hinge) or accuracy target (logistic).
  double convergence_target = 1e-3;
  double max_epochs = 50.0;
  std::uint64_t seed = 1;
  std::size_t chunk_capacity_bytes = std::size_t{1} << 20;
  // Logistic only: stop after this many iterations without a new best accuracy (0 = off).
  std::size_t plateau_window = 10;
  bool rebalance = true;
  RebalanceConfig rebalance_config;
  TransportKind transport = TransportKind::InProcess;
  bool parallel_dispatch = false;
  std::size_t max_iterations = 0;  // 0 = unbounded

  void validate() const;
};

struct IterationRecord {
  std::uint64_t iteration = 0;
  double epoch_progress = 0.0;  // cumulative samples processed / n
  double metric = 0.0;          // duality gap or test accuracy
  double virtual_time = 0.0;    // cumulative, in time units
  std::size_t data_parallelism = 0;
  std::vector<WorkerId> worker_ids;
  std::vector<double> per_worker_runtime;
  std::vector<std::size_t> per_worker_chunks;
  double wall_seconds = 0.0;  // measured, not part of the trajectory

  // Everything except wall_seconds.
  bool same_trajectory(const IterationRecord& other) const;
};

// Σ_k (samples_k / total) · Δ_k
std::vector<double> merge_updates(std::span<const LocalUpdate> updates, std::size_t total_processed);

// Synchronous driver: broadcast, local solves, weighted merge, barrier. In
// UniTasks mode there is one worker per live node and data parallelism follows
// the node count; in MicroTasks mode K fixed task partitions are solved every
// iteration and the node roster only affects the projected iteration time.
class Trainer {
 public:
  Trainer(TrainerConfig config, Scenario scenario, std::vector<Sample> dataset, std::vector<Sample> test_set = {});
  ~Trainer();
  Trainer(const Trainer&) = delete;
  Trainer& operator=(const Trainer&) = delete;

  IterationRecord run_iteration();
  // Scenario events, then scaling and rebalancing policies.
  void between_iterations();
  std::vector<IterationRecord> run();
  bool converged(const IterationRecord& record);

  const Model& model() const { return model_; }
  const ChunkAssignment& assignment() const { return assignment_; }
  const ChunkSizes& chunk_sizes() const { return sizes_; }
  OwnershipPhase phase() const { return contract_.phase(); }
  const VirtualClock& clock() const { return clock_; }
  const std::vector<NodeSpec>& live_nodes() const { return nodes_; }
  std::size_t sample_count() const { return dataset_.size(); }
  double lambda() const;
  // Read-only copies of every chunk, gathered from the workers.
  std::vector<DataChunk> snapshot_chunks();
  WorkerHandle& worker(WorkerId id);

 private:
  void spawn(WorkerId id);
  void transfer(const std::vector<ChunkMove>& moves);
  double speed_of(WorkerId id) const;
  double iteration_time(const std::vector<double>& runtimes, std::size_t processed, std::size_t tasks) const;

  TrainerConfig config_;
  Scenario scenario_;
  std::vector<Sample> dataset_;
  std::vector<Sample> test_set_;
  std::size_t dimension_ = 0;
  double per_sample_cost_ = 0.0;

  std::map<WorkerId, std::unique_ptr<WorkerHandle>> workers_;
  std::vector<NodeSpec> nodes_;
  ChunkAssignment assignment_;
  ChunkSizes sizes_;
  OwnershipContract contract_;
  Model model_;
  VirtualClock clock_;
  ScenarioCursor cursor_;
  std::map<WorkerId, WorkerProfile> profiles_;

  std::uint64_t iteration_ = 0;
  std::size_t processed_total_ = 0;
  double best_accuracy_ = -1.0;
  std::size_t since_best_ = 0;
};

std::vector<IterationRecord> run_training(const TrainerConfig& config, const Scenario& scenario,
                                          std::span<const Sample> dataset, std::span<const Sample> test_set = {});

// MicroTasks(K) on a static cluster of `nodes` reference nodes.
std::vector<IterationRecord> emulate_microtasks(const TrainerConfig& config, std::span<const Sample> dataset,
                                                std::size_t nodes);

}  // namespace unitask
