#include "unitask/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <numeric>
#include <optional>
#include <set>

#include "unitask/error.hpp"
#include "unitask/projection.hpp"
#include "unitask/random.hpp"

namespace unitask {

namespace {

constexpr std::uint64_t kPlacementStream = 0x504c4143;  // initial chunk placement
constexpr std::uint64_t kScaleOutStream = 0x5343414c;
constexpr std::uint64_t kMicroSplitStream = 0x4d494352;

}  // namespace

void TrainerConfig::validate() const {
  hp.validate();
  if (mode == ExecutionMode::MicroTasks && micro_tasks == 0) {
    throw Error(ErrorCode::ConfigError, "micro-task mode needs K >= 1");
  }
  if (!(max_epochs >= 0.0)) throw Error(ErrorCode::ConfigError, "max_epochs must be non-negative");
  if (chunk_capacity_bytes == 0) throw Error(ErrorCode::ConfigError, "chunk capacity must be positive");
  if (rebalance_config.history_window == 0) throw Error(ErrorCode::ConfigError, "history window I must be >= 1");
}

bool IterationRecord::same_trajectory(const IterationRecord& o) const {
  return iteration == o.iteration && epoch_progress == o.epoch_progress && metric == o.metric &&
         virtual_time == o.virtual_time && data_parallelism == o.data_parallelism && worker_ids == o.worker_ids &&
         per_worker_runtime == o.per_worker_runtime && per_worker_chunks == o.per_worker_chunks;
}

std::vector<double> merge_updates(std::span<const LocalUpdate> updates, std::size_t total_processed) {
  if (updates.empty()) throw Error(ErrorCode::NoWork, "no updates to merge");
  if (total_processed == 0) throw Error(ErrorCode::NoWork, "no samples were processed");
  const std::size_t d = updates.front().delta_weights.size();
  std::vector<double> merged(d, 0.0);
  for (const auto& u : updates) {
    if (u.delta_weights.size() != d) throw Error(ErrorCode::ProtocolError, "update dimensions differ");
    const double weight = static_cast<double>(u.samples_processed) / static_cast<double>(total_processed);
    for (std::size_t j = 0; j < d; ++j) merged[j] += weight * u.delta_weights[j];
  }
  return merged;
}

Trainer::Trainer(TrainerConfig config, Scenario scenario, std::vector<Sample> dataset, std::vector<Sample> test_set)
    : config_(std::move(config)),
      scenario_(std::move(scenario)),
      dataset_(std::move(dataset)),
      test_set_(std::move(test_set)) {
  config_.validate();
  scenario_.validate();
  if (dataset_.empty()) throw Error(ErrorCode::EmptyDataset, "training needs at least one sample");

  dimension_ = std::max(dimension_of(dataset_), dimension_of(test_set_));
  model_.weights.assign(dimension_, 0.0);
  nodes_ = scenario_.initial_nodes;

  const bool hinge = config_.hp.loss == Loss::Hinge;
  const StateLayout layout = hinge ? StateLayout::Dual : StateLayout::None;
  const double n = static_cast<double>(dataset_.size());
  per_sample_cost_ = hinge ? scenario_.total_work / n
                           : scenario_.total_work /
                                 static_cast<double>(kReferenceTasks * config_.hp.H * config_.hp.L);

  std::map<WorkerId, std::vector<DataChunk>> placement;
  if (config_.mode == ExecutionMode::UniTasks) {
    auto chunks = partition_into_chunks(dataset_, config_.chunk_capacity_bytes, config_.seed, layout);
    std::vector<std::size_t> order(chunks.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(config_.seed, kPlacementStream));
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<WorkerId> ids;
    for (const auto& node : nodes_) ids.push_back(node.id);
    std::sort(ids.begin(), ids.end());
    for (WorkerId id : ids) {
      assignment_.add_worker(id);
      placement[id];
    }
    for (std::size_t i = 0; i < order.size(); ++i) {
      const WorkerId owner = ids[i % ids.size()];
      assignment_.assign(chunks[order[i]].id, owner);
      placement[owner].push_back(std::move(chunks[order[i]]));
    }
  } else {
    // K fixed task partitions of (near) equal size, each packed into chunks.
    const std::size_t tasks = config_.micro_tasks;
    std::vector<std::size_t> order(dataset_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(config_.seed, kMicroSplitStream));
    std::shuffle(order.begin(), order.end(), rng);
    ChunkId next_id = 0;
    for (std::size_t t = 0; t < tasks; ++t) {
      const auto id = static_cast<WorkerId>(t);
      assignment_.add_worker(id);
      placement[id];
      const std::size_t begin = t * order.size() / tasks;
      const std::size_t end = (t + 1) * order.size() / tasks;
      if (begin == end) continue;
      std::vector<Sample> part;
      for (std::size_t i = begin; i < end; ++i) part.push_back(dataset_[order[i]]);
      auto chunks = partition_into_chunks(part, config_.chunk_capacity_bytes, derive_seed(config_.seed, t), layout);
      for (auto& c : chunks) {
        c.id = next_id++;
        assignment_.assign(c.id, id);
        placement[id].push_back(std::move(c));
      }
    }
  }

  for (auto& [id, chunks] : placement) {
    for (const auto& c : chunks) sizes_[c.id] = c.size();
    spawn(id);
    request<Ack>(*workers_.at(id), AddChunks{std::move(chunks)});
  }
}

Trainer::~Trainer() {
  for (auto& [id, handle] : workers_) handle->shutdown();
}

void Trainer::spawn(WorkerId id) {
  workers_[id] = spawn_worker(id, config_.transport);
  request<Ack>(*workers_[id], BroadcastModel{model_});
  if (config_.mode == ExecutionMode::UniTasks) {
    profiles_.emplace(id, WorkerProfile(id, config_.rebalance_config.history_window));
  }
}

WorkerHandle& Trainer::worker(WorkerId id) {
  auto it = workers_.find(id);
  if (it == workers_.end()) throw Error(ErrorCode::UnknownWorker, "worker " + std::to_string(id));
  return *it->second;
}

double Trainer::lambda() const {
  return *config_.hp.resolved(dataset_.size(), 1).lambda;
}

double Trainer::speed_of(WorkerId id) const {
  for (const auto& node : nodes_) {
    if (node.id == id) return node.speed;
  }
  return 1.0;
}

double Trainer::iteration_time(const std::vector<double>& runtimes, std::size_t processed, std::size_t tasks) const {
  if (config_.mode == ExecutionMode::UniTasks) {
    return runtimes.empty() ? 0.0 : *std::max_element(runtimes.begin(), runtimes.end());
  }
  // Equal tasks scheduled in waves over the live nodes.
  const double task_work = static_cast<double>(processed) / static_cast<double>(tasks) * per_sample_cost_;
  std::vector<double> speeds;
  for (const auto& node : nodes_) speeds.push_back(node.speed);
  const bool homogeneous = std::all_of(speeds.begin(), speeds.end(), [&](double s) { return s == speeds.front(); });
  if (homogeneous) {
    return microtask_iteration_time<double>(tasks, speeds.size(), task_work * static_cast<double>(tasks)) /
           speeds.front();
  }
  return microtask_makespan<double>(tasks, speeds, task_work);
}

IterationRecord Trainer::run_iteration() {
  const auto wall_start = std::chrono::steady_clock::now();
  contract_.begin_iteration();

  std::vector<WorkerId> participants;
  std::map<WorkerId, std::size_t> owned;
  for (const auto& [id, handle] : workers_) {
    owned[id] = worker_sample_count(assignment_, sizes_, id);
    if (owned[id] > 0) participants.push_back(id);
  }
  const std::size_t tasks = participants.size();
  const std::size_t n = dataset_.size();

  HyperParams hp = config_.hp.resolved(n, tasks);
  if (hp.loss == Loss::Logistic) hp.base_lr = effective_lr(config_.hp.base_lr, tasks);

  std::vector<LocalUpdate> updates;
  try {
    std::vector<Message> requests;
    for (WorkerId id : participants) {
      StartIteration start{iteration_, derive_seed(config_.seed, iteration_, id), hp, n, hp.H};
      if (hp.loss == Loss::Logistic && config_.mode == ExecutionMode::UniTasks) {
        // per-worker quota proportional to the owned share of the data
        const double share = static_cast<double>(owned[id]) * static_cast<double>(tasks) / static_cast<double>(n);
        start.hp.H = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(hp.H) * share)));
      }
      requests.emplace_back(std::move(start));
    }
    if (config_.parallel_dispatch) {
      std::vector<std::future<IterationFinished>> pending;
      for (std::size_t i = 0; i < participants.size(); ++i) {
        pending.push_back(std::async(std::launch::async, [this, &requests, &participants, i] {
          return request<IterationFinished>(*workers_.at(participants[i]), requests[i]);
        }));
      }
      for (auto& f : pending) updates.push_back(f.get().update);
    } else {
      for (std::size_t i = 0; i < participants.size(); ++i) {
        updates.push_back(request<IterationFinished>(*workers_.at(participants[i]), requests[i]).update);
      }
    }
  } catch (const Error& e) {
    throw Error(ErrorCode::IterationFailed, "iteration " + std::to_string(iteration_) + ": " + e.what());
  }

  std::size_t processed = 0;
  for (const auto& u : updates) processed += u.samples_processed;
  const std::vector<double> delta = merge_updates(updates, processed);

  for (std::size_t i = 0; i < participants.size(); ++i) {
    auto& handle = *workers_.at(participants[i]);
    if (hp.loss == Loss::Hinge) {
      const double weight = static_cast<double>(updates[i].samples_processed) / static_cast<double>(processed);
      request<Ack>(handle, CommitDuals{weight});
    }
    request<Ack>(handle, EndIteration{});
  }
  contract_.end_iteration();

  for (std::size_t j = 0; j < delta.size(); ++j) model_.weights[j] += delta[j];
  ++model_.iteration;
  if (!model_.all_finite()) throw Error(ErrorCode::IterationFailed, "model diverged to non-finite weights");
  for (auto& [id, handle] : workers_) request<Ack>(*handle, BroadcastModel{model_});

  IterationRecord record;
  record.iteration = iteration_;
  record.data_parallelism = tasks;
  if (hp.loss == Loss::Hinge) {
    GapTerms terms;
    terms.alpha_yx.assign(dimension_, 0.0);
    for (auto& [id, handle] : workers_) terms.merge(request<GapTermsReply>(*handle, QueryGapTerms{}).terms);
    record.metric = duality_gap_from_terms(terms, model_.weights, *hp.lambda, n);
  } else {
    record.metric = evaluate(model_, test_set_.empty() ? dataset_ : test_set_, Loss::Logistic).accuracy;
  }

  std::map<WorkerId, std::size_t> processed_by;
  for (const auto& u : updates) processed_by[u.worker] = u.samples_processed;
  for (const auto& [id, handle] : workers_) {
    const double work = static_cast<double>(processed_by[id]) * per_sample_cost_;
    const double runtime = config_.mode == ExecutionMode::UniTasks ? work / speed_of(id) : work;
    record.worker_ids.push_back(id);
    record.per_worker_runtime.push_back(runtime);
    record.per_worker_chunks.push_back(assignment_.chunk_count(id));
    if (config_.mode == ExecutionMode::UniTasks) profiles_.at(id).observe(runtime, processed_by[id]);
  }

  clock_.advance(iteration_time(record.per_worker_runtime, processed, tasks));
  processed_total_ += processed;
  record.epoch_progress = static_cast<double>(processed_total_) / static_cast<double>(n);
  record.virtual_time = clock_.now();
  record.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  ++iteration_;
  return record;
}

void Trainer::transfer(const std::vector<ChunkMove>& moves) {
  if (moves.empty()) return;
  ChunkAssignment next = apply_moves(assignment_, moves, contract_.phase());

  std::map<WorkerId, std::vector<ChunkId>> outgoing;
  for (const auto& [chunk, owner] : assignment_.owners()) {
    if (next.owner(chunk) != owner) outgoing[owner].push_back(chunk);
  }
  std::map<WorkerId, std::vector<DataChunk>> incoming;
  for (auto& [source, ids] : outgoing) {
    auto payload = request<ChunksPayload>(worker(source), RemoveChunks{ids});
    for (auto& c : payload.chunks) {
      const WorkerId dest = next.owner(c.id);
      incoming[dest].push_back(std::move(c));
    }
  }
  for (auto& [dest, chunks] : incoming) request<Ack>(worker(dest), AddChunks{std::move(chunks)});
  assignment_ = std::move(next);
}

void Trainer::between_iterations() {
  contract_.require(OwnershipPhase::SchedulerOwned, "between_iterations");
  ScenarioStep step = advance_scenario(scenario_, cursor_, clock_, nodes_);
  nodes_ = std::move(step.live);
  if (config_.mode == ExecutionMode::MicroTasks) return;

  for (const auto& event : step.fired) {
    if (const auto* add = std::get_if<AddNodes>(&event.action)) {
      std::vector<WorkerId> fresh;
      for (const auto& node : add->nodes) {
        assignment_.add_worker(node.id);
        spawn(node.id);
        fresh.push_back(node.id);
      }
      transfer(plan_scale_out(fresh, assignment_, sizes_, derive_seed(config_.seed, kScaleOutStream, iteration_)));
    } else {
      const auto& removed = std::get<RemoveNodes>(event.action).nodes;
      transfer(plan_scale_in(removed, assignment_));
      for (WorkerId id : removed) {
        assignment_.remove_worker(id);
        workers_.at(id)->shutdown();
        workers_.erase(id);
        profiles_.erase(id);
      }
    }
  }

  if (!config_.rebalance) return;
  std::vector<WorkerProfile> profiles;
  std::optional<double> fastest;
  for (const auto& [id, profile] : profiles_) {
    if (profile.profiled()) {
      const double p = profile.per_sample_time();
      fastest = fastest ? std::min(*fastest, p) : p;
    } else if (worker_sample_count(assignment_, sizes_, id) > 0) {
      return;  // owns data but has not run yet
    }
  }
  if (!fastest) return;
  for (const auto& [id, profile] : profiles_) {
    profiles.push_back(profile);
    // an idle worker is assumed to be as fast as the fastest observed one
    if (!profile.profiled()) profiles.back().observe(*fastest, 1);
  }
  transfer(plan_rebalance(profiles, assignment_, sizes_, config_.rebalance_config));
}

bool Trainer::converged(const IterationRecord& record) {
  if (config_.hp.loss == Loss::Hinge) return record.metric <= config_.convergence_target;
  if (record.metric >= config_.convergence_target) return true;
  if (record.metric > best_accuracy_) {
    best_accuracy_ = record.metric;
    since_best_ = 0;
    return false;
  }
  ++since_best_;
  return config_.plateau_window > 0 && since_best_ >= config_.plateau_window;
}

std::vector<IterationRecord> Trainer::run() {
  std::vector<IterationRecord> records;
  double epochs = 0.0;
  while (epochs < config_.max_epochs &&
         (config_.max_iterations == 0 || records.size() < config_.max_iterations)) {
    records.push_back(run_iteration());
    epochs = records.back().epoch_progress;
    if (converged(records.back())) break;
    between_iterations();
  }
  return records;
}

std::vector<DataChunk> Trainer::snapshot_chunks() {
  std::vector<DataChunk> all;
  for (auto& [id, handle] : workers_) {
    auto payload = request<ChunksPayload>(*handle, FetchChunks{});
    for (auto& c : payload.chunks) all.push_back(std::move(c));
  }
  std::sort(all.begin(), all.end(), [](const DataChunk& a, const DataChunk& b) { return a.id < b.id; });
  return all;
}

std::vector<IterationRecord> run_training(const TrainerConfig& config, const Scenario& scenario,
                                          std::span<const Sample> dataset, std::span<const Sample> test_set) {
  if (config.max_epochs <= 0.0) return {};
  Trainer trainer(config, scenario, {dataset.begin(), dataset.end()}, {test_set.begin(), test_set.end()});
  return trainer.run();
}

std::vector<IterationRecord> emulate_microtasks(const TrainerConfig& config, std::span<const Sample> dataset,
                                                std::size_t nodes) {
  TrainerConfig micro = config;
  micro.mode = ExecutionMode::MicroTasks;
  return run_training(micro, static_scenario(nodes), dataset);
}

}  // namespace unitask
