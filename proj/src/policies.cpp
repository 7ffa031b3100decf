#include "unitask/policies.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <string>

#include "unitask/error.hpp"
#include "unitask/random.hpp"

namespace unitask {

void WorkerProfile::observe(double runtime, std::size_t samples) {
  if (samples == 0) return;
  runtime_history.push_back(runtime);
  per_sample_history.push_back(runtime / static_cast<double>(samples));
  while (runtime_history.size() > window) runtime_history.pop_front();
  while (per_sample_history.size() > window) per_sample_history.pop_front();
}

double WorkerProfile::per_sample_time() const {
  if (per_sample_history.empty()) {
    throw Error(ErrorCode::NoHistory, "worker " + std::to_string(worker) + " has not been observed");
  }
  return median({per_sample_history.begin(), per_sample_history.end()});
}

std::size_t RebalanceConfig::moves_per_round(std::size_t chunks, std::size_t workers) const {
  if (max_moves_per_round) return std::max<std::size_t>(1, *max_moves_per_round);
  const std::size_t denom = 10 * std::max<std::size_t>(workers, 1);
  return std::max<std::size_t>(1, (chunks + denom - 1) / denom);
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::NoHistory, "median of nothing");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

double estimate_per_sample_time(const WorkerProfile& profile, std::size_t samples_per_iteration) {
  if (profile.runtime_history.empty()) {
    throw Error(ErrorCode::NoHistory, "worker " + std::to_string(profile.worker) + " has not been observed");
  }
  if (samples_per_iteration == 0) throw Error(ErrorCode::NoWork, "zero samples per iteration");
  return median({profile.runtime_history.begin(), profile.runtime_history.end()}) /
         static_cast<double>(samples_per_iteration);
}

std::vector<ChunkMove> plan_rebalance(std::span<const WorkerProfile> profiles, const ChunkAssignment& assignment,
                                      const ChunkSizes& sizes, const RebalanceConfig& config) {
  struct State {
    WorkerId id;
    double per_sample;
    double samples;
    std::set<ChunkId> chunks;
    double runtime() const { return per_sample * samples; }
  };

  std::map<WorkerId, double> per_sample;
  for (const auto& p : profiles) per_sample[p.worker] = p.per_sample_time();

  std::vector<State> workers;
  for (WorkerId w : assignment.workers()) {
    auto it = per_sample.find(w);
    if (it == per_sample.end()) throw Error(ErrorCode::NoHistory, "worker " + std::to_string(w) + " is not profiled");
    workers.push_back({w, it->second, 0.0, {}});
  }
  if (workers.size() < 2 || assignment.owners().empty()) return {};

  std::map<WorkerId, std::size_t> slot;
  for (std::size_t i = 0; i < workers.size(); ++i) slot[workers[i].id] = i;
  double total_samples = 0.0;
  for (const auto& [chunk, owner] : assignment.owners()) {
    auto& w = workers[slot.at(owner)];
    const auto size_it = sizes.find(chunk);
    const double n = size_it == sizes.end() ? 0.0 : static_cast<double>(size_it->second);
    w.samples += n;
    w.chunks.insert(chunk);
    total_samples += n;
  }

  const double average_chunk = total_samples / static_cast<double>(assignment.owners().size());
  const double fastest = std::min_element(workers.begin(), workers.end(), [](const State& a, const State& b) {
                           return a.per_sample < b.per_sample;
                         })->per_sample;
  const double threshold = average_chunk * fastest;
  const std::size_t budget = config.moves_per_round(assignment.owners().size(), workers.size());

  std::vector<ChunkMove> moves;
  while (moves.size() < budget) {
    // workers are sorted by id, so strict comparisons break ties toward lower ids
    std::size_t slow = 0;
    std::size_t fast = 0;
    for (std::size_t i = 1; i < workers.size(); ++i) {
      if (workers[i].runtime() > workers[slow].runtime()) slow = i;
      if (workers[i].runtime() < workers[fast].runtime()) fast = i;
    }
    State& from = workers[slow];
    State& to = workers[fast];
    const double spread = from.runtime() - to.runtime();
    if (slow == fast || spread < threshold) break;

    // Largest-id chunk whose move lowers the maximum and narrows the pair.
    std::optional<ChunkId> pick;
    for (auto it = from.chunks.rbegin(); it != from.chunks.rend(); ++it) {
      const double c = static_cast<double>(sizes.at(*it));
      const bool lowers_max = to.runtime() + c * to.per_sample < from.runtime();
      const bool narrows = c * (from.per_sample + to.per_sample) < 2.0 * spread;
      if (c > 0.0 && lowers_max && narrows) {
        pick = *it;
        break;
      }
    }
    if (!pick) break;
    const double c = static_cast<double>(sizes.at(*pick));
    from.chunks.erase(*pick);
    from.samples -= c;
    to.chunks.insert(*pick);
    to.samples += c;
    moves.push_back({*pick, from.id, to.id});
  }
  return moves;
}

std::vector<ChunkMove> plan_scale_out(std::span<const WorkerId> new_workers, const ChunkAssignment& assignment,
                                      const ChunkSizes& sizes, std::uint64_t seed) {
  if (new_workers.empty()) return {};
  std::set<WorkerId> fresh(new_workers.begin(), new_workers.end());
  for (WorkerId w : fresh) {
    if (!assignment.has_worker(w)) throw Error(ErrorCode::UnknownWorker, "worker " + std::to_string(w));
    if (assignment.chunk_count(w) != 0) {
      throw Error(ErrorCode::InvalidMove, "new worker " + std::to_string(w) + " already owns chunks");
    }
  }

  auto size_of = [&](ChunkId c) {
    auto it = sizes.find(c);
    return it == sizes.end() ? 0.0 : static_cast<double>(it->second);
  };

  double total = 0.0;
  for (const auto& [chunk, owner] : assignment.owners()) total += size_of(chunk);
  const double target = total / static_cast<double>(assignment.workers().size());

  struct Donation {
    ChunkId chunk;
    WorkerId from;
  };
  std::vector<Donation> pool;
  for (WorkerId w : assignment.workers()) {
    if (fresh.contains(w)) continue;
    std::vector<ChunkId> chunks = assignment.chunks_of(w);
    Rng rng(derive_seed(seed, w));
    std::shuffle(chunks.begin(), chunks.end(), rng);
    double owned = 0.0;
    for (ChunkId c : chunks) owned += size_of(c);
    for (ChunkId c : chunks) {
      const double n = size_of(c);
      if (owned - target > 0.5 * n && n > 0.0) {
        pool.push_back({c, w});
        owned -= n;
      }
    }
  }

  // Interleave donors so each new worker receives chunks from many old ones.
  std::map<WorkerId, std::vector<Donation>> by_donor;
  for (const auto& d : pool) by_donor[d.from].push_back(d);
  std::vector<Donation> interleaved;
  for (std::size_t round = 0; interleaved.size() < pool.size(); ++round) {
    for (const auto& [donor, list] : by_donor) {
      if (round < list.size()) interleaved.push_back(list[round]);
    }
  }

  std::map<WorkerId, double> received;
  for (WorkerId w : fresh) received[w] = 0.0;
  std::vector<ChunkMove> moves;
  for (const auto& d : interleaved) {
    auto dest = std::min_element(received.begin(), received.end(),
                                 [](const auto& a, const auto& b) { return a.second < b.second; });
    dest->second += size_of(d.chunk);
    moves.push_back({d.chunk, d.from, dest->first});
  }
  return moves;
}

std::vector<ChunkMove> plan_scale_in(std::span<const WorkerId> removed, const ChunkAssignment& assignment) {
  if (removed.empty()) return {};
  std::set<WorkerId> leaving(removed.begin(), removed.end());
  for (WorkerId w : leaving) {
    if (!assignment.has_worker(w)) throw Error(ErrorCode::UnknownWorker, "worker " + std::to_string(w));
  }
  std::vector<WorkerId> remaining;
  for (WorkerId w : assignment.workers()) {
    if (!leaving.contains(w)) remaining.push_back(w);
  }
  if (remaining.empty()) throw Error(ErrorCode::NoWorkersLeft, "cannot remove every worker");

  std::vector<ChunkMove> moves;
  std::size_t next = 0;
  for (const auto& [chunk, owner] : assignment.owners()) {
    if (!leaving.contains(owner)) continue;
    moves.push_back({chunk, owner, remaining[next]});
    next = (next + 1) % remaining.size();
  }
  return moves;
}

}  // namespace unitask
