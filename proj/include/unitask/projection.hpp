#pragma once

// Iteration-time projections for micro-tasks and uni-tasks, plus an exact
// exhaustive makespan oracle. Every routine is generic over the number type
// so the same code runs in double precision or exact rational arithmetic.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "unitask/error.hpp"
#include "unitask/rational.hpp"

namespace unitask {

inline std::int64_t floor_value(double v) { return static_cast<std::int64_t>(std::floor(v)); }
inline std::int64_t floor_value(const Rational& v) { return floor_of(v); }

template <typename Number>
Number from_count(std::size_t n) {
  return Number(static_cast<std::int64_t>(n));
}

inline std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

// K equal tasks on N equal nodes: ⌈K/N⌉ waves of work/K each.
template <typename Number>
Number microtask_iteration_time(std::size_t tasks, std::size_t nodes, Number total_work) {
  if (tasks == 0 || nodes == 0) throw Error(ErrorCode::ConfigError, "tasks and nodes must be positive");
  return total_work / from_count<Number>(tasks) * from_count<Number>(ceil_div(tasks, nodes));
}

template <typename Number>
struct HeteroSchedule {
  Number time{};
  std::size_t per_slow = 0;  // tasks on each slow node
  std::size_t per_fast = 0;  // tasks on each fast node
};

// Best schedule of K equal tasks when each slow node runs `per_slow` and each
// fast node `per_fast` tasks: minimizes max(i·factor, j)·work/K subject to
// n_slow·i + n_fast·j ≥ K. Ties go to the smaller i.
template <typename Number>
HeteroSchedule<Number> microtask_hetero_schedule(std::size_t tasks, std::size_t n_fast,
                                                 std::size_t n_slow, Number slow_factor,
                                                 Number total_work) {
  if (tasks == 0) throw Error(ErrorCode::ConfigError, "tasks must be positive");
  if (n_fast + n_slow == 0) throw Error(ErrorCode::ConfigError, "need at least one node");
  std::optional<HeteroSchedule<Number>> best;
  const std::size_t max_slow = n_slow == 0 ? 0 : ceil_div(tasks, n_slow);
  for (std::size_t i = 0; i <= max_slow; ++i) {
    const std::size_t covered = n_slow * i;
    std::size_t j = 0;
    if (covered < tasks) {
      if (n_fast == 0) continue;
      j = ceil_div(tasks - covered, n_fast);
    }
    const Number slow_load = from_count<Number>(i) * slow_factor;
    const Number fast_load = from_count<Number>(j);
    const Number load = slow_load < fast_load ? fast_load : slow_load;
    const Number time = load * total_work / from_count<Number>(tasks);
    if (!best || time < best->time) best = HeteroSchedule<Number>{time, i, j};
  }
  return *best;
}

template <typename Number>
Number microtask_hetero_time(std::size_t tasks, std::size_t n_fast, std::size_t n_slow,
                             Number slow_factor, Number total_work) {
  return microtask_hetero_schedule(tasks, n_fast, n_slow, slow_factor, total_work).time;
}

// Shortest schedule of K tasks of `task_work` each on nodes of arbitrary speed.
template <typename Number>
Number microtask_makespan(std::size_t tasks, std::span<const Number> speeds, Number task_work) {
  if (tasks == 0 || speeds.empty()) throw Error(ErrorCode::ConfigError, "tasks and speeds must be non-empty");
  std::vector<Number> unit;  // duration of one task per node
  for (const auto& s : speeds) unit.push_back(task_work / s);

  auto capacity = [&](const Number& horizon) {
    std::size_t total = 0;
    for (const auto& u : unit) {
      std::int64_t c = std::max<std::int64_t>(0, floor_value(horizon / u));
      while (from_count<Number>(static_cast<std::size_t>(c + 1)) * u <= horizon) ++c;
      while (c > 0 && horizon < from_count<Number>(static_cast<std::size_t>(c)) * u) --c;
      total += static_cast<std::size_t>(c);
    }
    return total;
  };

  std::vector<Number> candidates;
  for (const auto& u : unit) {
    for (std::size_t c = 1; c <= tasks; ++c) candidates.push_back(from_count<Number>(c) * u);
  }
  std::sort(candidates.begin(), candidates.end());
  // capacity is monotone in the horizon: binary search the first feasible candidate
  std::size_t lo = 0;
  std::size_t hi = candidates.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (capacity(candidates[mid]) >= tasks) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return candidates[lo];
}

// Perfect proportional balancing: work / Σ speeds.
template <typename Number>
Number unitask_balanced_time(std::span<const Number> speeds, Number total_work) {
  if (speeds.empty()) throw Error(ErrorCode::ConfigError, "speeds must be non-empty");
  Number sum = from_count<Number>(0);
  for (const auto& s : speeds) sum += s;
  return total_work / sum;
}

inline constexpr std::size_t kBruteForceMaxTasks = 12;
inline constexpr std::size_t kBruteForceMaxNodes = 8;
inline constexpr std::uint64_t kBruteForceMaxVisits = 200'000'000;

namespace detail {

template <typename Number>
struct MakespanSearch {
  std::vector<Number> works;  // sorted descending
  std::span<const Number> speeds;
  std::vector<Number> loads;
  std::optional<Number> best;
  std::uint64_t visits = 0;

  Number finish(std::size_t node) const { return loads[node] / speeds[node]; }

  void run(std::size_t task, const Number& current) {
    if (++visits > kBruteForceMaxVisits) {
      throw Error(ErrorCode::TooLarge, "makespan enumeration exceeded its budget");
    }
    if (task == works.size()) {
      if (!best || current < *best) best = current;
      return;
    }
    for (std::size_t node = 0; node < loads.size(); ++node) {
      // nodes with equal speed and equal load are interchangeable
      bool duplicate = false;
      for (std::size_t prev = 0; prev < node && !duplicate; ++prev) {
        duplicate = speeds[prev] == speeds[node] && loads[prev] == loads[node];
      }
      if (duplicate) continue;
      const Number saved = loads[node];
      loads[node] = saved + works[task];
      const Number t = finish(node);
      const Number next = current < t ? t : current;
      if (!best || next < *best) run(task + 1, next);
      loads[node] = saved;
    }
  }
};

}  // namespace detail

// Exact minimum over every task→node assignment of max_node(Σ work)/speed.
template <typename Number>
Number brute_force_min_makespan(std::span<const Number> task_works, std::span<const Number> speeds) {
  if (task_works.empty() || speeds.empty()) {
    throw Error(ErrorCode::ConfigError, "need at least one task and one node");
  }
  if (task_works.size() > kBruteForceMaxTasks && speeds.size() > kBruteForceMaxNodes) {
    throw Error(ErrorCode::TooLarge, std::to_string(task_works.size()) + " tasks on " +
                                         std::to_string(speeds.size()) + " nodes");
  }
  detail::MakespanSearch<Number> search;
  search.works.assign(task_works.begin(), task_works.end());
  std::sort(search.works.begin(), search.works.end(), [](const Number& a, const Number& b) { return b < a; });
  search.speeds = speeds;
  search.loads.assign(speeds.size(), from_count<Number>(0));
  search.run(0, from_count<Number>(0));
  return *search.best;
}

}  // namespace unitask
