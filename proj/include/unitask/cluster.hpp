#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "unitask/core_data.hpp"

namespace unitask {

using NodeId = WorkerId;

struct NodeSpec {
  NodeId id = 0;
  double speed = 1.0;  // work units per time unit; 1.0 is the reference node

  bool operator==(const NodeSpec&) const = default;
};

struct AddNodes {
  std::vector<NodeSpec> nodes;
  bool operator==(const AddNodes&) const = default;
};

struct RemoveNodes {
  std::vector<NodeId> nodes;
  bool operator==(const RemoveNodes&) const = default;
};

struct ScenarioEvent {
  double time = 0.0;
  std::variant<AddNodes, RemoveNodes> action;

  bool operator==(const ScenarioEvent&) const = default;
};

struct Scenario {
  std::vector<NodeSpec> initial_nodes;
  std::vector<ScenarioEvent> events;  // strictly increasing times
  double total_work = 16.0;           // one pass over the data on one reference node

  // Checks ordering, speeds, and that replaying the events never empties the
  // cluster or touches unknown nodes.
  void validate() const;
  // Node count after each event, starting with the initial count.
  std::vector<std::size_t> node_count_sequence() const;

  bool operator==(const Scenario&) const = default;
};

class VirtualClock {
 public:
  double now() const { return now_; }
  void advance(double dt);

 private:
  double now_ = 0.0;
};

// Index of the next unfired event.
struct ScenarioCursor {
  std::size_t next_event = 0;
};

struct ScenarioStep {
  std::vector<NodeSpec> live;
  std::vector<ScenarioEvent> fired;
};

// Fires every pending event with time <= clock.now(), in order, exactly once.
ScenarioStep advance_scenario(const Scenario& scenario, ScenarioCursor& cursor, const VirtualClock& clock,
                              std::span<const NodeSpec> live);

Scenario static_scenario(std::size_t nodes, double speed = 1.0);
// N_start nodes, then every `interval` time units add (step > 0) or remove
// (step < 0) |step| nodes until N_end is reached. Removal takes the highest ids.
Scenario ramp_scenario(std::size_t start, std::size_t end, std::size_t step, double interval);
// n_fast nodes at speed 1 followed by n_slow nodes at `slow_speed`.
Scenario heterogeneous_scenario(std::size_t n_fast, std::size_t n_slow, double slow_speed);

// static | scale-in | scale-out | hetero-8x8 | hetero-12x4
Scenario preset_scenario(std::string_view name);

}  // namespace unitask
