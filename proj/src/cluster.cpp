#include "unitask/cluster.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "unitask/error.hpp"

namespace unitask {

namespace {

void apply_event(const ScenarioEvent& event, std::vector<NodeSpec>& live) {
  if (const auto* add = std::get_if<AddNodes>(&event.action)) {
    for (const auto& node : add->nodes) {
      if (!(node.speed > 0.0)) throw Error(ErrorCode::ConfigError, "node speed must be positive");
      const bool exists = std::any_of(live.begin(), live.end(), [&](const NodeSpec& n) { return n.id == node.id; });
      if (exists) throw Error(ErrorCode::ConfigError, "node " + std::to_string(node.id) + " already live");
      live.push_back(node);
    }
    return;
  }
  const auto& remove = std::get<RemoveNodes>(event.action);
  for (NodeId id : remove.nodes) {
    auto it = std::find_if(live.begin(), live.end(), [&](const NodeSpec& n) { return n.id == id; });
    if (it == live.end()) throw Error(ErrorCode::UnknownNode, "node " + std::to_string(id));
    live.erase(it);
  }
  if (live.empty()) throw Error(ErrorCode::NoWorkersLeft, "scenario removes every node");
}

}  // namespace

void Scenario::validate() const {
  if (initial_nodes.empty()) throw Error(ErrorCode::ConfigError, "scenario needs at least one node");
  if (!(total_work > 0.0)) throw Error(ErrorCode::ConfigError, "total_work must be positive");
  std::set<NodeId> ids;
  for (const auto& n : initial_nodes) {
    if (!(n.speed > 0.0)) throw Error(ErrorCode::ConfigError, "node speed must be positive");
    if (!ids.insert(n.id).second) throw Error(ErrorCode::ConfigError, "duplicate node " + std::to_string(n.id));
  }
  for (std::size_t i = 1; i < events.size(); ++i) {
    if (!(events[i].time > events[i - 1].time)) {
      throw Error(ErrorCode::ConfigError, "event times must be strictly increasing");
    }
  }
  std::vector<NodeSpec> live = initial_nodes;
  for (const auto& e : events) apply_event(e, live);
}

std::vector<std::size_t> Scenario::node_count_sequence() const {
  std::vector<std::size_t> counts{initial_nodes.size()};
  std::vector<NodeSpec> live = initial_nodes;
  for (const auto& e : events) {
    apply_event(e, live);
    counts.push_back(live.size());
  }
  return counts;
}

void VirtualClock::advance(double dt) {
  if (!(dt >= 0.0)) throw Error(ErrorCode::ConfigError, "virtual clock cannot go backwards");
  now_ += dt;
}

ScenarioStep advance_scenario(const Scenario& scenario, ScenarioCursor& cursor, const VirtualClock& clock,
                              std::span<const NodeSpec> live) {
  ScenarioStep step;
  step.live.assign(live.begin(), live.end());
  while (cursor.next_event < scenario.events.size() &&
         scenario.events[cursor.next_event].time <= clock.now()) {
    const auto& event = scenario.events[cursor.next_event];
    apply_event(event, step.live);
    step.fired.push_back(event);
    ++cursor.next_event;
  }
  return step;
}

Scenario static_scenario(std::size_t nodes, double speed) {
  Scenario s;
  for (std::size_t i = 0; i < nodes; ++i) s.initial_nodes.push_back({static_cast<NodeId>(i), speed});
  return s;
}

Scenario ramp_scenario(std::size_t start, std::size_t end, std::size_t step, double interval) {
  if (start == 0 || end == 0 || step == 0) throw Error(ErrorCode::ConfigError, "ramp needs positive sizes");
  Scenario s = static_scenario(start);
  std::size_t count = start;
  double t = 0.0;
  while (count != end) {
    t += interval;
    ScenarioEvent event{t, AddNodes{}};
    if (end > count) {
      AddNodes add;
      const std::size_t n = std::min(step, end - count);
      for (std::size_t i = 0; i < n; ++i) add.nodes.push_back({static_cast<NodeId>(count + i), 1.0});
      count += n;
      event.action = std::move(add);
    } else {
      RemoveNodes remove;
      const std::size_t n = std::min(step, count - end);
      for (std::size_t i = 0; i < n; ++i) remove.nodes.push_back(static_cast<NodeId>(count - 1 - i));
      count -= n;
      event.action = std::move(remove);
    }
    s.events.push_back(std::move(event));
  }
  return s;
}

Scenario heterogeneous_scenario(std::size_t n_fast, std::size_t n_slow, double slow_speed) {
  Scenario s = static_scenario(n_fast + n_slow);
  for (std::size_t i = n_fast; i < n_fast + n_slow; ++i) s.initial_nodes[i].speed = slow_speed;
  return s;
}

Scenario preset_scenario(std::string_view name) {
  if (name == "static") return static_scenario(16);
  if (name == "scale-in") return ramp_scenario(16, 2, 2, 20.0);
  if (name == "scale-out") return ramp_scenario(2, 16, 2, 20.0);
  if (name == "hetero-8x8") return heterogeneous_scenario(8, 8, 1.0 / 1.5);
  if (name == "hetero-12x4") return heterogeneous_scenario(12, 4, 1.2 / 2.6);
  throw Error(ErrorCode::ConfigError, "unknown scenario preset '" + std::string(name) + "'");
}

}  // namespace unitask
