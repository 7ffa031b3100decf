#include <doctest.h>

#include "helpers.hpp"
#include "unitask/cluster.hpp"

using namespace unitask;

TEST_CASE("scale-out preset grows by two every 20 units") {
  const Scenario s = preset_scenario("scale-out");
  CHECK(s.node_count_sequence() == std::vector<std::size_t>{2, 4, 6, 8, 10, 12, 14, 16});
  for (std::size_t i = 0; i < s.events.size(); ++i) CHECK(s.events[i].time == 20.0 * static_cast<double>(i + 1));
}

TEST_CASE("scale-in preset mirrors scale-out") {
  auto in = preset_scenario("scale-in").node_count_sequence();
  const auto out = preset_scenario("scale-out").node_count_sequence();
  std::reverse(in.begin(), in.end());
  CHECK(in == out);
}

TEST_CASE("heterogeneous presets") {
  const Scenario a = preset_scenario("hetero-8x8");
  REQUIRE(a.initial_nodes.size() == 16);
  CHECK(a.initial_nodes[7].speed == 1.0);
  CHECK(a.initial_nodes[8].speed == doctest::Approx(1.0 / 1.5));
  const Scenario b = preset_scenario("hetero-12x4");
  CHECK(b.initial_nodes[12].speed == doctest::Approx(1.2 / 2.6));
  CHECK(preset_scenario("static").initial_nodes.size() == 16);
  CHECK_ERROR_CODE(preset_scenario("bogus"), ErrorCode::ConfigError);
}

TEST_CASE("advance_scenario fires each event once, in order") {
  const Scenario s = preset_scenario("scale-out");
  ScenarioCursor cursor;
  VirtualClock clock;
  std::vector<NodeSpec> live = s.initial_nodes;
  std::size_t fired = 0;
  std::vector<std::size_t> counts{live.size()};
  for (int tick = 0; tick < 400; ++tick) {
    clock.advance(0.5);
    auto step = advance_scenario(s, cursor, clock, live);
    fired += step.fired.size();
    live = step.live;
    if (!step.fired.empty()) counts.push_back(live.size());
  }
  CHECK(fired == s.events.size());
  CHECK(counts == s.node_count_sequence());
}

TEST_CASE("a big clock jump fires several events at once") {
  const Scenario s = preset_scenario("scale-in");
  ScenarioCursor cursor;
  VirtualClock clock;
  clock.advance(45.0);
  const auto step = advance_scenario(s, cursor, clock, s.initial_nodes);
  CHECK(step.fired.size() == 2);
  CHECK(step.live.size() == 12);
  CHECK(cursor.next_event == 2);
}

TEST_CASE("no events, no change") {
  const Scenario s = static_scenario(3);
  ScenarioCursor cursor;
  VirtualClock clock;
  clock.advance(1000.0);
  const auto step = advance_scenario(s, cursor, clock, s.initial_nodes);
  CHECK(step.fired.empty());
  CHECK(step.live == s.initial_nodes);
}

TEST_CASE("scenario errors") {
  Scenario s = static_scenario(2);
  s.events.push_back({1.0, RemoveNodes{{7}}});
  ScenarioCursor cursor;
  VirtualClock clock;
  clock.advance(2.0);
  CHECK_ERROR_CODE(advance_scenario(s, cursor, clock, s.initial_nodes), ErrorCode::UnknownNode);
  CHECK_ERROR_CODE(s.validate(), ErrorCode::UnknownNode);

  Scenario empty = static_scenario(2);
  empty.events.push_back({1.0, RemoveNodes{{0, 1}}});
  CHECK_ERROR_CODE(empty.validate(), ErrorCode::NoWorkersLeft);

  Scenario unordered = static_scenario(2);
  unordered.events.push_back({2.0, AddNodes{{{5, 1.0}}}});
  unordered.events.push_back({2.0, AddNodes{{{6, 1.0}}}});
  CHECK_ERROR_CODE(unordered.validate(), ErrorCode::ConfigError);

  CHECK_ERROR_CODE(static_scenario(0).validate(), ErrorCode::ConfigError);
  CHECK_ERROR_CODE(static_scenario(1, 0.0).validate(), ErrorCode::ConfigError);
}

TEST_CASE("virtual clock is monotone") {
  VirtualClock clock;
  clock.advance(1.5);
  clock.advance(0.0);
  CHECK(clock.now() == 1.5);
  CHECK_ERROR_CODE(clock.advance(-1.0), ErrorCode::ConfigError);
}
