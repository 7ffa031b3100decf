#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "oracles.hpp"
#include "unitask/config.hpp"
#include "unitask/ingest.hpp"
#include "unitask/metrics.hpp"

using namespace unitask;
namespace fs = std::filesystem;

namespace {

std::vector<Sample> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_sparse_dataset(in);
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "unitask_ingest_tests";
  fs::create_directories(dir);
  return dir / name;
}

IterationRecord record(std::uint64_t it, std::vector<WorkerId> workers) {
  IterationRecord r;
  r.iteration = it;
  r.epoch_progress = 0.1 * static_cast<double>(it + 1) + 1.0 / 3.0;
  r.metric = 1.0 / (7.0 + static_cast<double>(it));
  r.virtual_time = 3.141592653589793 * static_cast<double>(it + 1);
  r.worker_ids = workers;
  for (WorkerId w : workers) {
    r.per_worker_runtime.push_back(0.1 * w + 1e-17);
    r.per_worker_chunks.push_back(w * 3);
  }
  return r;
}

}  // namespace

TEST_CASE("parse sparse lines") {
  const auto s = parse("+1 1:0.5 3:2.0\n0 2:1.0\n-1\n");
  REQUIRE(s.size() == 3);
  CHECK(s[0].label == 1.0);
  CHECK(s[0].features == std::vector<Feature>{{0, 0.5}, {2, 2.0}});
  CHECK(s[1].label == -1.0);
  CHECK(s[1].features == std::vector<Feature>{{1, 1.0}});
  CHECK(s[2].features.empty());
  CHECK(s[2].id == 2);
}

TEST_CASE("parse errors carry the line number") {
  try {
    parse("+1 1:1\n+1 3:1 2:1\n");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_ERROR_CODE(parse("+1 1:abc\n"), ErrorCode::ParseError);
  CHECK_ERROR_CODE(parse("yes 1:1\n"), ErrorCode::ParseError);
  CHECK_ERROR_CODE(parse("+1 0:1\n"), ErrorCode::ParseError);
  CHECK_ERROR_CODE(parse("+1 1:1 1:2\n"), ErrorCode::ParseError);
  CHECK_ERROR_CODE(parse("2 1:1\n"), ErrorCode::ParseError);
  CHECK_ERROR_CODE(parse("+1 1\n"), ErrorCode::ParseError);
  CHECK_ERROR_CODE(parse(""), ErrorCode::EmptyDataset);
  CHECK_ERROR_CODE(parse("\n# comment\n"), ErrorCode::EmptyDataset);
  CHECK_ERROR_CODE(parse_sparse_dataset(scratch("missing.svm")), ErrorCode::IoError);
}

TEST_CASE("canonical serialization round-trips") {
  const auto original = parse("1 2:0.1 7:-3e-5\n0 1:1e300\n-1 4:0.3333333333333333\n");
  std::ostringstream once;
  write_sparse_dataset(once, original);
  const auto reparsed = parse(once.str());
  CHECK(reparsed == original);
  std::ostringstream twice;
  write_sparse_dataset(twice, reparsed);
  CHECK(twice.str() == once.str());

  const auto synthetic = generate_synthetic({50, 6, 1.0, 0.1, 2});
  const fs::path path = scratch("synthetic.svm");
  write_sparse_dataset(path, synthetic);
  CHECK(parse_sparse_dataset(path) == synthetic);
}

TEST_CASE("synthetic data") {
  CHECK(generate_synthetic({1, 3, 1.0, 0.0, 1}).size() == 1);
  CHECK(generate_synthetic({100, 4, 1.0, 0.0, 5}) == generate_synthetic({100, 4, 1.0, 0.0, 5}));
  CHECK_FALSE(generate_synthetic({100, 4, 1.0, 0.0, 5}) == generate_synthetic({100, 4, 1.0, 0.0, 6}));
  CHECK_ERROR_CODE(generate_synthetic({0, 4, 1.0, 0.0, 5}), ErrorCode::ConfigError);
  CHECK_ERROR_CODE(generate_synthetic({10, 4, 0.0, 0.0, 5}), ErrorCode::ConfigError);
  CHECK_ERROR_CODE(generate_synthetic({10, 4, 1.0, 1.0, 5}), ErrorCode::ConfigError);

  const auto clean = generate_synthetic({1000, 5, 1.0, 0.0, 9});
  const auto noisy = generate_synthetic({1000, 5, 1.0, 0.2, 9});
  std::size_t flipped = 0;
  for (std::size_t i = 0; i < clean.size(); ++i) flipped += clean[i].label != noisy[i].label ? 1 : 0;
  CHECK(flipped == 200);
}

TEST_CASE("noise-free synthetic data is separable") {
  const auto data = generate_synthetic({1000, 5, 1.0, 0.0, 3});
  // a small λ makes the optimum a hard-margin separator
  const auto problem = oracle::make_problem(data, 5, 1e-3);
  const auto run = oracle::sdca(problem, 1e-6, 2000, 1);
  REQUIRE(run.epochs_to_target.has_value());
  const auto w = oracle::primal_of(problem, run.alpha);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < problem.n(); ++i) correct += problem.y[i] * oracle::dot(w, problem.x[i]) > 0 ? 1 : 0;
  CHECK(correct == 1000);
}

TEST_CASE("metrics CSV") {
  const fs::path path = scratch("metrics.csv");
  SUBCASE("empty records give a header-only file") {
    write_metrics({}, path);
    std::ifstream in(path);
    std::string all((std::istreambuf_iterator<char>(in)), {});
    CHECK(all == std::string(kMetricsHeader) + "\n");
    CHECK(read_metrics(path).empty());
    CHECK(fs::exists(sidecar_path(path)));
  }
  SUBCASE("one row per record and worker, values round-trip") {
    const std::vector<IterationRecord> records{record(0, {0, 1}), record(1, {0, 1})};
    write_metrics(records, path, nlohmann::json{{"algorithm", "cocoa"}});
    const auto rows = read_metrics(path);
    REQUIRE(rows.size() == 4);
    CHECK(rows == metrics_rows(records));
    for (const auto& row : rows) {
      CHECK(row.epoch == doctest::Approx(records[row.iteration].epoch_progress).epsilon(1e-15));
    }
    std::ifstream side(sidecar_path(path));
    const auto sidecar = nlohmann::json::parse(side);
    CHECK(sidecar["columns"].size() == kMetricsColumns);
    CHECK(sidecar["workers"] == nlohmann::json::array({0, 1}));
    CHECK(sidecar["config"]["algorithm"] == "cocoa");
  }
  CHECK_ERROR_CODE(write_metrics({}, scratch("no/such/dir/m.csv")), ErrorCode::IoError);
}

TEST_CASE("metrics reader rejects a wrong schema") {
  const fs::path path = scratch("bad.csv");
  std::ofstream(path) << "iteration,epoch\n1,2\n";
  CHECK_ERROR_CODE(read_metrics(path), ErrorCode::ParseError);
  std::ofstream(path) << kMetricsHeader << "\n1,2,3\n";
  CHECK_ERROR_CODE(read_metrics(path), ErrorCode::ParseError);
}

TEST_CASE("run config parsing") {
  const nlohmann::json doc = {{"algorithm", "local-sgd"},
                              {"dataset", {{"synthetic", {{"n", 100}, {"d", 4}}}}},
                              {"scenario", "hetero-12x4"},
                              {"trainer", {{"hyperparams", {{"lr", 0.2}}}, {"max_epochs", 3}}}};
  const RunConfig rc = parse_run_config(doc);
  CHECK(rc.algorithm == Algorithm::LocalSgd);
  CHECK(rc.chunk_capacity_bytes == 200 * 1024);
  CHECK(rc.trainer.chunk_capacity_bytes == 200 * 1024);
  CHECK(rc.trainer.hp.loss == Loss::Logistic);
  CHECK(rc.trainer.hp.L == 8);
  CHECK(rc.trainer.hp.H == 16);
  CHECK(rc.trainer.hp.base_lr == 0.2);
  CHECK(rc.scenario == preset_scenario("hetero-12x4"));
  CHECK(rc.synthetic->n == 100);

  // resolution is pure and the resolved form re-parses to itself
  CHECK(to_json(parse_run_config(doc)) == to_json(rc));
  CHECK(to_json(parse_run_config(to_json(rc))) == to_json(rc));

  const RunConfig cocoa = parse_run_config({{"dataset", {{"path", "train.svm"}}}}, "/data");
  CHECK(cocoa.chunk_capacity_bytes == 1024 * 1024);
  CHECK(cocoa.dataset_path == fs::path("/data/train.svm"));
  CHECK(cocoa.trainer.convergence_target == 1e-3);
}

TEST_CASE("custom scenarios in config") {
  const nlohmann::json doc = {
      {"dataset", {{"synthetic", nlohmann::json::object()}}},
      {"scenario",
       {{"nodes", {{{"id", 0}, {"speed", 1.0}}, {{"id", 1}, {"speed", 0.5}}}},
        {"events", {{{"time", 5.0}, {"add", {{{"id", 2}, {"speed", 2.0}}}}}, {{"time", 9.0}, {"remove", {1}}}}}}}};
  const RunConfig rc = parse_run_config(doc);
  CHECK(rc.scenario.node_count_sequence() == std::vector<std::size_t>{2, 3, 2});
  CHECK(rc.scenario_name == "custom");
}

TEST_CASE("run config errors") {
  const nlohmann::json both = {{"dataset", {{"path", "a"}, {"synthetic", nlohmann::json::object()}}}};
  CHECK_ERROR_CODE(parse_run_config(both), ErrorCode::ConfigError);
  CHECK_ERROR_CODE(parse_run_config({{"dataset", nlohmann::json::object()}}), ErrorCode::ConfigError);
  CHECK_ERROR_CODE(parse_run_config({{"dataset", {{"path", "a"}}}, {"typo", 1}}), ErrorCode::ConfigError);
  CHECK_ERROR_CODE(parse_run_config({{"dataset", {{"path", "a"}}}, {"algorithm", "svm"}}), ErrorCode::ConfigError);
  CHECK_ERROR_CODE(parse_run_config({{"dataset", {{"path", "a"}}}, {"scenario", "nope"}}), ErrorCode::ConfigError);
  CHECK_ERROR_CODE(parse_run_config({{"dataset", {{"path", "a"}}}, {"chunk_capacity_bytes", 0}}),
                   ErrorCode::ConfigError);
  CHECK_ERROR_CODE(parse_run_config({{"dataset", {{"path", "a"}}}, {"trainer", {{"max_epochs", "x"}}}}),
                   ErrorCode::ConfigError);
  CHECK_ERROR_CODE(load_run_config(scratch("absent.json")), ErrorCode::ConfigError);
  std::ofstream(scratch("broken.json")) << "{ not json";
  CHECK_ERROR_CODE(load_run_config(scratch("broken.json")), ErrorCode::ConfigError);
}
