#include "unitask/config.hpp"

#include <fstream>
#include <set>

#include "unitask/error.hpp"

namespace unitask {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) config_error(where + " must be an object");
  const std::set<std::string> known(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!known.contains(key)) config_error("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    config_error(std::string("bad value for '") + key + "': " + e.what());
  }
}

template <typename T>
std::optional<T> get_optional(const json& obj, const char* key) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  return get_or<T>(obj, key, T{});
}

std::filesystem::path resolve_path(const std::string& raw, const std::filesystem::path& base) {
  std::filesystem::path p(raw);
  return p.is_absolute() || base.empty() ? p : base / p;
}

std::vector<NodeSpec> parse_nodes(const json& doc, const std::string& where) {
  std::vector<NodeSpec> nodes;
  if (!doc.is_array()) config_error(where + " must be an array of {id, speed}");
  for (const auto& n : doc) {
    check_keys(n, where, {"id", "speed"});
    nodes.push_back({get_or<NodeId>(n, "id", 0), get_or<double>(n, "speed", 1.0)});
  }
  return nodes;
}

Scenario parse_scenario(const json& doc) {
  check_keys(doc, "scenario", {"total_work", "nodes", "events"});
  Scenario s;
  s.total_work = get_or<double>(doc, "total_work", 16.0);
  if (!doc.contains("nodes")) config_error("scenario needs 'nodes'");
  if (doc.at("nodes").is_number_unsigned()) {
    s.initial_nodes = static_scenario(doc.at("nodes").get<std::size_t>()).initial_nodes;
  } else {
    s.initial_nodes = parse_nodes(doc.at("nodes"), "scenario.nodes");
  }
  for (const auto& e : doc.value("events", json::array())) {
    check_keys(e, "scenario event", {"time", "add", "remove"});
    ScenarioEvent event;
    event.time = get_or<double>(e, "time", 0.0);
    if (e.contains("add") == e.contains("remove")) config_error("each event needs exactly one of 'add'/'remove'");
    if (e.contains("add")) {
      event.action = AddNodes{parse_nodes(e.at("add"), "event.add")};
    } else {
      event.action = RemoveNodes{get_or<std::vector<NodeId>>(e, "remove", {})};
    }
    s.events.push_back(std::move(event));
  }
  return s;
}

json scenario_to_json(const Scenario& s) {
  auto nodes = [](const std::vector<NodeSpec>& list) {
    json arr = json::array();
    for (const auto& n : list) arr.push_back({{"id", n.id}, {"speed", n.speed}});
    return arr;
  };
  json events = json::array();
  for (const auto& e : s.events) {
    if (const auto* add = std::get_if<AddNodes>(&e.action)) {
      events.push_back({{"time", e.time}, {"add", nodes(add->nodes)}});
    } else {
      events.push_back({{"time", e.time}, {"remove", std::get<RemoveNodes>(e.action).nodes}});
    }
  }
  return {{"total_work", s.total_work}, {"nodes", nodes(s.initial_nodes)}, {"events", events}};
}

TransportKind parse_transport(const std::string& name) {
  if (name == "in-process") return TransportKind::InProcess;
  if (name == "socket") return TransportKind::Socket;
  config_error("unknown transport '" + name + "' (expected in-process or socket)");
}

}  // namespace

std::string to_string(Algorithm algorithm) { return algorithm == Algorithm::CoCoA ? "cocoa" : "local-sgd"; }

void RunConfig::validate() const {
  if (dataset_path.has_value() == synthetic.has_value()) {
    config_error("exactly one of dataset path and synthetic spec must be given");
  }
  if (synthetic) synthetic->validate();
  if (chunk_capacity_bytes == 0) config_error("chunk_capacity_bytes must be positive");
  trainer.validate();
  scenario.validate();
}

RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir) {
  check_keys(doc, "config",
             {"algorithm", "dataset", "test_dataset", "chunk_capacity_bytes", "trainer", "scenario", "scenario_name",
              "output"});
  RunConfig rc;
  const auto algo = get_or<std::string>(doc, "algorithm", "cocoa");
  if (algo == "cocoa") {
    rc.algorithm = Algorithm::CoCoA;
  } else if (algo == "local-sgd") {
    rc.algorithm = Algorithm::LocalSgd;
  } else {
    config_error("unknown algorithm '" + algo + "' (expected cocoa or local-sgd)");
  }
  const bool sgd = rc.algorithm == Algorithm::LocalSgd;

  if (!doc.contains("dataset")) config_error("config needs a 'dataset' section");
  const json& ds = doc.at("dataset");
  check_keys(ds, "dataset", {"path", "synthetic"});
  if (ds.contains("path")) rc.dataset_path = resolve_path(get_or<std::string>(ds, "path", ""), base_dir);
  if (ds.contains("synthetic")) {
    const json& syn = ds.at("synthetic");
    check_keys(syn, "dataset.synthetic", {"n", "d", "margin", "noise", "seed"});
    SyntheticSpec spec;
    spec.n = get_or<std::size_t>(syn, "n", spec.n);
    spec.d = get_or<std::size_t>(syn, "d", spec.d);
    spec.margin = get_or<double>(syn, "margin", spec.margin);
    spec.noise = get_or<double>(syn, "noise", spec.noise);
    spec.seed = get_or<std::uint64_t>(syn, "seed", spec.seed);
    rc.synthetic = spec;
  }
  if (doc.contains("test_dataset")) {
    rc.test_path = resolve_path(get_or<std::string>(doc, "test_dataset", ""), base_dir);
  }
  rc.chunk_capacity_bytes = get_or<std::size_t>(doc, "chunk_capacity_bytes", sgd ? kSgdChunkBytes : kCocoaChunkBytes);

  const json tr = doc.value("trainer", json::object());
  check_keys(tr, "trainer",
             {"mode", "micro_tasks", "target", "max_epochs", "max_iterations", "seed", "plateau_window", "rebalance",
              "history_window", "max_moves_per_round", "transport", "parallel_dispatch", "hyperparams"});
  TrainerConfig& t = rc.trainer;
  const auto mode = get_or<std::string>(tr, "mode", "uni-tasks");
  if (mode == "uni-tasks") {
    t.mode = ExecutionMode::UniTasks;
  } else if (mode == "micro-tasks") {
    t.mode = ExecutionMode::MicroTasks;
  } else {
    config_error("unknown mode '" + mode + "' (expected uni-tasks or micro-tasks)");
  }
  t.micro_tasks = get_or<std::size_t>(tr, "micro_tasks", t.micro_tasks);
  t.convergence_target = get_or<double>(tr, "target", sgd ? 0.99 : 1e-3);
  t.max_epochs = get_or<double>(tr, "max_epochs", t.max_epochs);
  t.max_iterations = get_or<std::size_t>(tr, "max_iterations", t.max_iterations);
  t.seed = get_or<std::uint64_t>(tr, "seed", t.seed);
  t.plateau_window = get_or<std::size_t>(tr, "plateau_window", t.plateau_window);
  t.rebalance = get_or<bool>(tr, "rebalance", t.rebalance);
  t.rebalance_config.history_window = get_or<std::size_t>(tr, "history_window", t.rebalance_config.history_window);
  t.rebalance_config.max_moves_per_round = get_optional<std::size_t>(tr, "max_moves_per_round");
  t.transport = parse_transport(get_or<std::string>(tr, "transport", "in-process"));
  t.parallel_dispatch = get_or<bool>(tr, "parallel_dispatch", t.parallel_dispatch);
  t.chunk_capacity_bytes = rc.chunk_capacity_bytes;

  const json hp = tr.value("hyperparams", json::object());
  check_keys(hp, "trainer.hyperparams", {"L", "H", "lr", "momentum", "sigma_prime", "lambda"});
  t.hp.loss = sgd ? Loss::Logistic : Loss::Hinge;
  t.hp.L = get_or<std::size_t>(hp, "L", sgd ? 8 : 1);
  t.hp.H = get_or<std::size_t>(hp, "H", sgd ? 16 : 0);
  t.hp.base_lr = get_or<double>(hp, "lr", sgd ? 0.01 : t.hp.base_lr);
  t.hp.momentum = get_or<double>(hp, "momentum", sgd ? 0.9 : 0.0);
  t.hp.sigma_prime = get_optional<double>(hp, "sigma_prime");
  t.hp.lambda = get_optional<double>(hp, "lambda");

  const json sc = doc.value("scenario", json("static"));
  if (sc.is_string()) {
    rc.scenario_name = sc.get<std::string>();
    rc.scenario = preset_scenario(rc.scenario_name);
  } else {
    rc.scenario_name = get_or<std::string>(doc, "scenario_name", "custom");
    rc.scenario = parse_scenario(sc);
  }
  rc.output_path = resolve_path(get_or<std::string>(doc, "output", "metrics.csv"), base_dir);

  rc.validate();
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot read config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    config_error("malformed config " + path.string() + ": " + e.what());
  }
  return parse_run_config(doc, path.parent_path());
}

json to_json(const RunConfig& rc) {
  const TrainerConfig& t = rc.trainer;
  json dataset;
  if (rc.dataset_path) dataset["path"] = rc.dataset_path->string();
  if (rc.synthetic) {
    const auto& s = *rc.synthetic;
    dataset["synthetic"] = {{"n", s.n}, {"d", s.d}, {"margin", s.margin}, {"noise", s.noise}, {"seed", s.seed}};
  }
  json hp = {{"L", t.hp.L}, {"H", t.hp.H}, {"lr", t.hp.base_lr}, {"momentum", t.hp.momentum},
             {"sigma_prime", t.hp.sigma_prime ? json(*t.hp.sigma_prime) : json(nullptr)},
             {"lambda", t.hp.lambda ? json(*t.hp.lambda) : json(nullptr)}};
  json trainer = {
      {"mode", t.mode == ExecutionMode::UniTasks ? "uni-tasks" : "micro-tasks"},
      {"micro_tasks", t.micro_tasks},
      {"target", t.convergence_target},
      {"max_epochs", t.max_epochs},
      {"max_iterations", t.max_iterations},
      {"seed", t.seed},
      {"plateau_window", t.plateau_window},
      {"rebalance", t.rebalance},
      {"history_window", t.rebalance_config.history_window},
      {"max_moves_per_round",
       t.rebalance_config.max_moves_per_round ? json(*t.rebalance_config.max_moves_per_round) : json(nullptr)},
      {"transport", t.transport == TransportKind::InProcess ? "in-process" : "socket"},
      {"parallel_dispatch", t.parallel_dispatch},
      {"hyperparams", hp}};
  json doc = {{"algorithm", to_string(rc.algorithm)},
              {"dataset", dataset},
              {"chunk_capacity_bytes", rc.chunk_capacity_bytes},
              {"trainer", trainer},
              {"scenario_name", rc.scenario_name},
              {"scenario", scenario_to_json(rc.scenario)},
              {"output", rc.output_path.string()}};
  if (rc.test_path) doc["test_dataset"] = rc.test_path->string();
  return doc;
}

std::vector<Sample> load_dataset(const RunConfig& config) {
  if (config.synthetic) return generate_synthetic(*config.synthetic);
  return parse_sparse_dataset(*config.dataset_path);
}

}  // namespace unitask
