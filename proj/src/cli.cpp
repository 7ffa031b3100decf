#include "unitask/cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "unitask/config.hpp"
#include "unitask/error.hpp"
#include "unitask/metrics.hpp"
#include "unitask/projection.hpp"

namespace unitask {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::string decimal(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string show(const Rational& r) { return decimal(r.to_double()) + " (" + r.to_string() + ")"; }

// "n=20000,d=50,margin=1,noise=0,seed=3"
SyntheticSpec parse_synthetic(const std::string& text) {
  SyntheticSpec spec;
  std::istringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::ConfigError, "expected key=value in '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    try {
      if (key == "n") {
        spec.n = std::stoull(value);
      } else if (key == "d") {
        spec.d = std::stoull(value);
      } else if (key == "margin") {
        spec.margin = std::stod(value);
      } else if (key == "noise") {
        spec.noise = std::stod(value);
      } else if (key == "seed") {
        spec.seed = std::stoull(value);
      } else {
        throw Error(ErrorCode::ConfigError, "unknown synthetic key '" + key + "'");
      }
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::ConfigError, "bad value for synthetic key '" + key + "'");
    }
  }
  spec.validate();
  return spec;
}

struct RunOutcome {
  std::vector<IterationRecord> records;
};

RunOutcome execute(const RunConfig& rc, std::ostream& out) {
  const auto train = load_dataset(rc);
  std::vector<Sample> test;
  if (rc.test_path) test = parse_sparse_dataset(*rc.test_path);
  RunOutcome outcome{run_training(rc.trainer, rc.scenario, train, test)};
  write_metrics(outcome.records, rc.output_path, to_json(rc));

  out << "algorithm " << to_string(rc.algorithm) << ", scenario " << rc.scenario_name << ", " << train.size()
      << " samples\n";
  if (outcome.records.empty()) {
    out << "no iterations run\n";
  } else {
    const auto& last = outcome.records.back();
    out << "iterations " << outcome.records.size() << ", epochs " << decimal(last.epoch_progress) << ", "
        << (rc.algorithm == Algorithm::CoCoA ? "duality gap " : "accuracy ") << decimal(last.metric)
        << ", virtual time " << decimal(last.virtual_time) << '\n';
  }
  out << "metrics written to " << rc.output_path.string() << '\n';
  return outcome;
}

struct SimulateOptions {
  std::string preset = "static";
  std::string algo = "cocoa";
  std::string synthetic;
  std::string data;
  std::string mode = "uni-tasks";
  std::size_t micro_tasks = 16;
  std::size_t chunk_capacity = 0;
  std::optional<double> target;
  double max_epochs = 50.0;
  std::uint64_t seed = 1;
  std::string transport = "in-process";
  std::optional<double> lambda;
  bool no_rebalance = false;
  std::string output = "metrics.csv";
};

RunConfig simulate_config(const SimulateOptions& o) {
  nlohmann::json doc;
  doc["algorithm"] = o.algo;
  if (!o.data.empty()) doc["dataset"]["path"] = o.data;
  if (!o.synthetic.empty()) {
    const auto s = parse_synthetic(o.synthetic);
    doc["dataset"]["synthetic"] = {{"n", s.n}, {"d", s.d}, {"margin", s.margin}, {"noise", s.noise}, {"seed", s.seed}};
  }
  if (!doc.contains("dataset")) doc["dataset"] = nlohmann::json::object();
  if (o.chunk_capacity > 0) doc["chunk_capacity_bytes"] = o.chunk_capacity;
  auto& t = doc["trainer"];
  t["mode"] = o.mode;
  t["micro_tasks"] = o.micro_tasks;
  if (o.target) t["target"] = *o.target;
  t["max_epochs"] = o.max_epochs;
  t["seed"] = o.seed;
  t["transport"] = o.transport;
  t["rebalance"] = !o.no_rebalance;
  if (o.lambda) t["hyperparams"]["lambda"] = *o.lambda;
  doc["scenario"] = o.preset;
  doc["output"] = o.output;
  return parse_run_config(doc);
}

struct ProjectOptions {
  std::vector<std::size_t> tasks{16, 24, 32, 64};
  std::size_t nodes = 0;
  std::size_t fast = 0;
  std::size_t slow = 0;
  std::string slow_factor = "1.5";
  std::vector<std::string> speeds;
  std::string work = "16";
};

Rational parse_arg(const std::string& text) {
  try {
    return Rational::parse(text);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, std::string("bad number argument: ") + e.what());
  }
}

void project(const ProjectOptions& o, std::ostream& out) {
  const Rational work = parse_arg(o.work);
  std::vector<Rational> speeds;
  std::string shape;
  if (!o.speeds.empty()) {
    for (const auto& s : o.speeds) speeds.push_back(parse_arg(s));
    shape = std::to_string(speeds.size()) + " nodes";
  } else if (o.fast + o.slow > 0) {
    const Rational factor = parse_arg(o.slow_factor);
    speeds.assign(o.fast, Rational(1));
    speeds.insert(speeds.end(), o.slow, Rational(1) / factor);
    shape = std::to_string(o.fast) + " fast + " + std::to_string(o.slow) + " slow @" + o.slow_factor + "x";
  } else if (o.nodes > 0) {
    speeds.assign(o.nodes, Rational(1));
    shape = "N=" + std::to_string(o.nodes);
  } else {
    throw Error(ErrorCode::ConfigError, "give --N, --fast/--slow, or --speeds");
  }
  for (const auto& s : speeds) {
    if (!(Rational(0) < s)) throw Error(ErrorCode::ConfigError, "speeds must be positive");
  }
  const bool homogeneous = std::all_of(speeds.begin(), speeds.end(), [&](const Rational& s) { return s == speeds[0]; });

  out << "iteration time, total work " << work.to_string() << ", " << shape << '\n';
  for (std::size_t k : o.tasks) {
    if (k == 0) throw Error(ErrorCode::ConfigError, "task counts must be positive");
    Rational t;
    if (homogeneous) {
      t = microtask_iteration_time(k, speeds.size(), work) / speeds[0];
    } else if (o.speeds.empty()) {
      t = microtask_hetero_time(k, o.fast, o.slow, parse_arg(o.slow_factor), work);
    } else {
      t = microtask_makespan<Rational>(k, speeds, work / Rational(static_cast<std::int64_t>(k)));
    }
    out << "micro-tasks K=" << k << ": " << show(t) << '\n';
  }
  out << "uni-tasks: " << show(unitask_balanced_time<Rational>(speeds, work)) << '\n';
}

struct DemoOptions {
  std::string preset = "hetero-12x4";
  std::size_t iterations = 30;
  std::size_t n = 20000;
  std::size_t d = 50;
  std::size_t chunk_capacity = 16 * 1024;
  std::uint64_t seed = 1;
  std::string output = "rebalance.csv";
};

void rebalance_demo(const DemoOptions& o, std::ostream& out) {
  RunConfig rc;
  rc.algorithm = Algorithm::CoCoA;
  rc.synthetic = SyntheticSpec{o.n, o.d, 1.0, 0.0, o.seed};
  rc.chunk_capacity_bytes = o.chunk_capacity;
  rc.trainer.chunk_capacity_bytes = o.chunk_capacity;
  rc.trainer.seed = o.seed;
  rc.trainer.convergence_target = -1.0;  // run the full demo length
  rc.trainer.max_epochs = 1e9;
  rc.trainer.max_iterations = o.iterations;
  rc.scenario_name = o.preset;
  rc.scenario = preset_scenario(o.preset);
  rc.output_path = o.output;
  rc.validate();
  const auto outcome = execute(rc, out);
  if (outcome.records.empty()) return;
  const auto& first = outcome.records.front();
  const auto& last = outcome.records.back();
  auto spread = [](const IterationRecord& r) {
    const auto [lo, hi] = std::minmax_element(r.per_worker_runtime.begin(), r.per_worker_runtime.end());
    return *hi - *lo;
  };
  out << "runtime spread first " << decimal(spread(first)) << ", last " << decimal(spread(last)) << '\n';
}

int classify(const Error& e) {
  return e.code() == ErrorCode::ConfigError ? kExitUsage : kExitRuntime;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Elastic training with one long-lived task per node"};
  app.name("unitask");
  app.require_subcommand(1);

  std::string config_path;
  std::string train_output;
  auto* train = app.add_subcommand("train", "Run training from a JSON config file");
  train->add_option("--config", config_path, "Run configuration")->required();
  train->add_option("--output", train_output, "Override the metrics CSV path");

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Run a scenario in virtual time and write metrics");
  simulate->add_option("--preset", sim.preset, "static | scale-in | scale-out | hetero-8x8 | hetero-12x4");
  simulate->add_option("--algo", sim.algo, "cocoa | local-sgd");
  auto* syn = simulate->add_option("--synthetic", sim.synthetic, "n=..,d=..,margin=..,noise=..,seed=..");
  auto* data = simulate->add_option("--data", sim.data, "Sparse text dataset");
  syn->excludes(data);
  simulate->add_option("--mode", sim.mode, "uni-tasks | micro-tasks");
  simulate->add_option("--micro-tasks", sim.micro_tasks, "K in micro-task mode");
  simulate->add_option("--chunk-capacity", sim.chunk_capacity, "Chunk capacity in bytes");
  simulate->add_option("--target", sim.target, "Duality gap or accuracy target; negative disables early stop");
  simulate->add_option("--max-epochs", sim.max_epochs, "Epoch budget");
  simulate->add_option("--seed", sim.seed, "Trainer seed");
  simulate->add_option("--transport", sim.transport, "in-process | socket");
  simulate->add_option("--lambda", sim.lambda, "Regularization strength");
  simulate->add_flag("--no-rebalance", sim.no_rebalance, "Disable the load balancer");
  simulate->add_option("--output", sim.output, "Metrics CSV path");

  ProjectOptions proj;
  auto* projection = app.add_subcommand("project", "Print micro-task and uni-task iteration times");
  projection->add_option("--K", proj.tasks, "Micro-task counts")->delimiter(',');
  auto* homog = projection->add_option("--N", proj.nodes, "Homogeneous node count");
  auto* fast = projection->add_option("--fast", proj.fast, "Fast node count");
  projection->add_option("--slow", proj.slow, "Slow node count")->needs(fast);
  projection->add_option("--slow-factor", proj.slow_factor, "Slowdown of slow nodes");
  auto* speeds = projection->add_option("--speeds", proj.speeds, "Per-node speeds")->delimiter(',');
  projection->add_option("--work", proj.work, "Total work per iteration");
  homog->excludes(fast)->excludes(speeds);
  speeds->excludes(fast);

  DemoOptions demo;
  auto* rebalance = app.add_subcommand("rebalance-demo", "Per-iteration runtimes and chunk counts under rebalancing");
  rebalance->add_option("--preset", demo.preset, "Scenario preset");
  rebalance->add_option("--iterations", demo.iterations, "Iterations to run");
  rebalance->add_option("--n", demo.n, "Synthetic sample count");
  rebalance->add_option("--d", demo.d, "Synthetic dimension");
  rebalance->add_option("--chunk-capacity", demo.chunk_capacity, "Chunk capacity in bytes");
  rebalance->add_option("--seed", demo.seed, "Seed");
  rebalance->add_option("--output", demo.output, "Metrics CSV path");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n' << app.help();
    return kExitUsage;
  }

  try {
    if (*train) {
      RunConfig rc = load_run_config(config_path);
      if (!train_output.empty()) rc.output_path = train_output;
      execute(rc, out);
    } else if (*simulate) {
      execute(simulate_config(sim), out);
    } else if (*projection) {
      project(proj, out);
    } else if (*rebalance) {
      rebalance_demo(demo, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return classify(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace unitask
