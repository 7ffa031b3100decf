#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "unitask/config.hpp"
#include "unitask/error.hpp"
#include "unitask/metrics.hpp"
#include "unitask/projection.hpp"

namespace py = pybind11;
using namespace unitask;

namespace {

py::dict record_dict(const IterationRecord& r) {
  py::dict d;
  d["iteration"] = r.iteration;
  d["epoch"] = r.epoch_progress;
  d["metric"] = r.metric;
  d["virtual_time"] = r.virtual_time;
  d["data_parallelism"] = r.data_parallelism;
  d["worker_ids"] = r.worker_ids;
  d["runtimes"] = r.per_worker_runtime;
  d["chunks"] = r.per_worker_chunks;
  return d;
}

std::vector<IterationRecord> run_config(const std::string& json_text, const std::filesystem::path& base_dir,
                                        bool write_csv) {
  const RunConfig rc = parse_run_config(nlohmann::json::parse(json_text), base_dir);
  std::vector<Sample> test;
  if (rc.test_path) test = parse_sparse_dataset(*rc.test_path);
  std::vector<IterationRecord> records;
  {
    py::gil_scoped_release release;
    records = run_training(rc.trainer, rc.scenario, load_dataset(rc), test);
  }
  if (write_csv) write_metrics(records, rc.output_path, to_json(rc));
  return records;
}

}  // namespace

PYBIND11_MODULE(_unitask, m) {
  m.doc() = "Elastic uni-task training engine";

  py::register_exception<Error>(m, "UnitaskError", PyExc_RuntimeError);

  m.def("microtask_time", &microtask_iteration_time<double>, py::arg("tasks"), py::arg("nodes"),
        py::arg("total_work") = 16.0);
  m.def(
      "microtask_hetero_time",
      [](std::size_t tasks, std::size_t fast, std::size_t slow, double factor, double work) {
        return microtask_hetero_time<double>(tasks, fast, slow, factor, work);
      },
      py::arg("tasks"), py::arg("n_fast"), py::arg("n_slow"), py::arg("slow_factor"), py::arg("total_work") = 16.0);
  m.def(
      "unitask_time",
      [](const std::vector<double>& speeds, double work) { return unitask_balanced_time<double>(speeds, work); },
      py::arg("speeds"), py::arg("total_work") = 16.0);

  m.def(
      "generate_synthetic",
      [](std::size_t n, std::size_t d, double margin, double noise, std::uint64_t seed) {
        const auto samples = generate_synthetic({n, d, margin, noise, seed});
        std::vector<double> labels;
        std::vector<std::vector<double>> rows;
        for (const auto& s : samples) {
          labels.push_back(s.label);
          std::vector<double> row(d, 0.0);
          for (const auto& f : s.features) row[f.index] = f.value;
          rows.push_back(std::move(row));
        }
        return py::make_tuple(rows, labels);
      },
      py::arg("n") = 1000, py::arg("d") = 10, py::arg("margin") = 1.0, py::arg("noise") = 0.0, py::arg("seed") = 1);

  m.def(
      "run_config",
      [](const std::string& json_text, const std::filesystem::path& base_dir, bool write_csv) {
        py::list out;
        for (const auto& r : run_config(json_text, base_dir, write_csv)) out.append(record_dict(r));
        return out;
      },
      py::arg("config_json"), py::arg("base_dir") = std::filesystem::path{}, py::arg("write_csv") = false);

  m.def(
      "read_metrics",
      [](const std::filesystem::path& path) {
        py::list out;
        for (const auto& row : read_metrics(path)) {
          py::dict d;
          d["iteration"] = row.iteration;
          d["epoch"] = row.epoch;
          d["metric"] = row.metric;
          d["virtual_time"] = row.virtual_time;
          d["worker_id"] = row.worker_id;
          d["runtime"] = row.runtime;
          d["chunks"] = row.chunks;
          out.append(d);
        }
        return out;
      },
      py::arg("path"));
}
