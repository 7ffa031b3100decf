#include "unitask/metrics.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "unitask/error.hpp"

namespace unitask {

namespace {

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <typename T>
T parse_field(const std::string& token, std::size_t line, const char* column) {
  T value{};
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(line) + ": bad value '" + token + "' in column " + column);
  }
  return value;
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  return std::filesystem::path(csv_path.string() + ".json");
}

std::vector<MetricsRow> metrics_rows(std::span<const IterationRecord> records) {
  std::vector<MetricsRow> rows;
  for (const auto& r : records) {
    for (std::size_t k = 0; k < r.worker_ids.size(); ++k) {
      rows.push_back({r.iteration, r.epoch_progress, r.metric, r.virtual_time, r.worker_ids[k],
                      r.per_worker_runtime.at(k), r.per_worker_chunks.at(k)});
    }
  }
  return rows;
}

void write_metrics(std::span<const IterationRecord> records, const std::filesystem::path& path,
                   const nlohmann::json& provenance) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << kMetricsHeader << '\n';
  std::set<WorkerId> workers;
  for (const auto& row : metrics_rows(records)) {
    workers.insert(row.worker_id);
    out << row.iteration << ',' << format_double(row.epoch) << ',' << format_double(row.metric) << ','
        << format_double(row.virtual_time) << ',' << row.worker_id << ',' << format_double(row.runtime) << ','
        << row.chunks << '\n';
  }
  out.close();
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());

  nlohmann::json sidecar;
  sidecar["columns"] = nlohmann::json::array();
  std::istringstream header(kMetricsHeader);
  for (std::string col; std::getline(header, col, ',');) sidecar["columns"].push_back(col);
  sidecar["iterations"] = records.size();
  sidecar["workers"] = workers;
  sidecar["config"] = provenance;

  std::ofstream side(sidecar_path(path));
  if (!side) throw Error(ErrorCode::IoError, "cannot write " + sidecar_path(path).string());
  side << sidecar.dump(2) << '\n';
  if (!side) throw Error(ErrorCode::IoError, "write failed for " + sidecar_path(path).string());
}

std::vector<MetricsRow> read_metrics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::string text;
  if (!std::getline(in, text) || text != kMetricsHeader) {
    throw Error(ErrorCode::ParseError, "expected header '" + std::string(kMetricsHeader) + "'");
  }
  std::vector<MetricsRow> rows;
  std::size_t line = 1;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream fields(text);
    for (std::string cell; std::getline(fields, cell, ',');) cells.push_back(cell);
    if (cells.size() != kMetricsColumns) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": expected 7 columns, got " +
                                             std::to_string(cells.size()));
    }
    MetricsRow row;
    row.iteration = parse_field<std::uint64_t>(cells[0], line, "iteration");
    row.epoch = parse_field<double>(cells[1], line, "epoch");
    row.metric = parse_field<double>(cells[2], line, "metric");
    row.virtual_time = parse_field<double>(cells[3], line, "virtual_time");
    row.worker_id = parse_field<WorkerId>(cells[4], line, "worker_id");
    row.runtime = parse_field<double>(cells[5], line, "runtime");
    row.chunks = parse_field<std::size_t>(cells[6], line, "chunks");
    rows.push_back(row);
  }
  return rows;
}

}  // namespace unitask
