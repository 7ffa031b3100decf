#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "unitask/trainer.hpp"

namespace unitask {

inline constexpr const char* kMetricsHeader = "iteration,epoch,metric,virtual_time,worker_id,runtime,chunks";
inline constexpr std::size_t kMetricsColumns = 7;

struct MetricsRow {
  std::uint64_t iteration = 0;
  double epoch = 0.0;
  double metric = 0.0;
  double virtual_time = 0.0;
  WorkerId worker_id = 0;
  double runtime = 0.0;
  std::size_t chunks = 0;

  bool operator==(const MetricsRow&) const = default;
};

std::vector<MetricsRow> metrics_rows(std::span<const IterationRecord> records);

// One CSV row per (record, worker). The sidecar `<path>.json` holds
// `provenance` plus the column list and the set of worker ids seen.
void write_metrics(std::span<const IterationRecord> records, const std::filesystem::path& path,
                   const nlohmann::json& provenance = nlohmann::json::object());
std::vector<MetricsRow> read_metrics(const std::filesystem::path& path);

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

}  // namespace unitask
