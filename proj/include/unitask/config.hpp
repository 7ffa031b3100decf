#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "unitask/cluster.hpp"
#include "unitask/ingest.hpp"
#include "unitask/trainer.hpp"

namespace unitask {

enum class Algorithm { CoCoA, LocalSgd };

inline constexpr std::size_t kCocoaChunkBytes = std::size_t{1} << 20;
inline constexpr std::size_t kSgdChunkBytes = 200 * 1024;

// A fully resolved experiment description. Exactly one of dataset_path and
// synthetic is set.
struct RunConfig {
  Algorithm algorithm = Algorithm::CoCoA;
  std::optional<std::filesystem::path> dataset_path;
  std::optional<SyntheticSpec> synthetic;
  std::optional<std::filesystem::path> test_path;
  std::size_t chunk_capacity_bytes = kCocoaChunkBytes;
  TrainerConfig trainer;
  std::string scenario_name = "static";  // preset name or "custom"
  Scenario scenario;
  std::filesystem::path output_path = "metrics.csv";

  void validate() const;
};

// Relative dataset and output paths are resolved against `base_dir`.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);

// Loads or generates the training set described by the config.
std::vector<Sample> load_dataset(const RunConfig& config);

std::string to_string(Algorithm algorithm);

}  // namespace unitask
