#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "unitask/core_data.hpp"

namespace unitask {

// Sparse text format, one sample per line: "label idx:val idx:val ...".
// Indices are 1-based and strictly ascending. Labels 0/-1 map to -1, 1/+1 to +1.
// Blank lines and lines starting with '#' are skipped.
std::vector<Sample> parse_sparse_dataset(std::istream& in);
std::vector<Sample> parse_sparse_dataset(const std::filesystem::path& path);

// Canonical form: "+1"/"-1" labels, shortest round-trip values.
void write_sparse_dataset(std::ostream& out, const std::vector<Sample>& samples);
void write_sparse_dataset(const std::filesystem::path& path, const std::vector<Sample>& samples);

struct SyntheticSpec {
  std::size_t n = 1000;
  std::size_t d = 10;
  double margin = 1.0;
  double noise = 0.0;  // fraction of labels flipped
  std::uint64_t seed = 1;

  void validate() const;
  bool operator==(const SyntheticSpec&) const = default;
};

// Two Gaussian blobs on either side of a seeded random hyperplane through the
// origin. Before label flips every point lies at distance >= margin from it.
std::vector<Sample> generate_synthetic(const SyntheticSpec& spec);

}  // namespace unitask
