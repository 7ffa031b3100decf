#pragma once

#include <doctest.h>

#include <vector>

#include "unitask/core_data.hpp"
#include "unitask/error.hpp"

// Runs `expr` and checks that it throws unitask::Error with the given code.
#define CHECK_ERROR_CODE(expr, expected)                      \
  do {                                                        \
    bool thrown_ = false;                                     \
    try {                                                     \
      (void)(expr);                                           \
    } catch (const unitask::Error& e_) {                      \
      thrown_ = true;                                         \
      CHECK_MESSAGE(e_.code() == (expected), e_.what());      \
    }                                                         \
    CHECK_MESSAGE(thrown_, "expected an exception: " #expr);  \
  } while (false)

namespace testing {

inline unitask::Sample dense_sample(unitask::SampleId id, std::vector<double> values, double label) {
  unitask::Sample s;
  s.id = id;
  s.label = label;
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (values[j] != 0.0) s.features.push_back({static_cast<unitask::FeatureIndex>(j), values[j]});
  }
  return s;
}

// Sample with `nnz` unit features, so its size is exactly 12·nnz + 8 bytes (+8 with dual state).
inline unitask::Sample sized_sample(unitask::SampleId id, std::size_t nnz) {
  unitask::Sample s;
  s.id = id;
  s.label = 1.0;
  for (std::size_t j = 0; j < nnz; ++j) s.features.push_back({static_cast<unitask::FeatureIndex>(j), 1.0});
  return s;
}

inline std::vector<unitask::Sample> sized_dataset(std::size_t n, std::size_t nnz) {
  std::vector<unitask::Sample> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(sized_sample(i, nnz));
  return out;
}

}  // namespace testing
