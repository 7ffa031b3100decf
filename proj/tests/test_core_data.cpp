#include <doctest.h>

#include <algorithm>
#include <random>

#include "helpers.hpp"
#include "oracles.hpp"
#include "unitask/core_data.hpp"

using namespace unitask;

namespace {

// Independent greedy packer over byte sizes only.
std::vector<std::size_t> greedy_pack(const std::vector<std::size_t>& sizes, std::size_t capacity) {
  std::vector<std::size_t> counts;
  std::size_t bytes = 0;
  std::size_t count = 0;
  for (std::size_t s : sizes) {
    if (count > 0 && bytes + s > capacity) {
      counts.push_back(count);
      bytes = 0;
      count = 0;
    }
    bytes += s;
    ++count;
    if (bytes > capacity) {
      counts.push_back(count);
      bytes = 0;
      count = 0;
    }
  }
  if (count > 0) counts.push_back(count);
  return counts;
}

std::vector<Sample> mixed_dataset(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> nnz(0, 40);
  std::vector<Sample> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(testing::sized_sample(i, nnz(rng)));
  return out;
}

}  // namespace

TEST_CASE("sample byte accounting") {
  const Sample s = testing::sized_sample(0, 3);
  CHECK(sample_byte_size(s) == 3 * 12 + 8);
  CHECK(sample_byte_size(s, StateLayout::Dual) == 3 * 12 + 16);
  DataChunk c{0, {s, s}, {}};
  CHECK(c.byte_size() == 2 * 44);
  c.init_dual_state();
  CHECK(c.has_state());
  CHECK(c.byte_size() == 2 * 52);
}

TEST_CASE("sample algebra") {
  const Sample s = testing::dense_sample(0, {1.0, 0.0, -2.0}, 1.0);
  CHECK(s.squared_norm() == 5.0);
  std::vector<double> w{3.0, 7.0, 1.0};
  CHECK(s.dot(w) == 1.0);
  s.add_scaled_to(2.0, w);
  CHECK(w == std::vector<double>{5.0, 7.0, -3.0});
}

TEST_CASE("partition a single sample") {
  const auto data = testing::sized_dataset(1, 100000);
  const auto chunks = partition_into_chunks(data, 1024, 3);
  REQUIRE(chunks.size() == 1);
  CHECK(chunks[0].id == 0);
  CHECK(chunks[0].samples == data);
}

TEST_CASE("ten 100 KiB samples fill one 1 MiB chunk") {
  // 12·8532 + 16 = 102400 bytes with dual state
  const auto data = testing::sized_dataset(10, 8532);
  REQUIRE(sample_byte_size(data[0], StateLayout::Dual) == 100 * 1024);
  const auto chunks = partition_into_chunks(data, 1024 * 1024, 7, StateLayout::Dual);
  REQUIRE(chunks.size() == 1);
  CHECK(chunks[0].size() == 10);
  CHECK(chunks[0].byte_size() == 1000 * 1024);
  CHECK(chunks[0].has_state());
}

TEST_CASE("ten ~300 KiB samples pack 3+3+3+1") {
  // 307192 bytes each, 8 bytes short of 300 KiB
  const auto data = testing::sized_dataset(10, 25598);
  const std::size_t bytes = sample_byte_size(data[0], StateLayout::Dual);
  REQUIRE(bytes == 307192);
  const auto chunks = partition_into_chunks(data, 1024 * 1024, 7, StateLayout::Dual);
  std::vector<std::size_t> counts;
  for (const auto& c : chunks) counts.push_back(c.size());
  CHECK(counts == greedy_pack(std::vector<std::size_t>(10, bytes), 1024 * 1024));
  CHECK(counts == std::vector<std::size_t>{3, 3, 3, 1});
}

TEST_CASE("packing matches the greedy oracle and respects capacity") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto data = mixed_dataset(300, seed);
    const std::size_t capacity = 64 + seed * 37;
    const auto chunks = partition_into_chunks(data, capacity, seed);

    // replay the same shuffle through the oracle via the sample ids
    std::vector<std::size_t> sizes;
    std::vector<std::size_t> counts;
    for (std::size_t k = 0; k < chunks.size(); ++k) {
      CHECK(chunks[k].id == k);
      counts.push_back(chunks[k].size());
      for (const auto& s : chunks[k].samples) sizes.push_back(sample_byte_size(s));
      if (chunks[k].size() > 1) CHECK(chunks[k].byte_size() <= capacity);
    }
    CHECK(counts == greedy_pack(sizes, capacity));
    CHECK(oracle::id_multiset(chunks).size() == data.size());
    auto ids = oracle::id_multiset(chunks);
    for (std::size_t i = 0; i < ids.size(); ++i) CHECK(ids[i] == i);
  }
}

TEST_CASE("partitioning is deterministic per seed") {
  const auto data = mixed_dataset(200, 11);
  CHECK(partition_into_chunks(data, 300, 5) == partition_into_chunks(data, 300, 5));
  CHECK_FALSE(partition_into_chunks(data, 300, 5) == partition_into_chunks(data, 300, 6));
}

TEST_CASE("partition errors") {
  CHECK_ERROR_CODE(partition_into_chunks(std::vector<Sample>{}, 100, 1), ErrorCode::EmptyDataset);
  CHECK_ERROR_CODE(partition_into_chunks(testing::sized_dataset(2, 1), 0, 1), ErrorCode::ConfigError);
}

TEST_CASE("apply_moves") {
  ChunkAssignment a;
  a.add_worker(1);
  a.add_worker(2);
  for (ChunkId c = 0; c < 8; ++c) a.assign(c, c < 4 ? 1 : 2);

  SUBCASE("empty move list is the identity") { CHECK(apply_moves(a, {}, OwnershipPhase::SchedulerOwned) == a); }

  SUBCASE("single move changes one owner") {
    const std::vector<ChunkMove> moves{{5, 2, 1}};
    const auto b = apply_moves(a, moves, OwnershipPhase::SchedulerOwned);
    CHECK(b.owner(5) == 1);
    for (ChunkId c = 0; c < 8; ++c) {
      if (c != 5) CHECK(b.owner(c) == a.owner(c));
    }
  }

  SUBCASE("moves during an iteration violate the contract") {
    const std::vector<ChunkMove> moves{{5, 2, 1}};
    CHECK_ERROR_CODE(apply_moves(a, moves, OwnershipPhase::TaskOwned), ErrorCode::ContractViolation);
  }

  SUBCASE("wrong source owner") {
    const std::vector<ChunkMove> moves{{5, 1, 2}};
    CHECK_ERROR_CODE(apply_moves(a, moves, OwnershipPhase::SchedulerOwned), ErrorCode::InvalidMove);
  }

  SUBCASE("unregistered destination") {
    const std::vector<ChunkMove> moves{{5, 2, 9}};
    CHECK_ERROR_CODE(apply_moves(a, moves, OwnershipPhase::SchedulerOwned), ErrorCode::InvalidMove);
  }
}

TEST_CASE("random move sequences conserve samples") {
  const auto data = mixed_dataset(400, 3);
  const auto chunks = partition_into_chunks(data, 200, 3);
  const ChunkSizes sizes = chunk_sample_counts(chunks);
  ChunkAssignment a;
  for (WorkerId w = 0; w < 5; ++w) a.add_worker(w);
  for (const auto& c : chunks) a.assign(c.id, static_cast<WorkerId>(c.id % 5));

  std::mt19937_64 rng(99);
  for (int step = 0; step < 1000; ++step) {
    const ChunkId chunk = std::uniform_int_distribution<ChunkId>(0, chunks.size() - 1)(rng);
    const WorkerId to = std::uniform_int_distribution<WorkerId>(0, 4)(rng);
    const std::vector<ChunkMove> moves{{chunk, a.owner(chunk), to}};
    a = apply_moves(a, moves, OwnershipPhase::SchedulerOwned);
    std::size_t total = 0;
    for (WorkerId w = 0; w < 5; ++w) total += worker_sample_count(a, sizes, w);
    REQUIRE(total == data.size());
  }
  CHECK(a.owners().size() == chunks.size());
}

TEST_CASE("worker_sample_count") {
  ChunkAssignment a;
  a.add_worker(1);
  a.add_worker(2);
  a.assign(0, 1);
  a.assign(1, 1);
  const ChunkSizes sizes{{0, 3}, {1, 4}};
  CHECK(worker_sample_count(a, sizes, 1) == 7);
  CHECK(worker_sample_count(a, sizes, 2) == 0);
  CHECK_ERROR_CODE(worker_sample_count(a, sizes, 3), ErrorCode::UnknownWorker);
}

TEST_CASE("ownership contract state machine") {
  OwnershipContract c;
  CHECK(c.phase() == OwnershipPhase::SchedulerOwned);
  CHECK_ERROR_CODE(c.end_iteration(), ErrorCode::ContractViolation);
  c.begin_iteration();
  CHECK(c.phase() == OwnershipPhase::TaskOwned);
  CHECK_ERROR_CODE(c.begin_iteration(), ErrorCode::ContractViolation);
  CHECK_ERROR_CODE(c.require(OwnershipPhase::SchedulerOwned, "move"), ErrorCode::ContractViolation);
  c.end_iteration();
  CHECK(c.phase() == OwnershipPhase::SchedulerOwned);
}

TEST_CASE("assignment bookkeeping") {
  ChunkAssignment a;
  a.add_worker(3);
  CHECK_ERROR_CODE(a.assign(0, 4), ErrorCode::UnknownWorker);
  a.assign(0, 3);
  CHECK(a.chunks_of(3) == std::vector<ChunkId>{0});
  CHECK_ERROR_CODE(a.remove_worker(3), ErrorCode::InvalidMove);
  CHECK_ERROR_CODE(a.owner(7), ErrorCode::InvalidMove);
}

TEST_CASE("model finiteness and dimension") {
  Model m{{1.0, 2.0}, 0};
  CHECK(m.all_finite());
  m.weights[1] = std::numeric_limits<double>::infinity();
  CHECK_FALSE(m.all_finite());
  const std::vector<Sample> data{testing::dense_sample(0, {0, 0, 1}, 1), testing::dense_sample(1, {1}, -1)};
  CHECK(dimension_of(data) == 3);
}
