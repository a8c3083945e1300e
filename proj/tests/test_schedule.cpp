#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <random>

#include "hiercoll/schedule.hpp"

using namespace hiercoll;

namespace {

// Independent oracle: elementwise reduction over all ranks, ascending order.
template <typename T>
std::vector<T> serial_reduce(const std::vector<std::vector<T>>& inputs) {
  std::vector<T> out(inputs.front().size(), T{});
  for (const auto& v : inputs)
    for (std::size_t i = 0; i < v.size(); ++i) out[i] += v[i];
  return out;
}

template <typename T>
std::vector<std::vector<T>> random_inputs(int p, std::size_t n, std::mt19937_64& rng) {
  std::vector<std::vector<T>> inputs(static_cast<std::size_t>(p), std::vector<T>(n));
  if constexpr (std::is_integral_v<T>) {
    std::uniform_int_distribution<T> dist(-1000, 1000);
    for (auto& v : inputs)
      for (T& x : v) x = dist(rng);
  } else {
    std::uniform_real_distribution<T> dist(-1.0, 1.0);
    for (auto& v : inputs)
      for (T& x : v) x = dist(rng);
  }
  return inputs;
}

std::vector<std::uint64_t> sent_bytes_per_rank(const CommSchedule& schedule) {
  std::vector<std::uint64_t> sent(static_cast<std::size_t>(schedule.participants), 0);
  for (const auto& round : schedule.rounds)
    for (const Transfer& t : round)
      sent[static_cast<std::size_t>(t.src)] += t.block.length * schedule.elem_bytes;
  return sent;
}

} // namespace

TEST_CASE("reduce-scatter smallest case") {
  const CommSchedule schedule = reduce_scatter_schedule(2, 2, 8);
  REQUIRE(schedule.round_count() == 1);
  REQUIRE(schedule.rounds[0].size() == 2);
  for (const Transfer& t : schedule.rounds[0]) {
    CHECK(t.block.length == 1);
    CHECK(t.reduce_on_receive);
    CHECK(t.dst == (t.src ^ 1));
  }
  const std::vector<std::vector<double>> inputs = {{1, 2}, {10, 20}};
  const auto out = execute_schedule(schedule, inputs, ReduceOp::sum);
  CHECK(out[0][0] == 11.0); // rank 0 owns reduced element 0
  CHECK(out[1][1] == 22.0);
}

TEST_CASE("reduce-scatter halves distance and message size each round") {
  const std::size_t n = 64;
  const CommSchedule schedule = reduce_scatter_schedule(8, n, 4);
  REQUIRE(schedule.round_count() == 3);
  const int distances[] = {4, 2, 1};
  const std::size_t lengths[] = {n / 2, n / 4, n / 8};
  for (int k = 0; k < 3; ++k)
    for (const Transfer& t : schedule.rounds[static_cast<std::size_t>(k)]) {
      CHECK(std::abs(t.src - t.dst) == distances[k]);
      CHECK(t.block.length == lengths[k]);
    }
}

TEST_CASE("reduce-scatter with uneven blocks matches the brute-force oracle") {
  const int p = 4;
  const std::size_t n = 7;
  const CommSchedule schedule = reduce_scatter_schedule(p, n, 4);

  const std::size_t expected_sizes[] = {2, 2, 2, 1};
  for (int r = 0; r < p; ++r)
    CHECK(block_partition(n, p, r).length == expected_sizes[r]);

  std::mt19937_64 rng(7);
  const auto inputs = random_inputs<std::int64_t>(p, n, rng);
  const auto oracle = serial_reduce(inputs);
  const auto out = execute_schedule(schedule, inputs, ReduceOp::sum);
  for (int r = 0; r < p; ++r) {
    const BlockRange owned = owned_block_after_reduce_scatter(schedule, r);
    for (std::size_t i = 0; i < owned.length; ++i)
      CHECK(out[static_cast<std::size_t>(r)][owned.offset + i] == oracle[owned.offset + i]);
  }

  // Sent bytes are exactly the enumerated exchanged blocks.
  const auto sent = sent_bytes_per_rank(schedule);
  for (int r = 0; r < p; ++r) {
    std::uint64_t enumerated = 0;
    for (const auto& round : schedule.rounds)
      for (const Transfer& t : round)
        if (t.src == r) enumerated += t.block.length * schedule.elem_bytes;
    CHECK(sent[static_cast<std::size_t>(r)] == enumerated);
  }
}

TEST_CASE("allgather replicates owned blocks to everyone") {
  const CommSchedule schedule = allgather_schedule(2, 2, 8);
  REQUIRE(schedule.round_count() == 1);
  // Entry state: rank r holds its reduced block, zero elsewhere.
  const std::vector<std::vector<double>> entry = {{5, 0}, {0, 9}};
  const auto out = execute_schedule(schedule, entry, ReduceOp::sum);
  for (const auto& v : out) CHECK(v == std::vector<double>{5, 9});
}

TEST_CASE("allgather doubles distance and message size, ending at n/2") {
  const std::size_t n = 64;
  const CommSchedule schedule = allgather_schedule(8, n, 4);
  REQUIRE(schedule.round_count() == 3);
  for (const Transfer& t : schedule.rounds.back()) {
    CHECK(std::abs(t.src - t.dst) == 4);
    CHECK(t.block.length == n / 2);
    CHECK_FALSE(t.reduce_on_receive);
  }
}

TEST_CASE("allgather received bytes sum to elem_bytes*n*(p-1)/p") {
  const CommSchedule schedule = allgather_schedule(4, 8, 1);
  std::vector<std::uint64_t> received(4, 0);
  for (const auto& round : schedule.rounds)
    for (const Transfer& t : round)
      received[static_cast<std::size_t>(t.dst)] += t.block.length * schedule.elem_bytes;
  for (std::uint64_t bytes : received) CHECK(bytes == 6);
}

TEST_CASE("allreduce round counts") {
  CHECK(allreduce_schedule(1, 16, 4).round_count() == 0);
  CHECK(allreduce_schedule(8, 16, 4).round_count() == 6);
}

TEST_CASE("allreduce per-rank exchanged bytes for p=16, n=16") {
  const CommSchedule schedule = allreduce_schedule(16, 16, 1);
  for (std::uint64_t bytes : sent_bytes_per_rank(schedule)) CHECK(bytes == 30);
}

TEST_CASE("ring allreduce structure") {
  CHECK(ring_allreduce_schedule(1, 8, 4).round_count() == 0);

  const std::size_t n = 16;
  const CommSchedule ring = ring_allreduce_schedule(4, n, 4);
  REQUIRE(ring.round_count() == 6);
  for (const auto& round : ring.rounds)
    for (const Transfer& t : round) {
      CHECK(t.block.length == n / 4);
      CHECK(t.dst == (t.src + 1) % 4);
    }

  CHECK(ring_allreduce_schedule(8, n, 4).round_count() == 14);
  CHECK(allreduce_schedule(8, n, 4).round_count() == 6);
}

TEST_CASE("ring allreduce also handles non-power-of-two participant counts") {
  std::mt19937_64 rng(31);
  for (int p : {3, 5, 6, 7}) {
    const std::size_t n = 11;
    const CommSchedule ring = ring_allreduce_schedule(p, n, 8);
    CHECK(ring.round_count() == 2 * static_cast<std::size_t>(p - 1));
    const auto inputs = random_inputs<std::int64_t>(p, n, rng);
    const auto oracle = serial_reduce(inputs);
    for (const auto& v : execute_schedule(ring, inputs, ReduceOp::sum)) REQUIRE(v == oracle);
  }
}

TEST_CASE("execute_schedule basic reductions") {
  const CommSchedule schedule = allreduce_schedule(2, 2, 8);
  const std::vector<std::vector<double>> inputs = {{1, 2}, {3, 4}};
  const auto out = execute_schedule(schedule, inputs, ReduceOp::sum);
  CHECK(out[0] == std::vector<double>{4, 6});
  CHECK(out[1] == std::vector<double>{4, 6});

  std::mt19937_64 rng(11);
  const auto random = random_inputs<std::int64_t>(4, 9, rng);
  const auto reduced = execute_schedule(allreduce_schedule(4, 9, 8), random, ReduceOp::sum);
  const auto oracle = serial_reduce(random);
  for (const auto& v : reduced) CHECK(v == oracle);

  const std::vector<std::vector<double>> ones(8, std::vector<double>(5, 1.0));
  const auto averaged = execute_schedule(allreduce_schedule(8, 5, 8), ones, ReduceOp::average);
  for (const auto& v : averaged) CHECK(v == std::vector<double>(5, 1.0));
}

TEST_CASE("execute_schedule validates shapes") {
  const CommSchedule schedule = allreduce_schedule(2, 4, 8);
  CHECK_THROWS_AS(execute_schedule(schedule, std::vector<std::vector<double>>{{1, 2, 3, 4}},
                                   ReduceOp::sum),
                  std::invalid_argument);
  CHECK_THROWS_AS(execute_schedule(schedule, std::vector<std::vector<double>>{{1, 2}, {3, 4}},
                                   ReduceOp::sum),
                  std::invalid_argument);
  CHECK_THROWS_AS(reduce_scatter_schedule(6, 4, 8), std::invalid_argument);
  CHECK_THROWS_AS(allgather_schedule(12, 4, 8), std::invalid_argument);
  CHECK_THROWS_AS(reduce_op_from_string("max"), std::invalid_argument);
}

TEST_CASE("tree and ring allreduce match the serial oracle across sizes") {
  std::mt19937_64 rng(2024);
  const double tol = std::ldexp(1.0, -40);
  for (int p = 2; p <= 64; p *= 2) {
    for (std::size_t n : {static_cast<std::size_t>(1), static_cast<std::size_t>(p - 1),
                          static_cast<std::size_t>(p + 3), static_cast<std::size_t>(97)}) {
      const auto ints = random_inputs<std::int64_t>(p, n, rng);
      const auto int_oracle = serial_reduce(ints);
      const auto reals = random_inputs<double>(p, n, rng);
      const auto real_oracle = serial_reduce(reals);
      // Error is relative to the summed input magnitude, which stays
      // meaningful when the true sum cancels toward zero.
      std::vector<double> scale(n, 0.0);
      for (const auto& v : reals)
        for (std::size_t i = 0; i < n; ++i) scale[i] += std::abs(v[i]);
      for (const CommSchedule& schedule :
           {allreduce_schedule(p, n, 8), ring_allreduce_schedule(p, n, 8)}) {
        for (const auto& v : execute_schedule(schedule, ints, ReduceOp::sum))
          REQUIRE(v == int_oracle);
        for (const auto& v : execute_schedule(schedule, reals, ReduceOp::sum))
          for (std::size_t i = 0; i < n; ++i)
            REQUIRE(std::abs(v[i] - real_oracle[i]) <= tol * std::max(scale[i], 1e-300));
      }
    }
  }
}

TEST_CASE("every round pairs ranks at most once as src and dst") {
  for (int p : {2, 8, 32})
    for (const CommSchedule& schedule :
         {allreduce_schedule(p, 33, 4), ring_allreduce_schedule(p, 33, 4)})
      for (const auto& round : schedule.rounds) {
        std::vector<int> as_src(static_cast<std::size_t>(p), 0);
        std::vector<int> as_dst(static_cast<std::size_t>(p), 0);
        for (const Transfer& t : round) {
          REQUIRE(t.src != t.dst);
          REQUIRE(++as_src[static_cast<std::size_t>(t.src)] == 1);
          REQUIRE(++as_dst[static_cast<std::size_t>(t.dst)] == 1);
        }
      }
}

TEST_CASE("owned blocks after reduce-scatter tile the payload") {
  for (int p : {2, 16, 64})
    for (std::size_t n : {static_cast<std::size_t>(p), static_cast<std::size_t>(131)}) {
      const CommSchedule schedule = reduce_scatter_schedule(p, n, 4);
      std::size_t expected_offset = 0;
      for (int r = 0; r < p; ++r) {
        const BlockRange owned = owned_block_after_reduce_scatter(schedule, r);
        REQUIRE(owned.offset == expected_offset);
        expected_offset += owned.length;
      }
      REQUIRE(expected_offset == n);
    }
}

TEST_CASE("empty payloads keep the round structure") {
  const CommSchedule schedule = allreduce_schedule(8, 0, 4);
  REQUIRE(schedule.round_count() == 6);
  for (const auto& round : schedule.rounds) {
    REQUIRE(round.size() == 8);
    for (const Transfer& t : round) CHECK(t.block.length == 0);
  }
}

TEST_CASE("schedule JSON matches the golden file") {
  const CommSchedule schedule = allreduce_schedule(4, 4, 4);
  std::ifstream in(std::string(HIERCOLL_TESTS_DIR) + "/golden/allreduce_p4_n4.json");
  REQUIRE(in.good());
  nlohmann::json golden;
  in >> golden;
  CHECK(schedule_to_json(schedule) == golden);
}
