#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hiercoll/topology.hpp"

#include <nlohmann/json.hpp>

namespace hiercoll {

/// Contiguous element interval [offset, offset + length) of the payload.
struct BlockRange {
  std::size_t offset = 0;
  std::size_t length = 0;
};

/// One point-to-point message within a round. When reduce_on_receive is set
/// the receiver combines the incoming data with its local values instead of
/// overwriting them.
struct Transfer {
  int src = 0;
  int dst = 0;
  BlockRange block;
  bool reduce_on_receive = false;
};

/// An ordered list of globally synchronized rounds. Within a round every rank
/// is the source of at most one transfer and the destination of at most one,
/// and round k+1 starts only after every transfer of round k has completed.
struct CommSchedule {
  int participants = 1;
  std::size_t elem_count = 0;
  std::size_t elem_bytes = 1;
  std::vector<std::vector<Transfer>> rounds;

  std::size_t round_count() const { return rounds.size(); }
};

enum class ReduceOp { sum, average };

inline ReduceOp reduce_op_from_string(const std::string& name) {
  if (name == "sum") return ReduceOp::sum;
  if (name == "average") return ReduceOp::average;
  throw std::invalid_argument("unknown reduction op '" + name + "' (expected sum or average)");
}

/// Even-as-possible partition of n elements into p blocks: the first
/// n mod p blocks are one element longer.
inline BlockRange block_partition(std::size_t n, int p, int block) {
  const std::size_t base = n / static_cast<std::size_t>(p);
  const std::size_t extra = n % static_cast<std::size_t>(p);
  const auto b = static_cast<std::size_t>(block);
  BlockRange range;
  range.offset = b * base + std::min(b, extra);
  range.length = base + (b < extra ? 1 : 0);
  return range;
}

/// Element interval covered by the block indices [lo, hi).
inline BlockRange block_span(std::size_t n, int p, int lo, int hi) {
  const BlockRange first = block_partition(n, p, lo);
  const BlockRange last = block_partition(n, p, hi - 1);
  return {first.offset, last.offset + last.length - first.offset};
}

/// Block each rank owns (fully reduced) once a reduce-scatter has run.
inline BlockRange owned_block_after_reduce_scatter(const CommSchedule& schedule, int rank) {
  return block_partition(schedule.elem_count, schedule.participants, rank);
}

namespace detail {
inline void require_power_of_two(int p) {
  if (p <= 0 || !is_power_of_two(static_cast<std::uint64_t>(p)))
    throw std::invalid_argument("participant count must be a power of two, got " +
                                std::to_string(p));
}
} // namespace detail

/// Recursive-halving reduce-scatter.
///
/// log2(p) rounds; in round k each rank exchanges roughly n/2^(k+1) elements
/// with the rank at distance p/2^(k+1) (partner = rank XOR distance, so the
/// exchange stays within the current half). After execution rank r holds the
/// fully reduced block r of the n/p partition.
inline CommSchedule reduce_scatter_schedule(int p, std::size_t n_elems, std::size_t elem_bytes) {
  detail::require_power_of_two(p);
  CommSchedule schedule;
  schedule.participants = p;
  schedule.elem_count = n_elems;
  schedule.elem_bytes = elem_bytes;

  const int steps = log2_exact(static_cast<std::uint64_t>(p));
  // Per-rank window of still-contested block indices, narrowing to [r, r+1).
  std::vector<int> lo(static_cast<std::size_t>(p), 0);
  std::vector<int> hi(static_cast<std::size_t>(p), p);
  for (int k = 0; k < steps; ++k) {
    const int distance = p >> (k + 1);
    std::vector<Transfer>& round = schedule.rounds.emplace_back();
    round.reserve(static_cast<std::size_t>(p));
    for (int r = 0; r < p; ++r) {
      const int partner = r ^ distance;
      const auto ur = static_cast<std::size_t>(r);
      const int half = (hi[ur] - lo[ur]) / 2;
      // Send the half of the window that contains the partner's block.
      const bool r_in_upper = (r & distance) != 0;
      const int send_lo = r_in_upper ? lo[ur] : lo[ur] + half;
      const int send_hi = r_in_upper ? lo[ur] + half : hi[ur];
      round.push_back({r, partner, block_span(n_elems, p, send_lo, send_hi), true});
      if (r_in_upper)
        lo[ur] += half;
      else
        hi[ur] -= half;
    }
  }
  return schedule;
}

/// Recursive-doubling allgather, assuming the entry state left by
/// reduce_scatter_schedule (rank r holds block r).
///
/// log2(p) rounds; round k exchanges the 2^k blocks owned so far with the
/// rank at distance 2^k, doubling ownership until every rank holds all
/// n elements.
inline CommSchedule allgather_schedule(int p, std::size_t n_elems, std::size_t elem_bytes) {
  detail::require_power_of_two(p);
  CommSchedule schedule;
  schedule.participants = p;
  schedule.elem_count = n_elems;
  schedule.elem_bytes = elem_bytes;

  const int steps = log2_exact(static_cast<std::uint64_t>(p));
  for (int k = 0; k < steps; ++k) {
    const int distance = 1 << k;
    std::vector<Transfer>& round = schedule.rounds.emplace_back();
    round.reserve(static_cast<std::size_t>(p));
    for (int r = 0; r < p; ++r) {
      const int partner = r ^ distance;
      // Aligned group of blocks accumulated in rounds 0..k-1.
      const int own_lo = r & ~(distance - 1);
      round.push_back({r, partner, block_span(n_elems, p, own_lo, own_lo + distance), false});
    }
  }
  return schedule;
}

/// Reduce-scatter followed by allgather: 2*log2(p) rounds in total.
inline CommSchedule allreduce_schedule(int p, std::size_t n_elems, std::size_t elem_bytes) {
  CommSchedule schedule = reduce_scatter_schedule(p, n_elems, elem_bytes);
  CommSchedule gather = allgather_schedule(p, n_elems, elem_bytes);
  schedule.rounds.insert(schedule.rounds.end(), gather.rounds.begin(), gather.rounds.end());
  return schedule;
}

/// Classic ring allreduce: p-1 reduce-scatter rounds plus p-1 allgather
/// rounds, each rank pushing one n/p block to its successor per round.
/// Latency-bound (2(p-1) rounds) but kept as the comparison baseline.
inline CommSchedule ring_allreduce_schedule(int p, std::size_t n_elems, std::size_t elem_bytes) {
  if (p <= 0) throw std::invalid_argument("participant count must be >= 1");
  CommSchedule schedule;
  schedule.participants = p;
  schedule.elem_count = n_elems;
  schedule.elem_bytes = elem_bytes;
  if (p == 1) return schedule;

  for (int k = 0; k < p - 1; ++k) {
    std::vector<Transfer>& round = schedule.rounds.emplace_back();
    round.reserve(static_cast<std::size_t>(p));
    for (int r = 0; r < p; ++r) {
      const int block = ((r - k) % p + p) % p;
      round.push_back({r, (r + 1) % p, block_partition(n_elems, p, block), true});
    }
  }
  for (int k = 0; k < p - 1; ++k) {
    std::vector<Transfer>& round = schedule.rounds.emplace_back();
    round.reserve(static_cast<std::size_t>(p));
    for (int r = 0; r < p; ++r) {
      const int block = ((r + 1 - k) % p + p) % p;
      round.push_back({r, (r + 1) % p, block_partition(n_elems, p, block), false});
    }
  }
  return schedule;
}

/// Runs a schedule on explicit per-rank payload vectors.
///
/// Round semantics are synchronized: every send reads the sender's state from
/// before the round. Reduce-on-receive merges received-then-local when the
/// sender's rank is lower, local-then-received otherwise, which fixes the
/// floating-point summation tree and makes results bit-identical across runs.
/// ReduceOp::average runs as a sum and divides by p at the end.
template <typename T>
std::vector<std::vector<T>> execute_schedule(const CommSchedule& schedule,
                                             const std::vector<std::vector<T>>& inputs,
                                             ReduceOp op) {
  const int p = schedule.participants;
  if (static_cast<int>(inputs.size()) != p)
    throw std::invalid_argument("execute_schedule: expected " + std::to_string(p) +
                                " input vectors, got " + std::to_string(inputs.size()));
  for (const auto& v : inputs)
    if (v.size() != schedule.elem_count)
      throw std::invalid_argument("execute_schedule: every input vector must have " +
                                  std::to_string(schedule.elem_count) + " elements, got " +
                                  std::to_string(v.size()));

  std::vector<std::vector<T>> state = inputs;
  std::vector<T> staged;
  for (const std::vector<Transfer>& round : schedule.rounds) {
    // Snapshot all sends, then deliver; a buffer updated by this round's
    // receive must not leak into this round's sends.
    std::vector<std::pair<const Transfer*, std::size_t>> staging;
    staging.reserve(round.size());
    std::size_t total = 0;
    for (const Transfer& t : round) {
      staging.emplace_back(&t, total);
      total += t.block.length;
    }
    staged.resize(total);
    for (const auto& [t, at] : staging) {
      const auto& src = state[static_cast<std::size_t>(t->src)];
      std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(t->block.offset), t->block.length,
                  staged.begin() + static_cast<std::ptrdiff_t>(at));
    }
    for (const auto& [t, at] : staging) {
      auto& dst = state[static_cast<std::size_t>(t->dst)];
      const T* recv = staged.data() + at;
      T* local = dst.data() + t->block.offset;
      if (t->reduce_on_receive) {
        if (t->src < t->dst)
          for (std::size_t i = 0; i < t->block.length; ++i) local[i] = recv[i] + local[i];
        else
          for (std::size_t i = 0; i < t->block.length; ++i) local[i] = local[i] + recv[i];
      } else {
        std::copy_n(recv, t->block.length, local);
      }
    }
  }

  if (op == ReduceOp::average) {
    for (auto& v : state)
      for (T& x : v) x = x / static_cast<T>(p);
  }
  return state;
}

/// JSON dump (rounds -> transfers) for inspection and golden-file tests.
inline nlohmann::json schedule_to_json(const CommSchedule& schedule) {
  nlohmann::json rounds = nlohmann::json::array();
  for (const auto& round : schedule.rounds) {
    nlohmann::json entries = nlohmann::json::array();
    for (const Transfer& t : round)
      entries.push_back({{"src", t.src},
                         {"dst", t.dst},
                         {"offset", t.block.offset},
                         {"length", t.block.length},
                         {"reduce", t.reduce_on_receive}});
    rounds.push_back(std::move(entries));
  }
  return {{"p", schedule.participants},
          {"n_elems", schedule.elem_count},
          {"elem_bytes", schedule.elem_bytes},
          {"rounds", std::move(rounds)}};
}

} // namespace hiercoll
