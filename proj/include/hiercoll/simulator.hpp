#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include "hiercoll/cost_model.hpp"
#include "hiercoll/schedule.hpp"
#include "hiercoll/topology.hpp"

namespace hiercoll {

/// fixed_beta charges every cross transfer beta2 per byte, mirroring the
/// closed-form model. contention instead divides the supernode uplink among
/// the cross transfers concurrently leaving it.
enum class SimMode { fixed_beta, contention };

inline SimMode sim_mode_from_string(const std::string& name) {
  if (name == "fixed_beta") return SimMode::fixed_beta;
  if (name == "contention") return SimMode::contention;
  throw std::invalid_argument("unknown sim mode '" + name +
                              "' (expected fixed_beta or contention)");
}

inline std::string to_string(SimMode mode) {
  return mode == SimMode::fixed_beta ? "fixed_beta" : "contention";
}

/// FNV-1a over raw bytes; used to fingerprint payload vectors.
inline std::uint64_t fnv1a64(const void* data, std::size_t size,
                             std::uint64_t seed = 0xcbf29ce484222325ull) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t checksum_payloads(const std::vector<std::vector<double>>& payloads) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& v : payloads)
    if (!v.empty()) h = fnv1a64(v.data(), v.size() * sizeof(double), h);
  return h;
}

/// Timing and traffic produced by one simulated schedule execution.
struct SimReport {
  double total_time = 0;                         // sum of round times
  std::vector<double> round_times;               // seconds per round
  std::vector<std::uint64_t> per_rank_intra_bytes; // sent bytes per rank
  std::vector<std::uint64_t> per_rank_cross_bytes;
  std::uint64_t reduced_bytes = 0;               // bytes combined on receive, all ranks
  std::uint64_t payload_checksum = 0;            // 0 when no payloads were run
  std::vector<std::vector<double>> final_payloads; // empty when no inputs given
};

/// Round-synchronized execution of a schedule on a topology.
///
/// A round costs the maximum over its transfers of
///   alpha + beta_link * bytes (+ gamma * bytes when reducing on receive),
/// with beta_link = beta1 on intra links and, for cross links, beta2 in
/// fixed_beta mode or beta1 * max(1, m / (q * oversub_factor)) in contention
/// mode, m being the cross transfers concurrently leaving the sender's
/// supernode. Exchanges are full-duplex: send and receive of one pairwise
/// exchange overlap and are counted once.
///
/// When inputs are provided the final payloads (and their checksum) are the
/// exact vectors execute_schedule would produce with ReduceOp::sum.
inline SimReport simulate(const CommSchedule& schedule, const TopologySpec& topology,
                          const RankMapping& mapping, SimMode mode,
                          const std::vector<std::vector<double>>* inputs = nullptr) {
  if (schedule.participants != topology.p)
    throw std::invalid_argument("simulate: schedule has " +
                                std::to_string(schedule.participants) + " participants but topology.p = " +
                                std::to_string(topology.p));
  if (mapping.size() != topology.p)
    throw std::invalid_argument("simulate: mapping covers " + std::to_string(mapping.size()) +
                                " ranks but topology.p = " + std::to_string(topology.p));

  const auto p = static_cast<std::size_t>(topology.p);
  SimReport report;
  report.round_times.reserve(schedule.rounds.size());
  report.per_rank_intra_bytes.assign(p, 0);
  report.per_rank_cross_bytes.assign(p, 0);

  const double uplink_share = static_cast<double>(topology.q) * topology.oversub_factor;
  std::vector<int> cross_leaving(static_cast<std::size_t>(topology.supernode_count), 0);

  for (const auto& round : schedule.rounds) {
    if (mode == SimMode::contention) {
      std::fill(cross_leaving.begin(), cross_leaving.end(), 0);
      for (const Transfer& t : round)
        if (link_class(mapping, t.src, t.dst) == LinkClass::cross)
          ++cross_leaving[static_cast<std::size_t>(mapping.supernode_of(t.src))];
    }

    double round_time = 0;
    for (const Transfer& t : round) {
      const double bytes =
          static_cast<double>(t.block.length) * static_cast<double>(schedule.elem_bytes);
      const LinkClass link = link_class(mapping, t.src, t.dst);
      double beta = topology.beta1;
      if (link == LinkClass::cross) {
        if (mode == SimMode::fixed_beta) {
          beta = topology.beta2;
        } else {
          const int m = cross_leaving[static_cast<std::size_t>(mapping.supernode_of(t.src))];
          beta = topology.beta1 * std::max(1.0, static_cast<double>(m) / uplink_share);
        }
        report.per_rank_cross_bytes[static_cast<std::size_t>(t.src)] +=
            static_cast<std::uint64_t>(t.block.length) * schedule.elem_bytes;
      } else {
        report.per_rank_intra_bytes[static_cast<std::size_t>(t.src)] +=
            static_cast<std::uint64_t>(t.block.length) * schedule.elem_bytes;
      }
      double elapsed = topology.alpha + beta * bytes;
      if (t.reduce_on_receive) {
        elapsed += topology.gamma * bytes;
        report.reduced_bytes += static_cast<std::uint64_t>(t.block.length) * schedule.elem_bytes;
      }
      round_time = std::max(round_time, elapsed);
    }
    report.round_times.push_back(round_time);
    report.total_time += round_time;
  }

  if (inputs != nullptr) {
    report.final_payloads = execute_schedule(schedule, *inputs, ReduceOp::sum);
    report.payload_checksum = checksum_payloads(report.final_payloads);
  }
  return report;
}

/// One grid point of the analytic cross-check.
struct ValidationPoint {
  int p = 0;
  int q = 0;
  std::uint64_t n = 0;
  MappingKind mapping = MappingKind::contiguous;
  double simulated = 0;
  double analytic = 0;
  double rel_diff = 0;
};

struct ValidationReport {
  double max_rel_diff = 0;
  std::vector<ValidationPoint> points;
};

/// Sweeps (p, q, n) over all power-of-two q | p, runs the fixed_beta
/// simulation of the tree allreduce under both mappings and compares against
/// the matching closed form. Agreement within 1e-9 relative is the contract.
inline ValidationReport validate_against_analytic(const std::vector<int>& node_counts,
                                                  const std::vector<std::uint64_t>& payload_bytes,
                                                  double alpha, double beta1, double beta2,
                                                  double gamma) {
  ValidationReport report;
  for (int p : node_counts) {
    for (int q = 1; q <= p; q *= 2) {
      if (p % q != 0) continue;
      const TopologySpec topo = build_topology(p, q, alpha, beta1, beta2, gamma, 0.25);
      for (std::uint64_t n : payload_bytes) {
        const CommSchedule schedule = allreduce_schedule(p, n, 1);
        for (MappingKind kind : {MappingKind::contiguous, MappingKind::round_robin}) {
          const RankMapping mapping = make_mapping(topo, kind);
          const SimReport sim = simulate(schedule, topo, mapping, SimMode::fixed_beta);
          const CostParams params = CostParams::from_topology(topo, static_cast<double>(n));
          const double analytic = cost_allreduce(params, variant_for(kind)).total;
          const double denom = std::max(std::abs(analytic), 1e-300);
          ValidationPoint point{p,          q,        n, kind, sim.total_time, analytic,
                                std::abs(sim.total_time - analytic) / denom};
          report.max_rel_diff = std::max(report.max_rel_diff, point.rel_diff);
          report.points.push_back(point);
        }
      }
    }
  }
  return report;
}

} // namespace hiercoll
