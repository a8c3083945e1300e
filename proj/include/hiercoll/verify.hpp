#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "hiercoll/cost_model.hpp"
#include "hiercoll/io_model.hpp"
#include "hiercoll/report.hpp"
#include "hiercoll/schedule.hpp"
#include "hiercoll/simulator.hpp"
#include "hiercoll/topology.hpp"
#include "hiercoll/training.hpp"

namespace hiercoll {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace verify_detail {

inline std::vector<int> power_of_two_range(int lo, int hi) {
  std::vector<int> values;
  for (int p = lo; p <= hi; p *= 2) values.push_back(p);
  return values;
}

/// Reference elementwise reduction, summed in ascending rank order.
template <typename T>
std::vector<T> serial_reduce(const std::vector<std::vector<T>>& inputs, ReduceOp op) {
  std::vector<T> out(inputs.front().size(), T{});
  for (const auto& v : inputs)
    for (std::size_t i = 0; i < v.size(); ++i) out[i] += v[i];
  if (op == ReduceOp::average)
    for (T& x : out) x = x / static_cast<T>(inputs.size());
  return out;
}

inline bool mapping_is_balanced_bijection(const RankMapping& mapping, int p, int q) {
  if (mapping.size() != p) return false;
  std::set<std::pair<int, int>> seen;
  std::vector<int> occupancy(static_cast<std::size_t>(p / q), 0);
  for (int r = 0; r < p; ++r) {
    const int sn = mapping.supernode_of(r);
    const int slot = mapping.slot_of(r);
    if (sn < 0 || sn >= p / q || slot < 0 || slot >= q) return false;
    if (!seen.emplace(sn, slot).second) return false;
    ++occupancy[static_cast<std::size_t>(sn)];
  }
  for (int count : occupancy)
    if (count != q) return false;
  return true;
}

inline bool round_is_valid_pairing(const std::vector<Transfer>& round, int p) {
  std::vector<int> as_src(static_cast<std::size_t>(p), 0), as_dst(static_cast<std::size_t>(p), 0);
  for (const Transfer& t : round) {
    if (t.src == t.dst || t.src < 0 || t.src >= p || t.dst < 0 || t.dst >= p) return false;
    if (++as_src[static_cast<std::size_t>(t.src)] > 1) return false;
    if (++as_dst[static_cast<std::size_t>(t.dst)] > 1) return false;
  }
  return true;
}

template <typename Body>
CheckResult run_check(const std::string& name, Body&& body) {
  CheckResult result;
  result.name = name;
  try {
    result.detail = body(result.passed);
  } catch (const std::exception& e) {
    result.passed = false;
    result.detail = std::string("exception: ") + e.what();
  }
  return result;
}

} // namespace verify_detail

/// Runs the whole invariant suite. Deterministic for a fixed seed; every
/// check reports one line. Grouped per module below.
inline std::vector<CheckResult> run_verification_suite(std::uint64_t seed) {
  using namespace verify_detail;
  std::vector<CheckResult> results;

  const std::vector<int> node_grid = power_of_two_range(2, 64);

  results.push_back(run_check("topology.mapping_bijection_balance", [&](bool& ok) {
    ok = true;
    for (int p : node_grid)
      for (int q = 1; q <= p; q *= 2) {
        const TopologySpec topo = build_topology(p, q, 1e-5, 1.0, 4.0, 0.0, 0.25);
        ok = ok && mapping_is_balanced_bijection(contiguous_mapping(topo), p, q);
        ok = ok && mapping_is_balanced_bijection(round_robin_mapping(topo), p, q);
      }
    return std::string("all power-of-two (p, q) pairs up to p = 64");
  }));

  results.push_back(run_check("topology.round_robin_degenerates_to_contiguous", [&](bool& ok) {
    ok = true;
    for (int p : node_grid) {
      const TopologySpec topo = build_topology(p, p, 1e-5, 1.0, 4.0, 0.0, 0.25);
      const RankMapping a = contiguous_mapping(topo);
      const RankMapping b = round_robin_mapping(topo);
      for (int r = 0; r < p; ++r)
        ok = ok && a.supernode_of(r) == b.supernode_of(r) && a.slot_of(r) == b.slot_of(r);
    }
    return std::string("S = 1 mappings coincide elementwise");
  }));

  results.push_back(run_check("topology.link_class_symmetry_and_strides", [&](bool& ok) {
    ok = true;
    for (int p : node_grid)
      for (int q = 1; q <= p; q *= 2) {
        const TopologySpec topo = build_topology(p, q, 1e-5, 1.0, 4.0, 0.0, 0.25);
        const int s = topo.supernode_count;
        for (const RankMapping& m : {contiguous_mapping(topo), round_robin_mapping(topo)})
          for (int a = 0; a < p; ++a)
            for (int b = a + 1; b < p; ++b)
              ok = ok && link_class(m, a, b) == link_class(m, b, a);
        const RankMapping rr = round_robin_mapping(topo);
        for (int r = 0; r < p; ++r)
          for (int d = s; r + d < p; d += s)
            ok = ok && link_class(rr, r, r + d) == LinkClass::intra;
      }
    return std::string("symmetry and round-robin stride-multiple-of-S locality");
  }));

  results.push_back(run_check("collectives.round_counts", [&](bool& ok) {
    ok = true;
    for (int p : node_grid) {
      ok = ok && allreduce_schedule(p, 64, 4).round_count() ==
                     2 * static_cast<std::size_t>(log2_exact(static_cast<std::uint64_t>(p)));
      ok = ok && ring_allreduce_schedule(p, 64, 4).round_count() ==
                     2 * static_cast<std::size_t>(p - 1);
    }
    ok = ok && allreduce_schedule(1, 64, 4).round_count() == 0;
    ok = ok && ring_allreduce_schedule(1, 64, 4).round_count() == 0;
    return std::string("tree 2*log2(p) rounds, ring 2(p-1) rounds, p = 1 empty");
  }));

  results.push_back(run_check("collectives.pairing_validity", [&](bool& ok) {
    ok = true;
    for (int p : node_grid)
      for (const CommSchedule& schedule :
           {allreduce_schedule(p, 257, 4), ring_allreduce_schedule(p, 257, 4)})
        for (const auto& round : schedule.rounds)
          ok = ok && round_is_valid_pairing(round, p);
    return std::string("every round is a permutation pairing");
  }));

  results.push_back(run_check("collectives.reduce_scatter_ownership_cover", [&](bool& ok) {
    ok = true;
    for (int p : node_grid)
      for (std::size_t n : {static_cast<std::size_t>(p), static_cast<std::size_t>(257)}) {
        const CommSchedule schedule = reduce_scatter_schedule(p, n, 4);
        std::size_t covered = 0;
        std::size_t expected_offset = 0;
        for (int r = 0; r < p; ++r) {
          const BlockRange block = owned_block_after_reduce_scatter(schedule, r);
          ok = ok && block.offset == expected_offset;
          expected_offset += block.length;
          covered += block.length;
        }
        ok = ok && covered == n && expected_offset == n;
      }
    return std::string("owned blocks tile [0, n) disjointly");
  }));

  results.push_back(run_check("collectives.byte_conservation", [&](bool& ok) {
    ok = true;
    for (int p : node_grid) {
      const std::size_t n = static_cast<std::size_t>(p) * 8;
      const std::size_t elem_bytes = 4;
      const std::uint64_t expected = elem_bytes * n * static_cast<std::uint64_t>(p - 1) /
                                     static_cast<std::uint64_t>(p);
      for (const CommSchedule& schedule :
           {reduce_scatter_schedule(p, n, elem_bytes), allgather_schedule(p, n, elem_bytes)}) {
        std::vector<std::uint64_t> sent(static_cast<std::size_t>(p), 0);
        for (const auto& round : schedule.rounds)
          for (const Transfer& t : round)
            sent[static_cast<std::size_t>(t.src)] += t.block.length * elem_bytes;
        for (std::uint64_t bytes : sent) ok = ok && bytes == expected;
      }
    }
    return std::string("per-rank sent bytes = elem_bytes*n*(p-1)/p for both phases");
  }));

  results.push_back(run_check("collectives.reduction_matches_serial_oracle", [&](bool& ok) {
    ok = true;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::int64_t> ints(-1000, 1000);
    std::uniform_real_distribution<double> reals(-1.0, 1.0);
    for (int p : node_grid) {
      for (std::size_t n : {static_cast<std::size_t>(1), static_cast<std::size_t>(p + 1),
                            static_cast<std::size_t>(100)}) {
        std::vector<std::vector<std::int64_t>> int_inputs(static_cast<std::size_t>(p));
        std::vector<std::vector<double>> real_inputs(static_cast<std::size_t>(p));
        for (int r = 0; r < p; ++r) {
          auto& iv = int_inputs[static_cast<std::size_t>(r)];
          auto& rv = real_inputs[static_cast<std::size_t>(r)];
          iv.resize(n);
          rv.resize(n);
          for (std::size_t i = 0; i < n; ++i) {
            iv[i] = ints(rng);
            rv[i] = reals(rng);
          }
        }
        // Error relative to the summed input magnitude: robust to cancellation.
        std::vector<double> scale(n, 0.0);
        for (const auto& v : real_inputs)
          for (std::size_t i = 0; i < n; ++i) scale[i] += std::abs(v[i]);
        for (const CommSchedule& schedule :
             {allreduce_schedule(p, n, 8), ring_allreduce_schedule(p, n, 8)}) {
          const auto int_out = execute_schedule(schedule, int_inputs, ReduceOp::sum);
          const auto int_expected = serial_reduce(int_inputs, ReduceOp::sum);
          for (const auto& v : int_out) ok = ok && v == int_expected;
          const auto real_out = execute_schedule(schedule, real_inputs, ReduceOp::sum);
          const auto real_expected = serial_reduce(real_inputs, ReduceOp::sum);
          const double tol = std::ldexp(1.0, -40);
          for (const auto& v : real_out)
            for (std::size_t i = 0; i < n; ++i)
              ok = ok && std::abs(v[i] - real_expected[i]) <= tol * std::max(scale[i], 1e-300);
        }
      }
    }
    return std::string("tree and ring equal the serial reduction (ints exact, floats 2^-40)");
  }));

  results.push_back(run_check("costmodel.coefficient_identity", [&](bool& ok) {
    ok = true;
    for (int p : node_grid)
      for (int q = 1; q <= p; q *= 2) {
        const TopologySpec topo = build_topology(p, q, 1e-5, 1.0, 4.0, 0.0, 0.25);
        const std::size_t n = static_cast<std::size_t>(p) * 16;
        const CommSchedule schedule = allreduce_schedule(p, n, 1);
        const std::uint64_t unit = n / static_cast<std::uint64_t>(p);
        const TrafficCoefficients contig =
            traffic_coefficients(schedule, contiguous_mapping(topo));
        const TrafficCoefficients rr = traffic_coefficients(schedule, round_robin_mapping(topo));
        const std::uint64_t s = static_cast<std::uint64_t>(p / q);
        ok = ok && contig.intra_bytes_per_rank == 2 * static_cast<std::uint64_t>(q - 1) * unit;
        ok = ok && contig.cross_bytes_per_rank == 2 * static_cast<std::uint64_t>(p - q) * unit;
        ok = ok && rr.intra_bytes_per_rank == 2 * (static_cast<std::uint64_t>(p) - s) * unit;
        ok = ok && rr.cross_bytes_per_rank == 2 * (s - 1) * unit;
      }
    return std::string("schedule traffic reproduces the closed-form coefficients");
  }));

  results.push_back(run_check("costmodel.traffic_conservation", [&](bool& ok) {
    ok = true;
    for (int p : node_grid)
      for (int q = 1; q <= p; q *= 2) {
        const TopologySpec topo = build_topology(p, q, 1e-5, 1.0, 4.0, 0.0, 0.25);
        const std::size_t n = static_cast<std::size_t>(p) * 16;
        const CommSchedule schedule = allreduce_schedule(p, n, 1);
        const std::uint64_t total = 2 * (n / static_cast<std::uint64_t>(p)) *
                                    static_cast<std::uint64_t>(p - 1);
        for (const RankMapping& m : {contiguous_mapping(topo), round_robin_mapping(topo)}) {
          const TrafficCoefficients coef = traffic_coefficients(schedule, m);
          ok = ok && coef.intra_bytes_per_rank + coef.cross_bytes_per_rank == total;
        }
      }
    return std::string("intra + cross bytes sum to 2(p-1)n/p per rank");
  }));

  results.push_back(run_check("costmodel.renumbered_dominance", [&](bool& ok) {
    ok = true;
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_int_distribution<int> exp_q(1, 4);
    std::uniform_int_distribution<int> exp_extra(1, 6);
    std::uniform_real_distribution<double> log_beta(-12.0, -6.0);
    std::uniform_real_distribution<double> ratio(1.01, 8.0);
    std::uniform_real_distribution<double> log_n(0.0, 9.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int draw = 0; draw < 1000; ++draw) {
      const int q = 1 << exp_q(rng);
      const int p = q << exp_extra(rng);
      const double beta1 = std::pow(10.0, log_beta(rng));
      const bool equal_betas = draw % 10 == 0;
      const double beta2 = equal_betas ? beta1 : beta1 * ratio(rng);
      CostParams params{p,
                        q,
                        std::pow(10.0, log_n(rng)),
                        unit(rng) * 1e-4,
                        beta1,
                        beta2,
                        unit(rng) * 1e-10};
      const double base = cost_allreduce(params, Variant::baseline).total;
      const double renum = cost_allreduce(params, Variant::renumbered).total;
      ok = ok && renum <= base;
      if (beta2 == beta1) ok = ok && renum == base;
      if (beta2 > beta1 && q > 1 && params.n > 0) ok = ok && renum < base;
    }
    return std::string("1000 draws: renumbered <= baseline, equality iff beta2 = beta1");
  }));

  results.push_back(run_check("costmodel.cross_phase_confinement", [&](bool& ok) {
    ok = true;
    for (int p : node_grid)
      for (int q = 1; q <= p; q *= 2) {
        const TopologySpec topo = build_topology(p, q, 1e-5, 1.0, 4.0, 0.0, 0.25);
        const RankMapping rr = round_robin_mapping(topo);
        const int log_p = log2_exact(static_cast<std::uint64_t>(p));
        const int log_s = log2_exact(static_cast<std::uint64_t>(topo.supernode_count));
        const CommSchedule schedule = allreduce_schedule(p, static_cast<std::size_t>(p) * 4, 4);
        for (std::size_t round = 0; round < schedule.rounds.size(); ++round) {
          bool has_cross = false;
          for (const Transfer& t : schedule.rounds[round])
            has_cross = has_cross || link_class(rr, t.src, t.dst) == LinkClass::cross;
          const bool late_rs = round < static_cast<std::size_t>(log_p) &&
                               round >= static_cast<std::size_t>(log_p - log_s);
          const bool early_ag = round >= static_cast<std::size_t>(log_p) &&
                                round < static_cast<std::size_t>(log_p + log_s);
          if (has_cross) ok = ok && (late_rs || early_ag);
          if (late_rs || early_ag) ok = ok && has_cross;
        }
      }
    return std::string(
        "round-robin cross traffic confined to last log2(S) halving / first log2(S) doubling rounds");
  }));

  results.push_back(run_check("simulator.matches_analytic_model", [&](bool& ok) {
    const ValidationReport report = validate_against_analytic(
        node_grid, {1024, 1u << 20}, 1e-5, 1.0 / 12e9, 4.0 / 12e9, 1e-11);
    ok = report.max_rel_diff <= 1e-9;
    return "max relative difference " + format_double(report.max_rel_diff);
  }));

  results.push_back(run_check("simulator.deterministic_reports", [&](bool& ok) {
    const TopologySpec topo = build_topology(16, 4, 1e-5, 1.0 / 12e9, 4.0 / 12e9, 1e-11, 0.25);
    const RankMapping mapping = round_robin_mapping(topo);
    const CommSchedule schedule = allreduce_schedule(16, 4096, 4);
    std::mt19937_64 rng(seed ^ 0xda3e39cb94b95bdbull);
    std::uniform_real_distribution<double> reals(-1.0, 1.0);
    std::vector<std::vector<double>> inputs(16, std::vector<double>(4096));
    for (auto& v : inputs)
      for (double& x : v) x = reals(rng);
    const SimReport a = simulate(schedule, topo, mapping, SimMode::contention, &inputs);
    const SimReport b = simulate(schedule, topo, mapping, SimMode::contention, &inputs);
    ok = a.total_time == b.total_time && a.round_times == b.round_times &&
         a.payload_checksum == b.payload_checksum &&
         a.per_rank_cross_bytes == b.per_rank_cross_bytes;
    return "checksum " + std::to_string(a.payload_checksum);
  }));

  results.push_back(run_check("simulator.payloads_equal_execute_schedule", [&](bool& ok) {
    const TopologySpec topo = build_topology(8, 4, 1e-5, 1.0 / 12e9, 4.0 / 12e9, 0.0, 0.25);
    const RankMapping mapping = contiguous_mapping(topo);
    const CommSchedule schedule = allreduce_schedule(8, 257, 8);
    std::mt19937_64 rng(seed ^ 0xc2b2ae3d27d4eb4full);
    std::uniform_real_distribution<double> reals(-10.0, 10.0);
    std::vector<std::vector<double>> inputs(8, std::vector<double>(257));
    for (auto& v : inputs)
      for (double& x : v) x = reals(rng);
    const SimReport report = simulate(schedule, topo, mapping, SimMode::fixed_beta, &inputs);
    ok = report.final_payloads == execute_schedule(schedule, inputs, ReduceOp::sum);
    return std::string("bitwise equal payloads");
  }));

  results.push_back(run_check("simulator.contention_sanity", [&](bool& ok) {
    ok = true;
    // q concurrent cross messages at f = 1/4 reproduce beta2 = 4*beta1.
    const int q = 4, p = 8;
    const TopologySpec topo = build_topology(p, q, 0.0, 1.0, 4.0, 0.0, 0.25);
    const RankMapping mapping = contiguous_mapping(topo);
    CommSchedule saturated;
    saturated.participants = p;
    saturated.elem_count = static_cast<std::size_t>(p);
    saturated.elem_bytes = 1;
    saturated.rounds.emplace_back();
    for (int r = 0; r < q; ++r)
      saturated.rounds.back().push_back({r, r + q, {0, 1}, false});
    const SimReport full = simulate(saturated, topo, mapping, SimMode::contention);
    ok = ok && full.round_times.size() == 1 && full.round_times[0] == 4.0;

    // Fewer concurrent cross messages never cost more.
    double previous = 0;
    for (int m = 1; m <= q; ++m) {
      CommSchedule partial = saturated;
      partial.rounds.back().resize(static_cast<std::size_t>(m));
      const SimReport report = simulate(partial, topo, mapping, SimMode::contention);
      ok = ok && report.total_time >= previous && report.total_time >= 1.0;
      previous = report.total_time;
    }
    return std::string("m = q*f saturation reproduces beta2; time monotone in m");
  }));

  results.push_back(run_check("training.packing_roundtrip", [&](bool& ok) {
    ok = true;
    std::mt19937_64 rng(seed ^ 0x2545f4914f6cdd1dull);
    std::uniform_int_distribution<int> layer_count(1, 9);
    std::uniform_int_distribution<int> layer_len(0, 40);
    std::uniform_real_distribution<double> reals(-5.0, 5.0);
    for (int trial = 0; trial < 50; ++trial) {
      LayerVectors layers(static_cast<std::size_t>(layer_count(rng)));
      for (auto& layer : layers) {
        layer.resize(static_cast<std::size_t>(layer_len(rng)));
        for (double& x : layer) x = reals(rng);
      }
      const PackedGradients packed = pack_gradients(layers);
      ok = ok && unpack_gradients(packed.flat, packed.offsets) == layers;
    }
    return std::string("unpack(pack(x)) = x on random ragged layer lists");
  }));

  results.push_back(run_check("training.ssgd_matches_serial_full_batch", [&](bool& ok) {
    ok = true;
    const int nodes = 8, groups = 4, per_group = 4, dim = 6, steps = 5;
    std::mt19937_64 rng(seed ^ 0x94d049bb133111ebull);
    std::uniform_real_distribution<double> reals(-2.0, 2.0);
    const double lr = 0.01;

    LayerVectors initial = {std::vector<double>(dim), std::vector<double>(dim / 2)};
    for (auto& layer : initial)
      for (double& x : layer) x = reals(rng);
    std::vector<LayerVectors> weights(nodes, initial);
    LayerVectors serial = initial;

    for (int step = 0; step < steps; ++step) {
      // Quadratic loss per sample: gradient = w - x.
      std::vector<std::vector<LayerVectors>> samples(nodes);
      LayerVectors mean_x = {std::vector<double>(dim, 0.0), std::vector<double>(dim / 2, 0.0)};
      for (int k = 0; k < nodes; ++k) {
        samples[static_cast<std::size_t>(k)].resize(groups);
        for (int g = 0; g < groups; ++g) {
          LayerVectors group_grad = {std::vector<double>(dim, 0.0),
                                     std::vector<double>(dim / 2, 0.0)};
          for (int s = 0; s < per_group; ++s)
            for (std::size_t layer = 0; layer < group_grad.size(); ++layer)
              for (std::size_t i = 0; i < group_grad[layer].size(); ++i) {
                const double x = reals(rng);
                group_grad[layer][i] += weights[static_cast<std::size_t>(k)][layer][i] - x;
                mean_x[layer][i] += x;
              }
          for (auto& layer : group_grad)
            for (double& v : layer) v /= per_group;
          samples[static_cast<std::size_t>(k)][static_cast<std::size_t>(g)] =
              std::move(group_grad);
        }
      }
      ssgd_step(weights, samples, lr);
      const double total_samples = nodes * groups * per_group;
      for (std::size_t layer = 0; layer < serial.size(); ++layer)
        for (std::size_t i = 0; i < serial[layer].size(); ++i)
          serial[layer][i] -= lr * (serial[layer][i] - mean_x[layer][i] / total_samples);
      for (int k = 1; k < nodes; ++k)
        ok = ok && weights[static_cast<std::size_t>(k)] == weights[0];
      const double tol = std::ldexp(1.0, -40);
      for (std::size_t layer = 0; layer < serial.size(); ++layer)
        for (std::size_t i = 0; i < serial[layer].size(); ++i) {
          const double denom = std::max(std::abs(serial[layer][i]), 1e-300);
          ok = ok && std::abs(weights[0][layer][i] - serial[layer][i]) / denom <=
                         tol;
        }
    }
    return std::string("replicas identical and equal to full-batch SGD within 2^-40");
  }));

  results.push_back(run_check("training.scaling_properties", [&](bool& ok) {
    ok = true;
    TopologyFamily family; // default calibration
    TrainConfig config;
    config.model = builtin_model("alexnet");
    const std::vector<int> sweep = power_of_two_range(1, 1024);
    double previous_fraction = 1.0;
    for (int b : {64, 128, 256}) {
      config.sub_batch = b;
      const std::vector<IterationReport> reports =
          scaling_report(config, sweep, family, Variant::renumbered);
      for (const IterationReport& r : reports)
        ok = ok && r.speedup_vs_one_node <= r.nodes + 1e-12 &&
             r.comm_fraction >= 0 && r.comm_fraction <= 1;
      ok = ok && reports.front().speedup_vs_one_node == 1.0;
      const double fraction = reports.back().comm_fraction;
      ok = ok && fraction < previous_fraction;
      previous_fraction = fraction;
    }
    TrainConfig resnet = config;
    resnet.model = builtin_model("resnet50");
    resnet.sub_batch = 32;
    resnet.nodes = 1024;
    config.sub_batch = 64;
    config.nodes = 1024;
    const TopologySpec topo = family.topology_for(1024);
    ok = ok && iteration_time(resnet, topo, Variant::renumbered).comm_fraction <
                   iteration_time(config, topo, Variant::renumbered).comm_fraction;
    return std::string("speedup <= P, fractions ordered b=64 > b=128 > b=256, resnet50 < alexnet");
  }));

  results.push_back(run_check("io.striping_bounds", [&](bool& ok) {
    ok = true;
    const StripeLayout reference_layout{268435456, 32}; // 256 MiB stripes
    const std::int64_t batch = 201326592;           // 192 MiB
    for (std::int64_t offset : {std::int64_t{0}, std::int64_t{1}, std::int64_t{268435455},
                                std::int64_t{999999937}})
      ok = ok && arrays_touched(batch, reference_layout, offset) <= 2;
    ok = ok && per_array_load(1024, batch, reference_layout) == 64;

    // Worst case matches offset enumeration on a small layout.
    const StripeLayout small{64, 8};
    for (std::int64_t m : {std::int64_t{0}, std::int64_t{1}, std::int64_t{63}, std::int64_t{64},
                           std::int64_t{65}, std::int64_t{200}, std::int64_t{512}}) {
      int brute = 0;
      for (std::int64_t offset = 0; offset < small.stripe_size; ++offset)
        brute = std::max(brute, arrays_touched(m, small, offset));
      ok = ok && brute == worst_case_arrays_touched(m, small);
    }
    return std::string("reference striped config gives <= 2 arrays and load 64; worst case matches enumeration");
  }));

  return results;
}

} // namespace hiercoll
