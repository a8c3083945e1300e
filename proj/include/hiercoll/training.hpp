#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "hiercoll/cost_model.hpp"
#include "hiercoll/models.hpp"
#include "hiercoll/schedule.hpp"
#include "hiercoll/topology.hpp"

namespace hiercoll {

/// Per-layer gradient or weight vectors of one replica.
using LayerVectors = std::vector<std::vector<double>>;

struct PackedGradients {
  std::vector<double> flat;
  std::vector<std::size_t> offsets; // start of each layer within flat
};

/// Concatenates per-layer vectors into one buffer so a single collective
/// call covers the whole model; the offset table is the exact inverse map.
inline PackedGradients pack_gradients(const LayerVectors& layers) {
  if (layers.empty()) throw std::invalid_argument("pack_gradients: layer list must be non-empty");
  PackedGradients packed;
  packed.offsets.reserve(layers.size());
  std::size_t total = 0;
  for (const auto& layer : layers) {
    packed.offsets.push_back(total);
    total += layer.size();
  }
  packed.flat.reserve(total);
  for (const auto& layer : layers) packed.flat.insert(packed.flat.end(), layer.begin(), layer.end());
  return packed;
}

/// Exact inverse of pack_gradients.
inline LayerVectors unpack_gradients(const std::vector<double>& flat,
                                     const std::vector<std::size_t>& offsets) {
  if (offsets.empty())
    throw std::invalid_argument("unpack_gradients: offset table must be non-empty");
  if (offsets.front() != 0)
    throw std::invalid_argument("unpack_gradients: offsets must start at 0");
  for (std::size_t i = 1; i < offsets.size(); ++i)
    if (offsets[i] < offsets[i - 1])
      throw std::invalid_argument("unpack_gradients: offsets must be non-decreasing");
  if (offsets.back() > flat.size())
    throw std::invalid_argument("unpack_gradients: offsets exceed the flat buffer length");

  LayerVectors layers(offsets.size());
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    const std::size_t end = i + 1 < offsets.size() ? offsets[i + 1] : flat.size();
    layers[i].assign(flat.begin() + static_cast<std::ptrdiff_t>(offsets[i]),
                     flat.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return layers;
}

/// Knobs of one data-parallel training setup.
struct TrainConfig {
  int nodes = 1;            // replica count P (power of two)
  int sub_batch = 4;        // images per node per iteration
  ModelDescriptor model;
  double learning_rate = 0.01;
  int local_groups = 4;     // compute groups averaged inside one node
  double local_gamma = 0;   // s/byte of in-node group reduction (0: folded into throughput)
};

inline void validate_train_config(const TrainConfig& config) {
  if (config.nodes <= 0 || !is_power_of_two(static_cast<std::uint64_t>(config.nodes)))
    throw std::invalid_argument("train config: nodes must be a power of two");
  if (config.local_groups < 1)
    throw std::invalid_argument("train config: local_groups must be >= 1");
  if (config.sub_batch < config.local_groups || config.sub_batch % config.local_groups != 0)
    throw std::invalid_argument("train config: sub_batch must be a positive multiple of local_groups");
  if (!(config.model.node_throughput > 0))
    throw std::invalid_argument("train config: model node_throughput must be > 0");
  if (config.local_gamma < 0)
    throw std::invalid_argument("train config: local_gamma must be >= 0");
}

namespace detail {
inline void check_same_shape(const LayerVectors& a, const LayerVectors& b, const char* what) {
  if (a.size() != b.size())
    throw std::invalid_argument(std::string("ssgd_step: ") + what + ": layer count mismatch");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].size() != b[i].size())
      throw std::invalid_argument(std::string("ssgd_step: ") + what + ": layer " +
                                  std::to_string(i) + " length mismatch");
}
} // namespace detail

/// One synchronous data-parallel step.
///
/// Every replica averages its local group gradients, packs all layers into
/// one buffer, the packed buffers are allreduce-averaged across replicas,
/// and each replica applies w <- w - lr * g. Entry weights must be identical
/// across replicas and stay identical on exit (every reduced element is
/// computed once and copied, so the guarantee is bitwise).
inline void ssgd_step(std::vector<LayerVectors>& node_weights,
                      const std::vector<std::vector<LayerVectors>>& node_group_gradients,
                      double learning_rate) {
  const std::size_t nodes = node_weights.size();
  if (nodes == 0) throw std::invalid_argument("ssgd_step: no replicas");
  if (!is_power_of_two(nodes))
    throw std::invalid_argument("ssgd_step: replica count must be a power of two");
  if (node_group_gradients.size() != nodes)
    throw std::invalid_argument("ssgd_step: gradient state must cover every replica");
  const std::size_t groups = node_group_gradients.front().size();
  if (groups == 0) throw std::invalid_argument("ssgd_step: need at least one gradient group");

  for (std::size_t k = 0; k < nodes; ++k) {
    if (node_weights[k] != node_weights[0])
      throw std::invalid_argument("ssgd_step: replica weights diverged on entry (replica " +
                                  std::to_string(k) + ")");
    if (node_group_gradients[k].size() != groups)
      throw std::invalid_argument("ssgd_step: replica " + std::to_string(k) +
                                  " has a different group count");
    for (const auto& group : node_group_gradients[k])
      detail::check_same_shape(group, node_weights[k], "gradient shape");
  }

  // Local mean over the compute groups, then one packed buffer per replica.
  std::vector<std::vector<double>> flats(nodes);
  std::vector<std::size_t> offsets;
  const double group_scale = 1.0 / static_cast<double>(groups);
  for (std::size_t k = 0; k < nodes; ++k) {
    LayerVectors local = node_group_gradients[k][0];
    for (std::size_t g = 1; g < groups; ++g)
      for (std::size_t layer = 0; layer < local.size(); ++layer) {
        const auto& src = node_group_gradients[k][g][layer];
        for (std::size_t i = 0; i < src.size(); ++i) local[layer][i] += src[i];
      }
    for (auto& layer : local)
      for (double& x : layer) x *= group_scale;
    PackedGradients packed = pack_gradients(local);
    flats[k] = std::move(packed.flat);
    if (k == 0) offsets = std::move(packed.offsets);
  }

  const std::size_t flat_len = flats[0].size();
  const CommSchedule schedule =
      allreduce_schedule(static_cast<int>(nodes), flat_len, sizeof(double));
  const std::vector<std::vector<double>> reduced =
      execute_schedule(schedule, flats, ReduceOp::average);

  for (std::size_t k = 0; k < nodes; ++k) {
    const LayerVectors gradient = unpack_gradients(reduced[k], offsets);
    for (std::size_t layer = 0; layer < gradient.size(); ++layer)
      for (std::size_t i = 0; i < gradient[layer].size(); ++i)
        node_weights[k][layer][i] -= learning_rate * gradient[layer][i];
  }
}

/// Timing of one training iteration under the closed-form comm model.
struct IterationReport {
  int nodes = 1;
  int sub_batch = 1;
  double compute_time = 0;
  double local_reduce_time = 0;
  double comm_time = 0;
  double total = 0;
  double comm_fraction = 0;
  double speedup_vs_one_node = 1;
};

/// compute = b/throughput (linear), comm = allreduce of the packed model,
/// local reduce = local_gamma * bytes * (groups-1).
inline IterationReport iteration_time(const TrainConfig& config, const TopologySpec& topology,
                                      Variant variant) {
  validate_train_config(config);
  if (topology.p != config.nodes)
    throw std::invalid_argument("iteration_time: topology.p = " + std::to_string(topology.p) +
                                " does not match config nodes = " + std::to_string(config.nodes));

  IterationReport report;
  report.nodes = config.nodes;
  report.sub_batch = config.sub_batch;
  report.compute_time = config.sub_batch / config.model.node_throughput;
  report.local_reduce_time = config.local_gamma *
                             static_cast<double>(config.model.total_param_bytes) *
                             (config.local_groups - 1);
  const CostParams params =
      CostParams::from_topology(topology, static_cast<double>(config.model.total_param_bytes));
  report.comm_time = cost_allreduce(params, variant).total;
  report.total = report.compute_time + report.local_reduce_time + report.comm_time;
  report.comm_fraction = report.total > 0 ? report.comm_time / report.total : 0.0;
  report.speedup_vs_one_node =
      report.total > 0 ? config.nodes * report.compute_time / report.total
                       : static_cast<double>(config.nodes);
  return report;
}

/// A cluster shape that scales with the node count: supernodes hold up to
/// supernode_capacity nodes, fewer nodes than that collapse to one supernode.
struct TopologyFamily {
  int supernode_capacity = 256;
  double alpha = 1e-5;
  double beta1 = 1.0 / 12e9;
  double beta2 = 4.0 / 12e9;
  double gamma = 0;
  double oversub_factor = 0.25;

  TopologySpec topology_for(int nodes) const {
    return build_topology(nodes, std::min(nodes, supernode_capacity), alpha, beta1, beta2, gamma,
                          oversub_factor);
  }
};

/// Evaluates iteration_time over a node-count sweep at fixed sub-batch.
inline std::vector<IterationReport> scaling_report(const TrainConfig& config,
                                                   const std::vector<int>& node_counts,
                                                   const TopologyFamily& family, Variant variant) {
  std::vector<IterationReport> reports;
  reports.reserve(node_counts.size());
  for (int nodes : node_counts) {
    TrainConfig point = config;
    point.nodes = nodes;
    reports.push_back(iteration_time(point, family.topology_for(nodes), variant));
  }
  return reports;
}

/// One observation the calibration matches: a comm fraction (or speedup)
/// measured at a given model, node count and sub-batch.
struct FitTarget {
  ModelDescriptor model;
  int nodes = 1;
  int sub_batch = 1;
  double observed = 0;
  bool is_speedup = false; // otherwise a comm fraction in (0, 1)
};

struct FitSettings {
  int supernode_capacity = 256;
  double beta2_ratio = 4.0; // beta2 = ratio * beta1 while fitting
  double gamma = 0;
  double oversub_factor = 0.25;
  Variant variant = Variant::renumbered;
  double alpha_min = 1e-9, alpha_max = 1e-2;
  double beta1_min = 1e-14, beta1_max = 1e-6;
  int grid_points = 41;
  int refinements = 4;
};

struct FitResult {
  double alpha = 0;
  double beta1 = 0;
  double residual = 0; // RMS relative error over the targets
};

/// Model output compared against one target for candidate (alpha, beta1).
inline double fit_prediction(const FitTarget& target, double alpha, double beta1,
                             const FitSettings& settings) {
  TopologyFamily family;
  family.supernode_capacity = settings.supernode_capacity;
  family.alpha = alpha;
  family.beta1 = beta1;
  family.beta2 = settings.beta2_ratio * beta1;
  family.gamma = settings.gamma;
  family.oversub_factor = settings.oversub_factor;
  TrainConfig config;
  config.nodes = target.nodes;
  config.sub_batch = target.sub_batch;
  config.model = target.model;
  config.local_groups = 1; // timing only; group structure is irrelevant here
  const IterationReport report =
      iteration_time(config, family.topology_for(target.nodes), settings.variant);
  return target.is_speedup ? report.speedup_vs_one_node : report.comm_fraction;
}

namespace detail {
inline double fit_objective(const std::vector<FitTarget>& targets, double alpha, double beta1,
                            const FitSettings& settings) {
  double sse = 0;
  for (const FitTarget& t : targets) {
    const double predicted = hiercoll::fit_prediction(t, alpha, beta1, settings);
    const double rel = (predicted - t.observed) / t.observed;
    sse += rel * rel;
  }
  return sse;
}
} // namespace detail

/// Log-space grid search over (alpha, beta1) minimizing the squared relative
/// error against the targets, refined around the best cell. Deterministic.
inline FitResult calibrate_fit(const std::vector<FitTarget>& targets,
                               const FitSettings& settings = {}) {
  if (targets.empty()) throw std::invalid_argument("calibrate_fit: targets must be non-empty");
  if (targets.size() < 2)
    throw std::invalid_argument(
        "calibrate_fit: a single target is under-determined; provide at least 2");
  for (const FitTarget& t : targets)
    if (!(t.observed > 0))
      throw std::invalid_argument("calibrate_fit: observed values must be > 0");

  double la_lo = std::log10(settings.alpha_min), la_hi = std::log10(settings.alpha_max);
  double lb_lo = std::log10(settings.beta1_min), lb_hi = std::log10(settings.beta1_max);
  const int n = std::max(settings.grid_points, 3);

  double best_la = la_lo, best_lb = lb_lo;
  double best = std::numeric_limits<double>::infinity();
  for (int level = 0; level < std::max(settings.refinements, 1); ++level) {
    const double da = (la_hi - la_lo) / (n - 1);
    const double db = (lb_hi - lb_lo) / (n - 1);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double la = la_lo + i * da;
        const double lb = lb_lo + j * db;
        const double sse = detail::fit_objective(targets, std::pow(10.0, la),
                                                 std::pow(10.0, lb), settings);
        if (sse < best) {
          best = sse;
          best_la = la;
          best_lb = lb;
        }
      }
    la_lo = best_la - 2 * da;
    la_hi = best_la + 2 * da;
    lb_lo = best_lb - 2 * db;
    lb_hi = best_lb + 2 * db;
  }

  FitResult result;
  result.alpha = std::pow(10.0, best_la);
  result.beta1 = std::pow(10.0, best_lb);
  result.residual = std::sqrt(best / static_cast<double>(targets.size()));
  return result;
}

} // namespace hiercoll
