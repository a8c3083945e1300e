#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hiercoll/schedule.hpp"
#include "hiercoll/topology.hpp"

namespace hiercoll {

/// Which logical rank numbering the closed forms describe: baseline keeps
/// adjacent ranks in one supernode (heavy early traffic crosses supernodes),
/// renumbered interleaves supernodes round-robin so only the last log2(p/q)
/// halving steps and first log2(p/q) doubling steps cross.
enum class Variant { baseline, renumbered };

inline Variant variant_for(MappingKind kind) {
  return kind == MappingKind::contiguous ? Variant::baseline : Variant::renumbered;
}

inline std::string to_string(Variant v) {
  return v == Variant::baseline ? "baseline" : "renumbered";
}

/// Inputs of the closed-form message cost model.
struct CostParams {
  int p = 1;           // participating nodes (power of two)
  int q = 1;           // nodes per supernode (power of two, divides p)
  double n = 0;        // payload bytes
  double alpha = 0;    // seconds per message
  double beta1 = 0;    // seconds per byte, intra-supernode
  double beta2 = 0;    // seconds per byte, cross-supernode
  double gamma = 0;    // seconds per byte of local reduction

  static CostParams from_topology(const TopologySpec& topo, double payload_bytes) {
    return {topo.p, topo.q, payload_bytes, topo.alpha, topo.beta1, topo.beta2, topo.gamma};
  }
};

/// Per-term cost decomposition. total is accumulated from an algebraically
/// regrouped bandwidth sum, (p-1)*beta1*n/p + coef_cross*(beta2-beta1)*n/p,
/// which shares the first addend between variants; that keeps
/// renumbered <= baseline exact in floating point whenever beta2 >= beta1.
/// The reported intra/cross fields are the textbook per-term values, so
/// total can differ from their sum by a rounding ulp.
struct CostBreakdown {
  double latency_term = 0;
  double intra_term = 0;
  double cross_term = 0;
  double compute_term = 0;
  double total = 0;
};

namespace detail {
inline void validate_cost_params(const CostParams& params) {
  if (params.p <= 0 || !is_power_of_two(static_cast<std::uint64_t>(params.p)))
    throw std::invalid_argument("cost params: p must be a power of two");
  if (params.q <= 0 || !is_power_of_two(static_cast<std::uint64_t>(params.q)) ||
      params.p % params.q != 0)
    throw std::invalid_argument("cost params: q must be a power of two dividing p");
  if (params.n < 0) throw std::invalid_argument("cost params: n must be >= 0");
  if (params.alpha < 0 || params.beta1 < 0 || params.beta2 < 0 || params.gamma < 0)
    throw std::invalid_argument("cost params: rates must be >= 0");
}

struct PhaseCoefficients {
  double intra = 0; // multiplies beta1 * n/p
  double cross = 0; // multiplies beta2 * n/p
};

inline PhaseCoefficients phase_coefficients(const CostParams& params, Variant variant) {
  const double p = params.p;
  const double q = params.q;
  const double s = p / q;
  if (variant == Variant::baseline) return {q - 1, p - q};
  return {p - s, s - 1};
}

/// One halving/doubling phase: log2(p)*alpha + intra_coef*beta1*n/p +
/// cross_coef*beta2*n/p, plus (p-1)/p*n*gamma when the phase reduces.
inline CostBreakdown tree_phase_cost(const CostParams& params, Variant variant,
                                     bool with_reduction) {
  validate_cost_params(params);
  const PhaseCoefficients coef = phase_coefficients(params, variant);
  const double y = params.n / params.p;        // bytes per block
  const double u = params.beta1 * y;
  const double v = params.beta2 * y;
  const double bandwidth = (params.p - 1) * u + coef.cross * (v - u);

  CostBreakdown cost;
  cost.latency_term = log2_exact(static_cast<std::uint64_t>(params.p)) * params.alpha;
  cost.intra_term = coef.intra * u;
  cost.cross_term = coef.cross * v;
  cost.compute_term = with_reduction ? params.gamma * ((params.p - 1) * y) : 0.0;
  cost.total = cost.latency_term + bandwidth + cost.compute_term;
  return cost;
}
} // namespace detail

/// Time for one point-to-point message of n bytes: alpha + beta*n.
inline double cost_p2p(double n, const CostParams& params, LinkClass link = LinkClass::intra) {
  if (n < 0) throw std::invalid_argument("cost_p2p: n must be >= 0");
  return params.alpha + (link == LinkClass::intra ? params.beta1 : params.beta2) * n;
}

/// Recursive-halving reduce-scatter cost.
/// baseline:   log2(p)a + (q-1)b1*n/p + (p-q)b2*n/p + (p-1)/p*n*g
/// renumbered: log2(p)a + (p-p/q)b1*n/p + (p/q-1)b2*n/p + (p-1)/p*n*g
inline CostBreakdown cost_reduce_scatter(const CostParams& params, Variant variant) {
  return detail::tree_phase_cost(params, variant, true);
}

/// Recursive-doubling allgather cost: same traffic coefficients as the
/// reduce-scatter, no reduction term.
inline CostBreakdown cost_allgather(const CostParams& params, Variant variant) {
  return detail::tree_phase_cost(params, variant, false);
}

/// Termwise sum of the reduce-scatter and allgather phases.
inline CostBreakdown cost_allreduce(const CostParams& params, Variant variant) {
  const CostBreakdown rs = cost_reduce_scatter(params, variant);
  const CostBreakdown ag = cost_allgather(params, variant);
  CostBreakdown cost;
  cost.latency_term = rs.latency_term + ag.latency_term;
  cost.intra_term = rs.intra_term + ag.intra_term;
  cost.cross_term = rs.cross_term + ag.cross_term;
  cost.compute_term = rs.compute_term + ag.compute_term;
  cost.total = rs.total + ag.total;
  return cost;
}

/// Standard ring allreduce cost: 2(p-1)a + 2(p-1)/p*n*b_eff + (p-1)/p*n*g.
///
/// Under a rank-ordered ring every round contains a supernode-boundary hop
/// whenever S >= 2, and the round clock is the slowest hop, so b_eff is
/// beta2 for S >= 2 and beta1 for a single supernode.
inline CostBreakdown cost_ring_allreduce(const CostParams& params) {
  detail::validate_cost_params(params);
  const double y = params.n / params.p;
  const bool crosses = params.p > params.q;
  const double beta_eff = crosses ? params.beta2 : params.beta1;
  const double bandwidth = 2.0 * (params.p - 1) * (beta_eff * y);

  CostBreakdown cost;
  cost.latency_term = 2.0 * (params.p - 1) * params.alpha;
  cost.intra_term = crosses ? 0.0 : bandwidth;
  cost.cross_term = crosses ? bandwidth : 0.0;
  cost.compute_term = params.gamma * ((params.p - 1) * y);
  cost.total = cost.latency_term + bandwidth + cost.compute_term;
  return cost;
}

/// Worst per-rank sent bytes by link class over a whole schedule.
struct TrafficCoefficients {
  std::uint64_t intra_bytes_per_rank = 0;
  std::uint64_t cross_bytes_per_rank = 0;
};

/// Enumerates every transfer, classifies it against the mapping and returns
/// the max-over-ranks sent bytes per class. With n divisible by p these match
/// the closed-form coefficients times n/p exactly.
inline TrafficCoefficients traffic_coefficients(const CommSchedule& schedule,
                                                const RankMapping& mapping) {
  if (mapping.size() != schedule.participants)
    throw std::invalid_argument("traffic_coefficients: mapping covers " +
                                std::to_string(mapping.size()) + " ranks but schedule has " +
                                std::to_string(schedule.participants));
  const auto p = static_cast<std::size_t>(schedule.participants);
  std::vector<std::uint64_t> intra(p, 0), cross(p, 0);
  for (const auto& round : schedule.rounds)
    for (const Transfer& t : round) {
      const std::uint64_t bytes =
          static_cast<std::uint64_t>(t.block.length) * schedule.elem_bytes;
      if (link_class(mapping, t.src, t.dst) == LinkClass::intra)
        intra[static_cast<std::size_t>(t.src)] += bytes;
      else
        cross[static_cast<std::size_t>(t.src)] += bytes;
    }
  TrafficCoefficients result;
  for (std::size_t r = 0; r < p; ++r) {
    result.intra_bytes_per_rank = std::max(result.intra_bytes_per_rank, intra[r]);
    result.cross_bytes_per_rank = std::max(result.cross_bytes_per_rank, cross[r]);
  }
  return result;
}

} // namespace hiercoll
