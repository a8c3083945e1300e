#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hiercoll {

/// Link classification for a point-to-point exchange: inside one supernode
/// or across the over-subscribed fabric between supernodes.
enum class LinkClass { intra, cross };

/// How logical ranks are laid out over supernodes.
enum class MappingKind { contiguous, round_robin };

inline bool is_power_of_two(std::uint64_t x) { return x != 0 && std::has_single_bit(x); }

/// log2 of a power of two.
inline int log2_exact(std::uint64_t x) { return std::countr_zero(x); }

/// Two-level network: p nodes partitioned into S = p/q supernodes of q nodes
/// each. Intra-supernode links cost beta1 seconds per byte; paths between
/// supernodes cost beta2 (>= beta1 when the cross fabric is over-subscribed).
/// Immutable after construction.
struct TopologySpec {
  int p = 1;                    // total node count (power of two)
  int q = 1;                    // nodes per supernode (power of two, divides p)
  int supernode_count = 1;      // S = p/q
  double alpha = 1e-5;          // seconds per message
  double beta1 = 1.0 / 12e9;    // seconds per byte, intra-supernode
  double beta2 = 4.0 / 12e9;    // seconds per byte, cross-supernode
  double gamma = 0.0;           // seconds per byte of local reduction
  double oversub_factor = 0.25; // fraction of full cross bandwidth when saturated
};

/// Physical position of a logical rank.
struct NodePosition {
  int supernode = 0;
  int slot = 0; // position within the supernode
};

/// Bijection logical rank -> (supernode, slot). Balanced: every supernode
/// holds exactly q ranks. Immutable after construction.
struct RankMapping {
  MappingKind kind = MappingKind::contiguous;
  std::vector<NodePosition> assignment; // indexed by logical rank

  int size() const { return static_cast<int>(assignment.size()); }

  int supernode_of(int rank) const { return assignment.at(static_cast<std::size_t>(rank)).supernode; }
  int slot_of(int rank) const { return assignment.at(static_cast<std::size_t>(rank)).slot; }
};

namespace detail {
inline void check_rank(const RankMapping& mapping, int rank, const char* which) {
  if (rank < 0 || rank >= mapping.size())
    throw std::invalid_argument(std::string("link_class: rank ") + which + " = " +
                                std::to_string(rank) + " out of range [0, " +
                                std::to_string(mapping.size()) + ")");
}
} // namespace detail

/// Validates parameters and assembles a TopologySpec.
///
/// p and q must be powers of two with q | p. beta2 < beta1 normally signals a
/// misconfigured cost table (quarter bandwidth means 4x time per byte, not a
/// quarter of it) and is rejected unless allow_beta2_below_beta1 is set.
inline TopologySpec build_topology(int p, int q, double alpha, double beta1, double beta2,
                                   double gamma, double oversub_factor,
                                   bool allow_beta2_below_beta1 = false) {
  if (p <= 0 || !is_power_of_two(static_cast<std::uint64_t>(p)))
    throw std::invalid_argument("topology.p must be a power of two, got " + std::to_string(p));
  if (q <= 0 || !is_power_of_two(static_cast<std::uint64_t>(q)))
    throw std::invalid_argument("topology.q must be a power of two, got " + std::to_string(q));
  if (p % q != 0)
    throw std::invalid_argument("topology.q = " + std::to_string(q) + " must divide topology.p = " +
                                std::to_string(p));
  if (alpha < 0) throw std::invalid_argument("topology.alpha must be >= 0");
  if (beta1 <= 0) throw std::invalid_argument("topology.beta1 must be > 0");
  if (gamma < 0) throw std::invalid_argument("topology.gamma must be >= 0");
  if (beta2 < beta1 && !allow_beta2_below_beta1)
    throw std::invalid_argument(
        "topology.beta2 < topology.beta1: cross-supernode paths would be faster than local "
        "links; set allow_beta2_below_beta1 to override");
  if (!(oversub_factor > 0.0) || oversub_factor > 1.0)
    throw std::invalid_argument("topology.oversub_factor must be in (0, 1]");

  TopologySpec spec;
  spec.p = p;
  spec.q = q;
  spec.supernode_count = p / q;
  spec.alpha = alpha;
  spec.beta1 = beta1;
  spec.beta2 = beta2;
  spec.gamma = gamma;
  spec.oversub_factor = oversub_factor;
  return spec;
}

/// Rank r -> supernode floor(r/q), slot r mod q: supernodes fill in order.
inline RankMapping contiguous_mapping(const TopologySpec& spec) {
  RankMapping mapping;
  mapping.kind = MappingKind::contiguous;
  mapping.assignment.resize(static_cast<std::size_t>(spec.p));
  for (int r = 0; r < spec.p; ++r)
    mapping.assignment[static_cast<std::size_t>(r)] = {r / spec.q, r % spec.q};
  return mapping;
}

/// Rank r -> supernode r mod S, slot floor(r/S): consecutive ranks land in
/// different supernodes, so small-stride exchanges stay local.
inline RankMapping round_robin_mapping(const TopologySpec& spec) {
  const int S = spec.supernode_count;
  RankMapping mapping;
  mapping.kind = MappingKind::round_robin;
  mapping.assignment.resize(static_cast<std::size_t>(spec.p));
  for (int r = 0; r < spec.p; ++r)
    mapping.assignment[static_cast<std::size_t>(r)] = {r % S, r / S};
  return mapping;
}

inline RankMapping make_mapping(const TopologySpec& spec, MappingKind kind) {
  return kind == MappingKind::contiguous ? contiguous_mapping(spec) : round_robin_mapping(spec);
}

/// intra iff both ranks live in the same supernode.
inline LinkClass link_class(const RankMapping& mapping, int a, int b) {
  detail::check_rank(mapping, a, "a");
  detail::check_rank(mapping, b, "b");
  if (a == b) throw std::invalid_argument("link_class: a == b (" + std::to_string(a) + ")");
  return mapping.supernode_of(a) == mapping.supernode_of(b) ? LinkClass::intra : LinkClass::cross;
}

} // namespace hiercoll
