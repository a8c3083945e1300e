#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "hiercoll/topology.hpp"

using namespace hiercoll;

namespace {
TopologySpec make(int p, int q) { return build_topology(p, q, 1e-5, 1.0, 4.0, 0.0, 0.25); }
}

TEST_CASE("build_topology derives the supernode count") {
  CHECK(make(1024, 256).supernode_count == 4);
  CHECK(make(8, 8).supernode_count == 1);
  CHECK(make(8, 4).supernode_count == 2);
}

TEST_CASE("build_topology rejects invalid shapes and rates") {
  CHECK_THROWS_AS(make(6, 2), std::invalid_argument);
  CHECK_THROWS_AS(make(8, 3), std::invalid_argument);
  CHECK_THROWS_AS(make(8, 16), std::invalid_argument); // q does not divide p
  CHECK_THROWS_AS(make(0, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_topology(8, 4, -1.0, 1.0, 4.0, 0.0, 0.25), std::invalid_argument);
  CHECK_THROWS_AS(build_topology(8, 4, 1e-5, 0.0, 4.0, 0.0, 0.25), std::invalid_argument);
  CHECK_THROWS_AS(build_topology(8, 4, 1e-5, 1.0, 4.0, -0.5, 0.25), std::invalid_argument);
  CHECK_THROWS_AS(build_topology(8, 4, 1e-5, 1.0, 4.0, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_topology(8, 4, 1e-5, 1.0, 4.0, 0.0, 1.5), std::invalid_argument);
}

TEST_CASE("beta2 below beta1 needs the explicit override") {
  CHECK_THROWS_AS(build_topology(8, 4, 1e-5, 4.0, 1.0, 0.0, 0.25), std::invalid_argument);
  const TopologySpec spec = build_topology(8, 4, 1e-5, 4.0, 1.0, 0.0, 0.25, true);
  CHECK(spec.beta2 == 1.0);
}

TEST_CASE("contiguous mapping fills supernodes in rank order") {
  const RankMapping m = contiguous_mapping(make(8, 4));
  for (int r = 0; r < 4; ++r) CHECK(m.supernode_of(r) == 0);
  for (int r = 4; r < 8; ++r) CHECK(m.supernode_of(r) == 1);

  const RankMapping wide = contiguous_mapping(make(16, 4));
  CHECK(wide.supernode_of(13) == 3);
  CHECK(wide.slot_of(13) == 1);

  const RankMapping single = contiguous_mapping(make(8, 8));
  for (int r = 0; r < 8; ++r) CHECK(single.supernode_of(r) == 0);
}

TEST_CASE("round robin mapping interleaves supernodes") {
  const RankMapping m = round_robin_mapping(make(16, 4));
  for (int r : {0, 4, 8, 12}) CHECK(m.supernode_of(r) == 0);
  for (int r : {1, 5, 9, 13}) CHECK(m.supernode_of(r) == 1);

  const RankMapping two = round_robin_mapping(make(8, 4));
  for (int r = 0; r < 8; ++r) CHECK(two.supernode_of(r) == r % 2);

  const TopologySpec degenerate = make(8, 8);
  const RankMapping rr = round_robin_mapping(degenerate);
  const RankMapping contig = contiguous_mapping(degenerate);
  for (int r = 0; r < 8; ++r) {
    CHECK(rr.supernode_of(r) == contig.supernode_of(r));
    CHECK(rr.slot_of(r) == contig.slot_of(r));
  }
}

TEST_CASE("link_class follows the supernode partition") {
  const TopologySpec spec = make(8, 4);
  const RankMapping contig = contiguous_mapping(spec);
  const RankMapping rr = round_robin_mapping(spec);
  CHECK(link_class(contig, 0, 3) == LinkClass::intra);
  CHECK(link_class(contig, 0, 4) == LinkClass::cross);
  CHECK(link_class(rr, 0, 4) == LinkClass::intra);

  CHECK_THROWS_AS(link_class(contig, 2, 2), std::invalid_argument);
  CHECK_THROWS_AS(link_class(contig, -1, 2), std::invalid_argument);
  CHECK_THROWS_AS(link_class(contig, 0, 8), std::invalid_argument);
}

TEST_CASE("mappings are balanced bijections") {
  for (int p = 2; p <= 64; p *= 2)
    for (int q = 1; q <= p; q *= 2) {
      const TopologySpec spec = make(p, q);
      for (const RankMapping& m : {contiguous_mapping(spec), round_robin_mapping(spec)}) {
        std::set<std::pair<int, int>> positions;
        std::vector<int> occupancy(static_cast<std::size_t>(spec.supernode_count), 0);
        for (int r = 0; r < p; ++r) {
          REQUIRE(m.supernode_of(r) >= 0);
          REQUIRE(m.supernode_of(r) < spec.supernode_count);
          REQUIRE(m.slot_of(r) >= 0);
          REQUIRE(m.slot_of(r) < q);
          REQUIRE(positions.emplace(m.supernode_of(r), m.slot_of(r)).second);
          ++occupancy[static_cast<std::size_t>(m.supernode_of(r))];
        }
        for (int count : occupancy) REQUIRE(count == q);
      }
    }
}

TEST_CASE("link_class is symmetric and round robin keeps S-strides local") {
  for (int p : {8, 16, 32})
    for (int q = 1; q <= p; q *= 2) {
      const TopologySpec spec = make(p, q);
      const int s = spec.supernode_count;
      for (const RankMapping& m : {contiguous_mapping(spec), round_robin_mapping(spec)})
        for (int a = 0; a < p; ++a)
          for (int b = a + 1; b < p; ++b) REQUIRE(link_class(m, a, b) == link_class(m, b, a));
      const RankMapping rr = round_robin_mapping(spec);
      for (int r = 0; r < p; ++r)
        for (int d = s; r + d < p; d += s)
          REQUIRE(link_class(rr, r, r + d) == LinkClass::intra);
    }
}
