#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include "doctest.h"
#include "eegraph/wl.hpp"
#include "helpers/random_graph.hpp"

using namespace eegraph;
using namespace testutil;

namespace {

std::size_t distinct(const std::vector<int>& colors) {
  return std::set<int>(colors.begin(), colors.end()).size();
}

std::vector<std::size_t> random_permutation(std::mt19937_64& rng,
                                            std::size_t n) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

}  // namespace

TEST_CASE("C4 stays monochromatic and converges after one round") {
  WlColoring c = wl_refine(cycle_graph(4));
  CHECK(c.converged);
  CHECK(c.rounds.size() == 2);
  for (const auto& round : c.rounds) CHECK(distinct(round) == 1);
}

TEST_CASE("S3 splits center from leaves at round one") {
  WlColoring c = wl_refine(star_graph(3));
  CHECK(c.converged);
  REQUIRE(c.rounds.size() >= 2);
  const auto& r1 = c.rounds[1];
  CHECK(distinct(r1) == 2);
  CHECK(r1[1] == r1[2]);
  CHECK(r1[2] == r1[3]);
  CHECK(r1[0] != r1[1]);
  CHECK(c.final_colors() == r1);
}

TEST_CASE("P3 separates endpoints from the middle") {
  WlColoring c = wl_refine(path_graph(3));
  CHECK(c.converged);
  const auto& f = c.final_colors();
  CHECK(f[0] == f[2]);
  CHECK(f[0] != f[1]);
}

TEST_CASE("round zero is uniform") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    Graph g = random_graph(rng, 6, 0.4);
    WlColoring c = wl_refine(g);
    CHECK(distinct(c.rounds[0]) == 1);
  }
}

TEST_CASE("max_rounds caps refinement and suppresses convergence") {
  WlColoring c = wl_refine(path_graph(4), 1);
  CHECK_FALSE(c.converged);
  CHECK(c.rounds.size() == 2);
  // a second round is enough for P4
  WlColoring full = wl_refine(path_graph(4));
  CHECK(full.converged);
}

TEST_CASE("distinct color count is non-decreasing and partitions refine") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    Graph g = random_graph(rng, 8, 0.3);
    WlColoring c = wl_refine(g);
    for (std::size_t r = 1; r < c.rounds.size(); ++r) {
      CHECK(distinct(c.rounds[r]) >= distinct(c.rounds[r - 1]));
      // same color now implies same color before
      for (std::size_t u = 0; u < g.node_count(); ++u)
        for (std::size_t v = u + 1; v < g.node_count(); ++v)
          if (c.rounds[r][u] == c.rounds[r][v])
            CHECK(c.rounds[r - 1][u] == c.rounds[r - 1][v]);
    }
  }
}

TEST_CASE("refinement is permutation-equivariant with identical integers") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + trial % 6;
    Graph g = random_graph(rng, n, 0.5);
    auto perm = random_permutation(rng, n);
    Graph pg = permute_graph(g, perm);
    WlColoring a = wl_refine(g);
    WlColoring b = wl_refine(pg);
    REQUIRE(a.rounds.size() == b.rounds.size());
    // lexicographic compression pins the integers, not just the partition
    for (std::size_t v = 0; v < n; ++v)
      CHECK(a.final_colors()[v] == b.final_colors()[perm[v]]);
  }
}

TEST_CASE("wl_equivalent accepts permuted copies") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 2 + trial % 7;
    Graph g = random_graph(rng, n, 0.5);
    Graph pg = permute_graph(g, random_permutation(rng, n));
    CHECK(wl_equivalent(g, pg));
  }
}

TEST_CASE("C6 vs C3 + C3 is the classic blind spot") {
  Graph c6 = cycle_graph(6);
  Graph c3x2 = disjoint_union(cycle_graph(3), cycle_graph(3));
  CHECK(wl_equivalent(c6, c3x2));
}

TEST_CASE("P3 vs K3 is distinguished") {
  CHECK_FALSE(wl_equivalent(path_graph(3), complete_graph(3)));
}

TEST_CASE("node count mismatch is trivially false") {
  CHECK_FALSE(wl_equivalent(path_graph(3), path_graph(4)));
  CHECK(wl_equivalent(Graph(0, {}, true), Graph(0, {}, true)));
}

TEST_CASE("weighted graphs are rejected") {
  Graph w(2, {{0, 1, 0.5}, {1, 0, 0.5}}, true);
  CHECK_THROWS_AS(wl_refine(w), std::invalid_argument);
  CHECK_THROWS_AS(wl_equivalent(w, w), std::invalid_argument);
  CHECK_THROWS_AS(wl_equivalent(path_graph(2), w), std::invalid_argument);
}
