#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "doctest.h"
#include "eegraph/pooling.hpp"
#include "helpers/gradcheck.hpp"
#include "helpers/random_graph.hpp"

using namespace eegraph;
using namespace testutil;

namespace {

std::set<std::set<std::size_t>> group_sets(
    const std::vector<std::vector<std::size_t>>& groups) {
  std::set<std::set<std::size_t>> out;
  for (const auto& g : groups) out.insert({g.begin(), g.end()});
  return out;
}

}  // namespace

TEST_CASE("sortpool: descending lexicographic order over the last round") {
  std::mt19937_64 rng(1);

  // one round of width two: the whole row is the key
  SortPool single(3, 1, 2, 1, rng);
  Tensor H = Tensor::from_vector({3, 2}, {1, 2, 3, 0, 1, 5});
  CHECK(single.sort_order(H) == std::vector<std::size_t>{1, 2, 0});

  // already sorted input keeps its order
  Tensor sorted = Tensor::from_vector({3, 2}, {9, 9, 5, 5, 1, 1});
  CHECK(single.sort_order(sorted) == std::vector<std::size_t>{0, 1, 2});

  // two rounds of width one: the second block decides first
  SortPool dual(3, 2, 1, 1, rng);
  CHECK(dual.sort_order(H) == std::vector<std::size_t>{2, 0, 1});

  // tie in the last round falls back to the earlier round, then node index
  Tensor tie = Tensor::from_vector({2, 2}, {1, 5, 2, 5});
  CHECK(dual.sort_order(tie) == std::vector<std::size_t>{1, 0});
  Tensor equal = Tensor::from_vector({2, 2}, {3, 3, 3, 3});
  CHECK(dual.sort_order(equal) == std::vector<std::size_t>{0, 1});
}

TEST_CASE("sortpool: padding and truncation fix the output length") {
  std::mt19937_64 rng(2);

  SortPool pad(4, 1, 2, 1, rng);
  pad.filters[0] = Tensor::from_vector({2}, {1, 1});
  Tensor two = Tensor::from_vector({2, 2}, {1, 2, 3, 0});
  // kept rows [3,0],[1,2] plus two zero rows; window sums 3,3,0,0
  CHECK(pad.forward(two).at(0) == doctest::Approx(3.0));

  SortPool trunc(2, 1, 2, 1, rng);
  trunc.filters[0] = Tensor::from_vector({2}, {0, 1});
  Tensor three = Tensor::from_vector({3, 2}, {3, 0, 2, 1, 1, 9});
  // sorted rows [3,0],[2,1],[1,9]; rho = 2 drops the 9 entirely
  CHECK(trunc.forward(three).at(0) == doctest::Approx(1.0));

  SortPool wide(3, 2, 2, 5, rng);
  Tensor r = random_features(rng, 7, 4);
  CHECK(wide.forward(r).size() == 5);
}

TEST_CASE("sortpool: order override replaces the feature sort") {
  std::mt19937_64 rng(3);
  SortPool pool(2, 1, 1, 1, rng);
  pool.filters[0] = Tensor::from_vector({1}, {1});
  Tensor H = Tensor::from_vector({3, 1}, {1, 2, 3});
  CHECK(pool.forward(H).at(0) == doctest::Approx(3.0));
  CHECK(pool.forward(H, std::vector<std::size_t>{0, 1, 2}).at(0) ==
        doctest::Approx(2.0));
  CHECK_THROWS_AS(pool.forward(H, std::vector<std::size_t>{0}),
                  std::invalid_argument);
}

TEST_CASE("sortpool: shape and rho validation") {
  std::mt19937_64 rng(4);
  CHECK_THROWS_AS(SortPool(0, 1, 1, 1, rng), std::invalid_argument);
  SortPool pool(2, 2, 3, 1, rng);
  CHECK_THROWS_AS(pool.sort_order(Tensor::zeros({4, 5})),
                  std::invalid_argument);
}

TEST_CASE("edgepool: a single edge contracts with score one") {
  std::mt19937_64 rng(5);
  EdgePool pool(2, rng);
  Graph k2 = complete_graph(2);
  Tensor H = Tensor::from_vector({2, 2}, {1, 2, 10, 20});
  auto r = pool.forward(k2, H);
  CHECK(r.graph.node_count() == 1);
  CHECK(r.graph.edges().empty());
  REQUIRE(r.groups.size() == 1);
  CHECK(group_sets(r.groups) == std::set<std::set<std::size_t>>{{0, 1}});
  CHECK(r.H.at(0, 0) == doctest::Approx(11.0));
  CHECK(r.H.at(0, 1) == doctest::Approx(22.0));
}

TEST_CASE("edgepool: P3 leaves a singleton attached to the supernode") {
  std::mt19937_64 rng(6);
  EdgePool pool(2, rng);
  pool.w = Tensor::from_vector({4}, {1, 0, 0, 0});
  pool.b = Tensor::zeros({1});
  Graph p3 = path_graph(3);
  Tensor H = Tensor::from_vector({3, 2}, {1, 0, 0, 0, 0, 0});
  auto r = pool.forward(p3, H);
  CHECK(r.graph.node_count() == 2);
  CHECK(r.graph.undirected_edges().size() == 1);
  CHECK(group_sets(r.groups) ==
        std::set<std::set<std::size_t>>{{0, 1}, {2}});
  // symmetric score averages w over both endpoint orders: raw = 0.5
  const double s = std::exp(0.5) / (std::exp(0.5) + 1.0);
  CHECK(r.H.at(0, 0) == doctest::Approx(s));
  CHECK(r.H.at(0, 1) == doctest::Approx(0.0).scale(1.0));
  CHECK(r.H.at(1, 0) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("edgepool: equal scores on P4 halve the node count") {
  std::mt19937_64 rng(7);
  EdgePool pool(1, rng);
  pool.w = Tensor::zeros({2});
  pool.b = Tensor::zeros({1});
  Graph p4 = path_graph(4);
  Tensor H = Tensor::from_vector({4, 1}, {1, 2, 4, 8});
  auto r = pool.forward(p4, H);
  CHECK(r.graph.node_count() == 2);
  CHECK(r.graph.undirected_edges().size() == 1);
  CHECK(group_sets(r.groups) ==
        std::set<std::set<std::size_t>>{{0, 1}, {2, 3}});
  // three edges share score 1/3
  CHECK(r.H.at(0, 0) == doctest::Approx(3.0 / 3.0));
  CHECK(r.H.at(1, 0) == doctest::Approx(12.0 / 3.0));
}

TEST_CASE("edgepool: edgeless graphs pass through untouched") {
  std::mt19937_64 rng(8);
  EdgePool pool(2, rng);
  Graph none(3, {}, true);
  Tensor H = random_features(rng, 3, 2);
  auto r = pool.forward(none, H);
  CHECK(r.graph.node_count() == 3);
  CHECK(r.groups.size() == 3);
  for (std::size_t i = 0; i < H.size(); ++i)
    CHECK(r.H.values()[i] == H.values()[i]);
}

TEST_CASE("edgepool: output node count lands in the matching bound") {
  std::mt19937_64 rng(9);
  EdgePool pool(3, rng);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + trial % 6;
    Graph g = random_graph(rng, n, 0.5);
    if (g.edges().empty()) continue;
    auto r = pool.forward(g, random_features(rng, n, 3));
    CHECK(r.graph.node_count() >= (n + 1) / 2);
    CHECK(r.graph.node_count() <= n - 1);
  }
}

TEST_CASE("edgepool: contraction commutes with relabeling for distinct scores") {
  std::mt19937_64 rng(10);
  EdgePool pool(2, rng);
  Graph g = random_graph(rng, 6, 0.5);
  Tensor H = random_features(rng, 6, 2);
  std::vector<std::size_t> perm = {4, 2, 0, 5, 1, 3};
  auto base = pool.forward(g, H);
  auto permuted = pool.forward(permute_graph(g, perm), permute_rows(H, perm));

  std::set<std::set<std::size_t>> mapped;
  for (const auto& grp : base.groups) {
    std::set<std::size_t> s;
    for (std::size_t v : grp) s.insert(perm[v]);
    mapped.insert(s);
  }
  CHECK(mapped == group_sets(permuted.groups));
}

TEST_CASE("sagpool: rho one keeps everything scaled by its own score") {
  std::mt19937_64 rng(11);
  SagPool pool(1, 1.0, rng);
  pool.W_att = Tensor::from_vector({1, 1}, {0.5});
  Tensor S = Tensor::identity(2);
  Tensor X = Tensor::from_vector({2, 1}, {1, 2});
  auto r = pool.forward(S, X);
  REQUIRE(r.indices.size() == 2);
  CHECK(r.indices == std::vector<std::size_t>{1, 0});
  CHECK(r.H.at(0, 0) == doctest::Approx(2 * std::tanh(1.0)));
  CHECK(r.H.at(1, 0) == doctest::Approx(1 * std::tanh(0.5)));
}

TEST_CASE("sagpool: top half selection in score order") {
  std::mt19937_64 rng(12);
  SagPool pool(1, 0.5, rng);
  pool.W_att = Tensor::from_vector({1, 1}, {1.0});
  Tensor S = Tensor::identity(4);
  Tensor X = Tensor::from_vector(
      {4, 1}, {std::atanh(0.9), std::atanh(0.1), std::atanh(0.8),
               std::atanh(0.2)});
  auto r = pool.forward(S, X);
  CHECK(r.indices == std::vector<std::size_t>{0, 2});
  CHECK(r.H.at(0, 0) == doctest::Approx(std::atanh(0.9) * 0.9));
  CHECK(r.H.at(1, 0) == doctest::Approx(std::atanh(0.8) * 0.8));
}

TEST_CASE("sagpool: zero attention degenerates to index order and zero rows") {
  std::mt19937_64 rng(13);
  SagPool pool(2, 0.5, rng);
  pool.W_att = Tensor::zeros({2, 1});
  Graph p4 = path_graph(4);
  Tensor S = p4.shift_operator(ShiftOperatorKind::NormalizedAdjacency);
  Tensor X = random_features(rng, 4, 2);
  auto r = pool.forward(S, X);
  CHECK(r.indices == std::vector<std::size_t>{0, 1});
  for (double v : r.H.values()) CHECK(v == 0.0);
}

TEST_CASE("sagpool: keeps exactly ceil(rho n) nodes") {
  std::mt19937_64 rng(14);
  for (auto [n, rho, expected] :
       {std::tuple<std::size_t, double, std::size_t>{5, 0.5, 3},
        {4, 0.25, 1},
        {3, 1.0, 3},
        {7, 0.3, 3}}) {
    SagPool pool(2, rho, rng);
    Tensor S = Tensor::identity(n);
    Tensor X = random_features(rng, n, 2);
    CHECK(pool.forward(S, X).indices.size() == expected);
  }
}

TEST_CASE("sagpool: validation") {
  std::mt19937_64 rng(15);
  CHECK_THROWS_AS(SagPool(2, 0.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(SagPool(2, 1.5, rng), std::invalid_argument);
  SagPool pool(2, 0.5, rng);
  CHECK_THROWS_AS(pool.forward(Tensor::zeros({3, 3}), Tensor::zeros({2, 2})),
                  std::invalid_argument);
}

TEST_CASE("sagpool: kept set tracks a node permutation") {
  std::mt19937_64 rng(16);
  SagPool pool(2, 0.5, rng);
  Graph g = random_graph(rng, 6, 0.6);
  Tensor X = random_features(rng, 6, 2);
  std::vector<std::size_t> perm = {3, 5, 1, 0, 4, 2};
  Graph pg = permute_graph(g, perm);
  auto base = pool.forward(g.shift_operator(ShiftOperatorKind::Adjacency), X);
  auto moved = pool.forward(pg.shift_operator(ShiftOperatorKind::Adjacency),
                            permute_rows(X, perm));
  REQUIRE(base.indices.size() == moved.indices.size());
  for (std::size_t r = 0; r < base.indices.size(); ++r) {
    CHECK(perm[base.indices[r]] == moved.indices[r]);
    for (std::size_t f = 0; f < 2; ++f)
      CHECK(base.H.at(r, f) == doctest::Approx(moved.H.at(r, f)).epsilon(1e-9));
  }
}

TEST_CASE("set2set: attention readout ignores duplication and order") {
  std::mt19937_64 rng(17);
  Set2Set pool(3, 4, rng);

  Tensor one = Tensor::from_vector({1, 3}, {0.2, -0.5, 1.1});
  Tensor three = Tensor::from_vector(
      {3, 3}, {0.2, -0.5, 1.1, 0.2, -0.5, 1.1, 0.2, -0.5, 1.1});
  Tensor a = pool.forward(one), b = pool.forward(three);
  REQUIRE(a.size() == 4);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(a.at(i) == doctest::Approx(b.at(i)).epsilon(1e-12));

  Tensor H = random_features(rng, 5, 3);
  Tensor P = permute_rows(H, {4, 0, 3, 1, 2});
  Tensor x = pool.forward(H), y = pool.forward(P);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(x.at(i) == doctest::Approx(y.at(i)).epsilon(1e-9));
}

TEST_CASE("set2set: validation") {
  std::mt19937_64 rng(18);
  CHECK_THROWS_AS(Set2Set(3, 4, rng, 0), std::invalid_argument);
  Set2Set pool(3, 4, rng);
  CHECK_THROWS_AS(pool.forward(Tensor::zeros({2, 5})), std::invalid_argument);
  CHECK_THROWS_AS(pool.forward(Tensor::zeros({0, 3})), std::invalid_argument);
}

TEST_CASE("pooling parameter collection") {
  std::mt19937_64 rng(19);
  auto total = [](const ParamList& p) {
    std::size_t s = 0;
    for (const auto& q : p) s += q.tensor.size();
    return s;
  };

  ParamList sp;
  SortPool(2, 2, 3, 4, rng).collect("sp", sp);
  CHECK(total(sp) == 24);

  ParamList ep;
  EdgePool(3, rng).collect("ep", ep);
  CHECK(total(ep) == 7);
  for (const auto& p : ep)
    if (p.tensor.size() == 1) CHECK_FALSE(p.regularize);

  ParamList sg;
  SagPool(5, 0.5, rng).collect("sg", sg);
  CHECK(total(sg) == 5);

  ParamList s2;
  Set2Set(4, 7, rng).collect("s2", s2);
  CHECK(total(s2) == 8 * 16 + 4 * 16 + 16 + 8 * 7 + 7);
}

TEST_CASE("pooling gradchecks") {
  std::mt19937_64 rng(20);

  {
    SortPool pool(3, 1, 2, 2, rng);
    Tensor H = random_features(rng, 4, 2, true);
    for (auto& f : pool.filters) f.set_requires_grad(true);
    auto r = gradcheck([&] { return sum(pool.forward(H)); },
                       {H, pool.filters[0], pool.filters[1]});
    INFO("sortpool worst " << r.worst);
    CHECK(r.ok());
  }
  {
    EdgePool pool(2, rng);
    pool.w = Tensor::from_vector({4}, {0.3, -0.2, 0.5, 0.1}, true);
    pool.b = Tensor::from_vector({1}, {0.05}, true);
    Graph p4 = path_graph(4);
    Tensor H =
        Tensor::from_vector({4, 2}, {1, 0, 0, 2, 3, 1, 0.5, 0.25}, true);
    auto r = gradcheck([&] { return sum(pool.forward(p4, H).H); },
                       {H, pool.w, pool.b});
    INFO("edgepool worst " << r.worst);
    CHECK(r.ok());
  }
  {
    SagPool pool(2, 0.5, rng);
    pool.W_att.set_requires_grad(true);
    Graph g = cycle_graph(5);
    Tensor S = g.shift_operator(ShiftOperatorKind::NormalizedAdjacency);
    Tensor X = random_features(rng, 5, 2, true);
    auto r = gradcheck([&] { return sum(pool.forward(S, X).H); },
                       {X, pool.W_att});
    INFO("sagpool worst " << r.worst);
    CHECK(r.ok());
  }
  {
    Set2Set pool(2, 3, rng);
    pool.lstm.W_ih.set_requires_grad(true);
    pool.lstm.W_hh.set_requires_grad(true);
    pool.lstm.bias.set_requires_grad(true);
    pool.out_proj.W.set_requires_grad(true);
    pool.out_proj.b.set_requires_grad(true);
    Tensor H = random_features(rng, 4, 2, true);
    auto r = gradcheck(
        [&] { return sum(pool.forward(H)); },
        {H, pool.lstm.W_ih, pool.lstm.W_hh, pool.lstm.bias, pool.out_proj.W,
         pool.out_proj.b});
    INFO("set2set worst " << r.worst);
    CHECK(r.ok());
  }
}
