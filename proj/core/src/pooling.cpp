#include "eegraph/pooling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace eegraph {

SortPool::SortPool(std::size_t rho_, std::size_t rounds_,
                   std::size_t round_width_, std::size_t n_filters,
                   std::mt19937_64& rng)
    : rho(rho_), rounds(rounds_), round_width(round_width_) {
  if (rho < 1) throw std::invalid_argument("sortpool: rho must be >= 1");
  const std::size_t width = rounds * round_width;
  filters.reserve(n_filters);
  for (std::size_t f = 0; f < n_filters; ++f)
    filters.push_back(glorot_uniform({width}, width, 1, rng));
}

std::vector<std::size_t> SortPool::sort_order(const Tensor& H_concat) const {
  const std::size_t n = H_concat.shape()[0];
  const std::size_t width = rounds * round_width;
  if (H_concat.rank() != 2 || H_concat.shape()[1] != width)
    throw std::invalid_argument("sortpool: input " +
                                shape_to_string(H_concat.shape()) +
                                " does not match " + std::to_string(rounds) +
                                " rounds of width " +
                                std::to_string(round_width));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const double* data = H_concat.data();
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    // last round first, then earlier rounds, all descending lexicographic
    for (std::size_t r = rounds; r-- > 0;) {
      for (std::size_t f = 0; f < round_width; ++f) {
        const double va = data[a * width + r * round_width + f];
        const double vb = data[b * width + r * round_width + f];
        if (va != vb) return va > vb;
      }
    }
    return a < b;
  });
  return order;
}

Tensor SortPool::forward(
    const Tensor& H_concat,
    const std::optional<std::vector<std::size_t>>& order_override) const {
  const std::size_t n = H_concat.shape()[0];
  const std::size_t width = rounds * round_width;
  std::vector<std::size_t> order =
      order_override ? *order_override : sort_order(H_concat);
  if (order.size() != n)
    throw std::invalid_argument("sortpool: order covers " +
                                std::to_string(order.size()) + " of " +
                                std::to_string(n) + " nodes");
  if (order.size() > rho) order.resize(rho);

  Tensor kept = gather_rows(H_concat, order);
  if (order.size() < rho) {
    Tensor pad = Tensor::zeros({rho - order.size(), width});
    kept = concat({kept, pad}, 0);
  }
  const Tensor flat = reshape(kept, {rho * width});

  std::vector<Tensor> pooled;
  pooled.reserve(filters.size());
  for (const auto& f : filters)
    pooled.push_back(max(conv1d(flat, f, width)));
  return concat(pooled, 0);
}

void SortPool::collect(const std::string& prefix, ParamList& out) const {
  for (std::size_t f = 0; f < filters.size(); ++f)
    out.push_back({prefix + ".filter" + std::to_string(f), filters[f], true,
                   true});
}

EdgePool::EdgePool(std::size_t features, std::mt19937_64& rng)
    : w(glorot_uniform({2 * features}, 2 * features, 1, rng)),
      b(Tensor::zeros({1}, true)) {}

EdgePool::Result EdgePool::forward(const Graph& g, const Tensor& H) const {
  const std::size_t n = g.node_count();
  if (H.rank() != 2 || H.shape()[0] != n)
    throw std::invalid_argument("edgepool: H " + shape_to_string(H.shape()) +
                                " does not match " + std::to_string(n) +
                                " nodes");
  const std::size_t f = H.shape()[1];
  const auto edges = g.undirected_edges();
  if (edges.empty()) {
    // nothing to contract: identity pooling
    Result r{g, H, {}};
    r.groups.reserve(n);
    for (std::size_t v = 0; v < n; ++v) r.groups.push_back({v});
    return r;
  }

  std::vector<Tensor> raw;
  raw.reserve(edges.size());
  for (const auto& [i, j] : edges) {
    // averaging both endpoint orders keeps the score independent of node
    // labeling, so contraction commutes with graph relabeling
    const Tensor cat =
        scale(add(reshape(gather_rows(H, {i, j}), {2 * f}),
                  reshape(gather_rows(H, {j, i}), {2 * f})),
              0.5);
    raw.push_back(add(sum(mul(cat, w)), b));
  }
  const Tensor scores = softmax(concat(raw, 0));

  // greedy maximal matching by descending score, ties by edge order (i, j)
  std::vector<std::size_t> edge_order(edges.size());
  std::iota(edge_order.begin(), edge_order.end(), 0);
  std::stable_sort(edge_order.begin(), edge_order.end(),
                   [&](std::size_t a, std::size_t b) {
                     const double sa = scores.at(a), sb = scores.at(b);
                     if (sa != sb) return sa > sb;
                     return edges[a] < edges[b];
                   });
  std::vector<bool> contracted(n, false);
  std::map<std::size_t, std::size_t> partner;  // min index -> matched edge
  for (std::size_t e : edge_order) {
    const auto [i, j] = edges[e];
    if (contracted[i] || contracted[j]) continue;
    contracted[i] = contracted[j] = true;
    partner[std::min(i, j)] = e;
  }

  // output nodes ordered by minimum original member index
  Result result{Graph(1, {}, true), Tensor(), {}};
  std::vector<std::size_t> old_to_new(n);
  std::vector<Tensor> new_rows;
  for (std::size_t v = 0; v < n; ++v) {
    if (contracted[v]) {
      auto it = partner.find(v);
      if (it == partner.end()) continue;  // the larger endpoint of its pair
      const auto [i, j] = edges[it->second];
      const Tensor hi = gather_rows(H, {i});
      const Tensor hj = gather_rows(H, {j});
      const Tensor s = gather(scores, {it->second});
      new_rows.push_back(scale_by(add(hi, hj), s));
      const std::size_t id = result.groups.size();
      result.groups.push_back({i, j});
      old_to_new[i] = old_to_new[j] = id;
    } else {
      new_rows.push_back(gather_rows(H, {v}));
      const std::size_t id = result.groups.size();
      result.groups.push_back({v});
      old_to_new[v] = id;
    }
  }

  std::set<std::pair<std::size_t, std::size_t>> new_pairs;
  for (const auto& [i, j] : edges) {
    const std::size_t a = old_to_new[i], bnew = old_to_new[j];
    if (a != bnew) new_pairs.insert({std::min(a, bnew), std::max(a, bnew)});
  }
  std::vector<Edge> new_edges;
  for (const auto& [a, bnew] : new_pairs) {
    new_edges.push_back({a, bnew, 1.0});
    new_edges.push_back({bnew, a, 1.0});
  }
  result.graph = Graph(new_rows.size(), std::move(new_edges), true);
  result.H = concat(new_rows, 0);
  return result;
}

void EdgePool::collect(const std::string& prefix, ParamList& out) const {
  out.push_back({prefix + ".w", w, true, true});
  out.push_back({prefix + ".b", b, true, false});
}

SagPool::SagPool(std::size_t features, double rho_, std::mt19937_64& rng)
    : W_att(glorot_uniform({features, 1}, features, 1, rng)), rho(rho_) {
  if (!(rho > 0.0 && rho <= 1.0))
    throw std::invalid_argument("sagpool: rho must be in (0, 1]");
}

SagPool::Result SagPool::forward(const Tensor& S, const Tensor& X) const {
  if (S.rank() != 2 || S.shape()[0] != S.shape()[1] || X.rank() != 2 ||
      X.shape()[0] != S.shape()[0])
    throw std::invalid_argument("sagpool: S " + shape_to_string(S.shape()) +
                                " and X " + shape_to_string(X.shape()) +
                                " do not agree");
  const std::size_t n = X.shape()[0];
  const Tensor Z = reshape(tanh(matmul(matmul(S, X), W_att)), {n});

  const std::size_t keep =
      static_cast<std::size_t>(std::ceil(rho * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     const double za = Z.at(a), zb = Z.at(b);
                     if (za != zb) return za > zb;
                     return a < b;
                   });
  order.resize(keep);

  Result r;
  r.indices = order;
  r.H = scale_rows(gather_rows(X, order), gather(Z, order));
  return r;
}

void SagPool::collect(const std::string& prefix, ParamList& out) const {
  out.push_back({prefix + ".w_att", W_att, true, true});
}

Set2Set::Set2Set(std::size_t features_, std::size_t out, std::mt19937_64& rng,
                 std::size_t steps_)
    : lstm(2 * features_, features_, rng),
      out_proj(2 * features_, out, rng),
      features(features_),
      steps(steps_) {
  if (steps < 1) throw std::invalid_argument("set2set: steps must be >= 1");
}

Tensor Set2Set::forward(const Tensor& H) const {
  if (H.rank() != 2 || H.shape()[0] == 0 || H.shape()[1] != features)
    throw std::invalid_argument("set2set: H " + shape_to_string(H.shape()) +
                                " does not match feature width " +
                                std::to_string(features));
  Tensor q_star = Tensor::zeros({2 * features});
  LstmCell::State state = lstm.initial_state();
  for (std::size_t t = 0; t < steps; ++t) {
    state = lstm.forward(q_star, state);
    const Tensor& q = state.h;
    const Tensor alpha = softmax(matmul(H, q));
    const Tensor r = matmul(alpha, H);
    q_star = concat({q, r}, 0);
  }
  return relu(out_proj.forward(q_star));
}

void Set2Set::collect(const std::string& prefix, ParamList& out) const {
  lstm.collect(prefix + ".lstm", out);
  out_proj.collect(prefix + ".out", out);
}

}  // namespace eegraph
