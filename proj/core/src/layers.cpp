#include "eegraph/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "eegraph/rng.hpp"

namespace eegraph {

Tensor glorot_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out,
                      std::mt19937_64& rng) {
  const double limit =
      std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::size_t total = 1;
  for (std::size_t e : shape) total *= e;
  std::vector<double> values(total);
  for (auto& v : values) v = uniform_range(rng, -limit, limit);
  return Tensor::from_vector(std::move(shape), std::move(values), true);
}

Dense::Dense(std::size_t in, std::size_t out, std::mt19937_64& rng)
    : W(glorot_uniform({in, out}, in, out, rng)),
      b(Tensor::zeros({out}, true)) {}

Tensor Dense::forward(const Tensor& x) const {
  return add(matmul(x, W), b);
}

void Dense::collect(const std::string& prefix, ParamList& out) const {
  out.push_back({prefix + ".w", W, true, true});
  out.push_back({prefix + ".b", b, true, false});
}

Tensor apply_nonlinearity(const Tensor& x, Nonlinearity nl) {
  switch (nl) {
    case Nonlinearity::Identity: return x;
    case Nonlinearity::Relu: return relu(x);
    case Nonlinearity::Tanh: return tanh(x);
  }
  throw std::invalid_argument("apply_nonlinearity: bad kind");
}

PolyFilterBank::PolyFilterBank(std::size_t K, std::size_t in, std::size_t out,
                               std::mt19937_64& rng, Nonlinearity sigma_)
    : sigma(sigma_) {
  if (K < 1) throw std::invalid_argument("PolyFilterBank: K must be >= 1");
  taps.reserve(K);
  for (std::size_t k = 0; k < K; ++k)
    taps.push_back(glorot_uniform({in, out}, in, out, rng));
}

Tensor PolyFilterBank::forward(const Tensor& S, const Tensor& X) const {
  if (S.rank() != 2 || S.shape()[0] != S.shape()[1])
    throw std::invalid_argument("poly_filter: S must be square, got " +
                                shape_to_string(S.shape()));
  if (X.rank() != 2 || X.shape()[0] != S.shape()[0])
    throw std::invalid_argument("poly_filter: X rows " +
                                shape_to_string(X.shape()) +
                                " do not match S " + shape_to_string(S.shape()));
  Tensor shifted = X;  // S^0 X
  Tensor acc;
  for (std::size_t k = 0; k < taps.size(); ++k) {
    if (k > 0) shifted = matmul(S, shifted);
    Tensor term = apply_nonlinearity(matmul(shifted, taps[k]), sigma);
    acc = k == 0 ? term : add(acc, term);
  }
  return acc;
}

void PolyFilterBank::collect(const std::string& prefix, ParamList& out) const {
  for (std::size_t k = 0; k < taps.size(); ++k)
    out.push_back({prefix + ".w" + std::to_string(k), taps[k], true, true});
}

GraphSageLayer::GraphSageLayer(std::size_t in, std::size_t out,
                               std::mt19937_64& rng)
    : W_pool(glorot_uniform({in, in}, in, in, rng)),
      b(Tensor::zeros({in}, true)),
      W_k(glorot_uniform({2 * in, out}, 2 * in, out, rng)) {}

Tensor GraphSageLayer::forward(const Graph& g, const Tensor& H,
                               std::mt19937_64* sample_rng) const {
  const std::size_t n = g.node_count();
  if (H.rank() != 2 || H.shape()[0] != n)
    throw std::invalid_argument("sage_forward: H " + shape_to_string(H.shape()) +
                                " does not match " + std::to_string(n) +
                                " nodes");
  const Tensor pooled = relu(add(matmul(H, W_pool), b));

  Tensor agg;
  if (!neighbor_sample_size) {
    // full neighborhoods: row-normalized adjacency averages neighbor rows,
    // and zero-degree rows stay zero
    Tensor mean_op = Tensor::zeros({n, n});
    for (std::size_t v = 0; v < n; ++v) {
      const auto& nbrs = g.neighbors(v);
      if (nbrs.empty()) continue;
      const double inv = 1.0 / static_cast<double>(nbrs.size());
      for (std::size_t u : nbrs) mean_op.data()[v * n + u] = inv;
    }
    agg = matmul(mean_op, pooled);
  } else {
    if (!sample_rng)
      throw std::invalid_argument(
          "sage_forward: neighbor sampling requires an rng");
    Tensor mean_op = Tensor::zeros({n, n});
    for (std::size_t v = 0; v < n; ++v) {
      std::vector<std::size_t> nbrs = g.neighbors(v);
      if (nbrs.empty()) continue;
      if (nbrs.size() > *neighbor_sample_size) {
        shuffle_vector(nbrs, *sample_rng);
        nbrs.resize(*neighbor_sample_size);
      }
      const double inv = 1.0 / static_cast<double>(nbrs.size());
      for (std::size_t u : nbrs) mean_op.data()[v * n + u] = inv;
    }
    agg = matmul(mean_op, pooled);
  }

  const Tensor updated = relu(matmul(concat({H, agg}, 1), W_k));
  return l2_normalize_rows(updated);
}

void GraphSageLayer::collect(const std::string& prefix, ParamList& out) const {
  out.push_back({prefix + ".w_pool", W_pool, true, true});
  out.push_back({prefix + ".b", b, true, false});
  out.push_back({prefix + ".w_k", W_k, true, true});
}

GinLayer::GinLayer(std::size_t in, std::size_t hidden, std::size_t out,
                   std::mt19937_64& rng)
    : mlp1(in, hidden, rng),
      mlp2(hidden, out, rng),
      lambda(Tensor::zeros({1}, true)) {}

Tensor GinLayer::pre_mlp(const Graph& g, const Tensor& H) const {
  const std::size_t n = g.node_count();
  if (H.rank() != 2 || H.shape()[0] != n)
    throw std::invalid_argument("gin_forward: H " + shape_to_string(H.shape()) +
                                " does not match " + std::to_string(n) +
                                " nodes");
  const Tensor neighbor_sum = matmul(g.adjacency(), H);
  const Tensor one_plus_lambda = add_scalar(Tensor::scalar(1.0), lambda);
  return add(scale_by(H, one_plus_lambda), neighbor_sum);
}

Tensor GinLayer::forward(const Graph& g, const Tensor& H) const {
  return mlp2.forward(relu(mlp1.forward(pre_mlp(g, H))));
}

void GinLayer::collect(const std::string& prefix, ParamList& out) const {
  mlp1.collect(prefix + ".mlp1", out);
  mlp2.collect(prefix + ".mlp2", out);
  out.push_back({prefix + ".lambda", lambda, true, false});
}

Tensor readout(const Tensor& H, ReadoutKind kind) {
  if (H.rank() != 2 || H.shape()[0] == 0)
    throw std::invalid_argument("readout: need a non-empty node matrix, got " +
                                shape_to_string(H.shape()));
  switch (kind) {
    case ReadoutKind::Sum: return sum_rows(H);
    case ReadoutKind::Mean: return mean_rows(H);
    case ReadoutKind::Max: return max_rows(H);
  }
  throw std::invalid_argument("readout: bad kind");
}

Tensor gin_graph_embedding(const std::vector<Tensor>& per_round_H) {
  if (per_round_H.empty())
    throw std::invalid_argument("gin_graph_embedding: no rounds");
  std::vector<Tensor> readouts;
  readouts.reserve(per_round_H.size());
  for (const auto& H : per_round_H) readouts.push_back(sum_rows(H));
  if (readouts.size() == 1) return readouts[0];
  return concat(readouts, 0);
}

LstmCell::LstmCell(std::size_t input, std::size_t hidden_, std::mt19937_64& rng)
    : W_ih(glorot_uniform({input, 4 * hidden_}, input, hidden_, rng)),
      W_hh(glorot_uniform({hidden_, 4 * hidden_}, hidden_, hidden_, rng)),
      bias(Tensor::zeros({4 * hidden_}, true)),
      hidden(hidden_) {}

LstmCell::State LstmCell::initial_state() const {
  return {Tensor::zeros({hidden}), Tensor::zeros({hidden})};
}

LstmCell::State LstmCell::forward(const Tensor& x, const State& prev) const {
  const Tensor z = add(add(matmul(x, W_ih), matmul(prev.h, W_hh)), bias);
  std::vector<std::size_t> idx(hidden);
  auto slice = [&](std::size_t gate) {
    for (std::size_t i = 0; i < hidden; ++i) idx[i] = gate * hidden + i;
    return gather(z, idx);
  };
  const Tensor i = sigmoid(slice(0));
  const Tensor f = sigmoid(slice(1));
  const Tensor g = tanh(slice(2));
  const Tensor o = sigmoid(slice(3));
  const Tensor c = add(mul(f, prev.c), mul(i, g));
  const Tensor h = mul(o, tanh(c));
  return {h, c};
}

void LstmCell::collect(const std::string& prefix, ParamList& out) const {
  out.push_back({prefix + ".w_ih", W_ih, true, true});
  out.push_back({prefix + ".w_hh", W_hh, true, true});
  out.push_back({prefix + ".b", bias, true, false});
}

}  // namespace eegraph
