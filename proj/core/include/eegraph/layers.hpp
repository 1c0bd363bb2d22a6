#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "eegraph/graph.hpp"
#include "eegraph/params.hpp"
#include "eegraph/tensor.hpp"

namespace eegraph {

Tensor glorot_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out,
                      std::mt19937_64& rng);

/// Affine map on row vectors: x W + b (x may be 1-D or a matrix of rows).
struct Dense {
  Tensor W, b;

  Dense() = default;
  Dense(std::size_t in, std::size_t out, std::mt19937_64& rng);
  Tensor forward(const Tensor& x) const;
  void collect(const std::string& prefix, ParamList& out) const;
};

enum class Nonlinearity { Identity, Relu, Tanh };
Tensor apply_nonlinearity(const Tensor& x, Nonlinearity nl);

/// K-tap polynomial filter: sum over k of sigma(S^k X W_k).
struct PolyFilterBank {
  std::vector<Tensor> taps;  // W_0..W_{K-1}, each F_in x F_out
  Nonlinearity sigma = Nonlinearity::Relu;

  PolyFilterBank() = default;
  PolyFilterBank(std::size_t K, std::size_t in, std::size_t out,
                 std::mt19937_64& rng, Nonlinearity sigma = Nonlinearity::Relu);
  Tensor forward(const Tensor& S, const Tensor& X) const;
  void collect(const std::string& prefix, ParamList& out) const;
};

/// Mean-pool aggregator variant: the neighbor embeddings pass through
/// relu(h W_pool + b), are mean-pooled, concatenated with the node's own
/// embedding, projected by W_k with relu, and row-normalized to unit L2.
struct GraphSageLayer {
  Tensor W_pool;  // F_in x F_in
  Tensor b;       // F_in
  Tensor W_k;     // 2 F_in x F_out
  std::optional<std::size_t> neighbor_sample_size;

  GraphSageLayer() = default;
  GraphSageLayer(std::size_t in, std::size_t out, std::mt19937_64& rng);
  /// `sample_rng` is consulted only when neighbor_sample_size is set.
  Tensor forward(const Graph& g, const Tensor& H,
                 std::mt19937_64* sample_rng = nullptr) const;
  void collect(const std::string& prefix, ParamList& out) const;
};

/// h_v' = MLP((1 + lambda) h_v + sum of neighbor embeddings); the MLP is one
/// hidden relu layer with a linear output. lambda starts at 0 ("GIN-0").
struct GinLayer {
  Dense mlp1, mlp2;
  Tensor lambda;  // learnable scalar

  GinLayer() = default;
  GinLayer(std::size_t in, std::size_t hidden, std::size_t out,
           std::mt19937_64& rng);
  Tensor forward(const Graph& g, const Tensor& H) const;
  /// The aggregation input (1+lambda) h_v + sum of neighbors, before the MLP.
  Tensor pre_mlp(const Graph& g, const Tensor& H) const;
  void collect(const std::string& prefix, ParamList& out) const;
};

enum class ReadoutKind { Sum, Mean, Max };
Tensor readout(const Tensor& H, ReadoutKind kind);

/// Concatenated sum-readouts over every refinement round, round 0 included.
Tensor gin_graph_embedding(const std::vector<Tensor>& per_round_H);

/// Standard 4-gate LSTM cell over 1-D vectors.
struct LstmCell {
  Tensor W_ih;  // input x 4 hidden
  Tensor W_hh;  // hidden x 4 hidden
  Tensor bias;  // 4 hidden
  std::size_t hidden = 0;

  LstmCell() = default;
  LstmCell(std::size_t input, std::size_t hidden, std::mt19937_64& rng);
  struct State {
    Tensor h, c;
  };
  State forward(const Tensor& x, const State& prev) const;
  State initial_state() const;
  void collect(const std::string& prefix, ParamList& out) const;
};

}  // namespace eegraph
