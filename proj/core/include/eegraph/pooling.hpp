#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <vector>

#include "eegraph/graph.hpp"
#include "eegraph/layers.hpp"
#include "eegraph/params.hpp"
#include "eegraph/tensor.hpp"

namespace eegraph {

/// Keeps rho nodes ordered descending-lexicographically by the last conv
/// round's feature block (ties fall back to earlier rounds, then node index),
/// flattens, then slides learnable kernels of width round_width with matching
/// stride and takes each filter's max. Output length = filter count.
struct SortPool {
  std::size_t rho = 1;
  std::size_t rounds = 1;       // K conv rounds concatenated in the input
  std::size_t round_width = 1;  // F, features per round
  std::vector<Tensor> filters;  // each of length rounds * round_width

  SortPool() = default;
  SortPool(std::size_t rho, std::size_t rounds, std::size_t round_width,
           std::size_t n_filters, std::mt19937_64& rng);

  /// Sorting order for H_concat (n x rounds*round_width); exposed for tests.
  std::vector<std::size_t> sort_order(const Tensor& H_concat) const;
  /// `order_override` substitutes an externally computed ordering (the
  /// structural WL alternative).
  Tensor forward(const Tensor& H_concat,
                 const std::optional<std::vector<std::size_t>>& order_override =
                     std::nullopt) const;
  void collect(const std::string& prefix, ParamList& out) const;
};

/// Learnable edge scores (symmetric in the endpoints), softmax over edges,
/// then greedy maximal matching by descending score. Matched pairs merge into
/// supernodes with feature score * (h_i + h_j); unmatched nodes carry over
/// unchanged.
struct EdgePool {
  Tensor w;  // 2F
  Tensor b;  // scalar

  EdgePool() = default;
  EdgePool(std::size_t features, std::mt19937_64& rng);

  struct Result {
    Graph graph;
    Tensor H;
    /// Original node indices per output node, ordered by minimum member.
    std::vector<std::vector<std::size_t>> groups;
  };
  Result forward(const Graph& g, const Tensor& H) const;
  void collect(const std::string& prefix, ParamList& out) const;
};

/// Self-attention scores Z = tanh(S X W_att); keeps the ceil(rho n) highest
/// scoring nodes (ties to the lower index) and scales their rows by Z.
struct SagPool {
  Tensor W_att;  // F x 1
  double rho = 0.5;

  SagPool() = default;
  SagPool(std::size_t features, double rho, std::mt19937_64& rng);

  struct Result {
    std::vector<std::size_t> indices;  // kept nodes, descending score
    Tensor H;                          // |indices| x F, scaled rows
  };
  Result forward(const Tensor& S, const Tensor& X) const;
  void collect(const std::string& prefix, ParamList& out) const;
};

/// LSTM-driven attention readout: repeated (query, softmax attention over
/// nodes, weighted sum) steps, then relu(dense(q_star)).
struct Set2Set {
  LstmCell lstm;       // input 2F, hidden F
  Dense out_proj;      // 2F -> out
  std::size_t features = 0;
  std::size_t steps = 3;

  Set2Set() = default;
  Set2Set(std::size_t features, std::size_t out, std::mt19937_64& rng,
          std::size_t steps = 3);

  Tensor forward(const Tensor& H) const;
  void collect(const std::string& prefix, ParamList& out) const;
};

}  // namespace eegraph
