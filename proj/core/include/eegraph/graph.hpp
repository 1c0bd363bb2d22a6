#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "eegraph/tensor.hpp"

namespace eegraph {

struct Edge {
  std::size_t i, j;
  double w;
};

enum class ShiftOperatorKind {
  Adjacency,
  Laplacian,
  NormalizedAdjacency,
  NormalizedLaplacian,
};

std::string to_string(ShiftOperatorKind kind);
ShiftOperatorKind parse_shift_kind(const std::string& s);

/// Immutable weighted graph over nodes 0..n-1 with its shift-operator
/// matrices cached at construction. Matrices are dense: montages cap n at 64.
class Graph {
 public:
  Graph(std::size_t n, std::vector<Edge> edges, bool symmetric);

  std::size_t node_count() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  bool symmetric() const { return symmetric_; }
  bool has_self_loops() const { return has_self_loops_; }
  bool unweighted() const { return unweighted_; }

  /// Out-neighbors of node i (j of every edge i->j), self included for loops.
  const std::vector<std::size_t>& neighbors(std::size_t i) const {
    return adjacency_list_[i];
  }
  double degree(std::size_t i) const { return degrees_[i]; }

  const Tensor& adjacency() const { return adjacency_; }
  const Tensor& degree_matrix() const { return degree_matrix_; }
  /// Throws if the graph has self-loops (the diagonal identity D - A relies
  /// on a null adjacency diagonal); use adjacency or normalized_adjacency.
  const Tensor& laplacian() const;
  const Tensor& normalized_adjacency() const { return norm_adjacency_; }
  const Tensor& normalized_laplacian() const { return norm_laplacian_; }
  const Tensor& shift_operator(ShiftOperatorKind kind) const;

  /// Undirected edge list (i < j), one entry per symmetric pair; self-loops
  /// excluded. Requires a symmetric graph.
  std::vector<std::pair<std::size_t, std::size_t>> undirected_edges() const;

 private:
  std::size_t n_;
  std::vector<Edge> edges_;
  bool symmetric_;
  bool has_self_loops_ = false;
  bool unweighted_ = true;

  std::vector<std::vector<std::size_t>> adjacency_list_;
  std::vector<double> degrees_;
  Tensor adjacency_;
  Tensor degree_matrix_;
  Tensor laplacian_;  // undefined when self-loops are present
  Tensor norm_adjacency_;
  Tensor norm_laplacian_;
};

/// Plain-text round trip: first line "n <count> symmetric <0|1>", then one
/// "i j w" line per edge.
void save_graph(const Graph& g, const std::string& path);
Graph load_graph(const std::string& path);

}  // namespace eegraph
