#include "eegraph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "eegraph/errors.hpp"

namespace eegraph {

std::string to_string(ShiftOperatorKind kind) {
  switch (kind) {
    case ShiftOperatorKind::Adjacency: return "adjacency";
    case ShiftOperatorKind::Laplacian: return "laplacian";
    case ShiftOperatorKind::NormalizedAdjacency: return "normalized-adjacency";
    case ShiftOperatorKind::NormalizedLaplacian: return "normalized-laplacian";
  }
  return "?";
}

ShiftOperatorKind parse_shift_kind(const std::string& s) {
  if (s == "adjacency") return ShiftOperatorKind::Adjacency;
  if (s == "laplacian") return ShiftOperatorKind::Laplacian;
  if (s == "normalized-adjacency") return ShiftOperatorKind::NormalizedAdjacency;
  if (s == "normalized-laplacian") return ShiftOperatorKind::NormalizedLaplacian;
  throw std::invalid_argument(
      "unknown shift operator '" + s +
      "' (expected adjacency, laplacian, normalized-adjacency, "
      "normalized-laplacian)");
}

Graph::Graph(std::size_t n, std::vector<Edge> edges, bool symmetric)
    : n_(n), edges_(std::move(edges)), symmetric_(symmetric) {
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& e : edges_) {
    if (e.i >= n_ || e.j >= n_)
      throw std::invalid_argument("Graph: edge (" + std::to_string(e.i) + "," +
                                  std::to_string(e.j) + ") out of range for " +
                                  std::to_string(n_) + " nodes");
    if (!seen.insert({e.i, e.j}).second)
      throw std::invalid_argument("Graph: duplicate edge (" +
                                  std::to_string(e.i) + "," +
                                  std::to_string(e.j) + ")");
    if (e.i == e.j) has_self_loops_ = true;
    if (e.w != 1.0) unweighted_ = false;
  }
  if (symmetric_) {
    for (const auto& e : edges_) {
      if (e.i == e.j) continue;
      bool found = false;
      for (const auto& r : edges_)
        if (r.i == e.j && r.j == e.i && r.w == e.w) {
          found = true;
          break;
        }
      if (!found)
        throw std::invalid_argument("Graph: marked symmetric but edge (" +
                                    std::to_string(e.j) + "," +
                                    std::to_string(e.i) + ") is missing");
    }
  }

  adjacency_list_.assign(n_, {});
  adjacency_ = Tensor::zeros({n_, n_});
  for (const auto& e : edges_) {
    adjacency_.data()[e.i * n_ + e.j] = e.w;
    adjacency_list_[e.i].push_back(e.j);
  }
  for (auto& nbrs : adjacency_list_) std::sort(nbrs.begin(), nbrs.end());

  degrees_.assign(n_, 0.0);
  degree_matrix_ = Tensor::zeros({n_, n_});
  for (std::size_t i = 0; i < n_; ++i) {
    double d = 0.0;
    for (std::size_t j = 0; j < n_; ++j) d += adjacency_.data()[i * n_ + j];
    degrees_[i] = d;
    degree_matrix_.data()[i * n_ + i] = d;
  }

  if (!has_self_loops_) {
    laplacian_ = Tensor::zeros({n_, n_});
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        laplacian_.data()[i * n_ + j] =
            degree_matrix_.data()[i * n_ + j] - adjacency_.data()[i * n_ + j];
  }

  // D^{-1/2} A D^{-1/2} with 0^{-1/2} -> 0 so isolated nodes zero out
  std::vector<double> dinv(n_);
  for (std::size_t i = 0; i < n_; ++i)
    dinv[i] = degrees_[i] > 0.0 ? 1.0 / std::sqrt(degrees_[i]) : 0.0;
  norm_adjacency_ = Tensor::zeros({n_, n_});
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j)
      norm_adjacency_.data()[i * n_ + j] =
          dinv[i] * adjacency_.data()[i * n_ + j] * dinv[j];

  norm_laplacian_ = Tensor::zeros({n_, n_});
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j)
      norm_laplacian_.data()[i * n_ + j] =
          (i == j ? 1.0 : 0.0) - norm_adjacency_.data()[i * n_ + j];
}

const Tensor& Graph::laplacian() const {
  if (has_self_loops_)
    throw std::invalid_argument(
        "laplacian: graph has self-loops, which break the D - A diagonal "
        "identity; use the Adjacency or NormalizedAdjacency operator instead");
  return laplacian_;
}

const Tensor& Graph::shift_operator(ShiftOperatorKind kind) const {
  switch (kind) {
    case ShiftOperatorKind::Adjacency: return adjacency();
    case ShiftOperatorKind::Laplacian: return laplacian();
    case ShiftOperatorKind::NormalizedAdjacency: return normalized_adjacency();
    case ShiftOperatorKind::NormalizedLaplacian: return normalized_laplacian();
  }
  throw std::invalid_argument("shift_operator: bad kind");
}

std::vector<std::pair<std::size_t, std::size_t>> Graph::undirected_edges()
    const {
  if (!symmetric_)
    throw std::invalid_argument(
        "undirected_edges: graph is not marked symmetric");
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& e : edges_)
    if (e.i < e.j) out.emplace_back(e.i, e.j);
  std::sort(out.begin(), out.end());
  return out;
}

void save_graph(const Graph& g, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot open graph file for writing: " + path);
  os << "n " << g.node_count() << " symmetric " << (g.symmetric() ? 1 : 0)
     << "\n";
  for (const auto& e : g.edges()) {
    std::ostringstream line;
    line.precision(17);
    line << e.i << " " << e.j << " " << e.w;
    os << line.str() << "\n";
  }
  if (!os) throw DataError("short write to graph file: " + path);
}

Graph load_graph(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open graph file: " + path);
  std::string tag_n, tag_sym;
  std::size_t n = 0;
  int sym = 0;
  if (!(is >> tag_n >> n >> tag_sym >> sym) || tag_n != "n" ||
      tag_sym != "symmetric" || (sym != 0 && sym != 1))
    throw DataError("malformed graph header in " + path);
  std::vector<Edge> edges;
  std::size_t i, j;
  double w;
  while (is >> i >> j >> w) edges.push_back({i, j, w});
  if (!is.eof()) throw DataError("malformed edge line in " + path);
  return Graph(n, std::move(edges), sym == 1);
}

}  // namespace eegraph
