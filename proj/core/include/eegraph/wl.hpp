#pragma once

#include <cstddef>
#include <vector>

#include "eegraph/graph.hpp"

namespace eegraph {

/// Color refinement history: rounds[0] is the uniform initial coloring and
/// each later round compresses (own color, sorted neighbor colors) signatures
/// to fresh integers assigned in lexicographic signature order.
struct WlColoring {
  std::vector<std::vector<int>> rounds;
  bool converged = false;

  const std::vector<int>& final_colors() const { return rounds.back(); }
};

/// Runs refinement until the color partition stabilizes or max_rounds new
/// rounds have been produced. max_rounds 0 means the node count. Requires an
/// unweighted graph.
WlColoring wl_refine(const Graph& g, std::size_t max_rounds = 0);

/// Necessary isomorphism condition: true iff the sorted color multisets of
/// the two graphs match at every round of a joint refinement on their
/// disjoint union.
bool wl_equivalent(const Graph& g1, const Graph& g2, std::size_t rounds = 0);

}  // namespace eegraph
