#include "eegraph/wl.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace eegraph {

namespace {

void require_unweighted(const Graph& g, const char* op) {
  if (!g.unweighted())
    throw std::invalid_argument(std::string(op) +
                                ": requires an unweighted graph");
}

std::string signature(int own, std::vector<int> neighbor_colors) {
  std::sort(neighbor_colors.begin(), neighbor_colors.end());
  std::ostringstream os;
  os << own << "|";
  for (std::size_t i = 0; i < neighbor_colors.size(); ++i) {
    if (i) os << ",";
    os << neighbor_colors[i];
  }
  return os.str();
}

std::vector<int> refine_once(
    const std::vector<std::vector<std::size_t>>& nbrs,
    const std::vector<int>& colors) {
  const std::size_t n = colors.size();
  std::vector<std::string> sigs(n);
  for (std::size_t v = 0; v < n; ++v) {
    std::vector<int> nc;
    nc.reserve(nbrs[v].size());
    for (std::size_t u : nbrs[v]) nc.push_back(colors[u]);
    sigs[v] = signature(colors[v], std::move(nc));
  }
  // fresh integers in lexicographic signature order, restarting at 0
  std::map<std::string, int> compress;
  for (const auto& s : sigs) compress.emplace(s, 0);
  int next = 0;
  for (auto& [sig, color] : compress) color = next++;
  std::vector<int> out(n);
  for (std::size_t v = 0; v < n; ++v) out[v] = compress[sigs[v]];
  return out;
}

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  std::map<int, int> a2b, b2a;
  for (std::size_t v = 0; v < a.size(); ++v) {
    auto [ita, inserted_a] = a2b.emplace(a[v], b[v]);
    if (!inserted_a && ita->second != b[v]) return false;
    auto [itb, inserted_b] = b2a.emplace(b[v], a[v]);
    if (!inserted_b && itb->second != a[v]) return false;
  }
  return true;
}

std::vector<std::vector<std::size_t>> neighbor_lists(const Graph& g) {
  std::vector<std::vector<std::size_t>> nbrs(g.node_count());
  for (std::size_t v = 0; v < g.node_count(); ++v) nbrs[v] = g.neighbors(v);
  return nbrs;
}

}  // namespace

WlColoring wl_refine(const Graph& g, std::size_t max_rounds) {
  require_unweighted(g, "wl_refine");
  const std::size_t n = g.node_count();
  if (max_rounds == 0) max_rounds = std::max<std::size_t>(n, 1);
  const auto nbrs = neighbor_lists(g);

  WlColoring result;
  result.rounds.push_back(std::vector<int>(n, 0));
  for (std::size_t r = 0; r < max_rounds; ++r) {
    auto next = refine_once(nbrs, result.rounds.back());
    const bool stable = same_partition(next, result.rounds.back());
    result.rounds.push_back(std::move(next));
    if (stable) {
      result.converged = true;
      break;
    }
  }
  return result;
}

bool wl_equivalent(const Graph& g1, const Graph& g2, std::size_t rounds) {
  require_unweighted(g1, "wl_equivalent");
  require_unweighted(g2, "wl_equivalent");
  const std::size_t n = g1.node_count();
  if (n != g2.node_count()) return false;
  if (n == 0) return true;
  if (rounds == 0) rounds = 2 * n;

  // joint refinement on the disjoint union keeps the color integers of the
  // two halves comparable
  auto nbrs = neighbor_lists(g1);
  const auto nbrs2 = neighbor_lists(g2);
  nbrs.resize(2 * n);
  for (std::size_t v = 0; v < n; ++v) {
    nbrs[n + v].reserve(nbrs2[v].size());
    for (std::size_t u : nbrs2[v]) nbrs[n + v].push_back(n + u);
  }

  std::vector<int> colors(2 * n, 0);
  for (std::size_t r = 0; r < rounds; ++r) {
    auto next = refine_once(nbrs, colors);
    std::vector<int> m1(next.begin(), next.begin() + static_cast<long>(n));
    std::vector<int> m2(next.begin() + static_cast<long>(n), next.end());
    std::sort(m1.begin(), m1.end());
    std::sort(m2.begin(), m2.end());
    if (m1 != m2) return false;
    const bool stable = same_partition(next, colors);
    colors = std::move(next);
    if (stable) break;
  }
  return true;
}

}  // namespace eegraph
