#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "eegraph/graph.hpp"
#include "eegraph/tensor.hpp"

namespace eegraph {

struct Electrode {
  std::string name;
  double x, y, z;  // unit sphere, +x right, +y nasion, +z vertex
};

/// Ordered electrode layout on the unit-sphere head model. Names must be
/// unique and every coordinate must have norm 1 within 1e-6.
class Montage {
 public:
  explicit Montage(std::vector<Electrode> electrodes);

  std::size_t size() const { return electrodes_.size(); }
  const std::vector<Electrode>& electrodes() const { return electrodes_; }
  const Electrode& at(std::size_t i) const { return electrodes_[i]; }

 private:
  std::vector<Electrode> electrodes_;
};

/// Text format: one "name x y z" line per electrode, '#' starts a comment.
Montage load_montage(const std::string& path);
void save_montage(const Montage& m, const std::string& path);

/// Idealized 10-5 layouts approximating the two recording setups: 56
/// channels (error-potential montage) and 16 channels (RSVP montage).
Montage reference_montage_errp56();
Montage reference_montage_rsvp16();
/// Lookup by the manifest's montage field: "errp56", "rsvp16", or a file path.
Montage resolve_montage(const std::string& name_or_path);

struct EdgePolicy {
  enum class Kind { Complete, Knng, DistanceThreshold };
  Kind kind = Kind::Complete;
  std::size_t k = 1;      // Knng
  double d = 0.0;         // DistanceThreshold, strict <
  bool self_loops = false;

  static EdgePolicy complete(bool self_loops = false);
  static EdgePolicy knng(std::size_t k, bool self_loops = false);
  static EdgePolicy distance_threshold(double d, bool self_loops = false);
};

/// Accepts "complete", "knng:k=K", "dist:d=D", each with an optional
/// ",self-loops" suffix.
EdgePolicy parse_edge_policy(const std::string& text);
std::string to_string(const EdgePolicy& p);

/// Symmetric, zero-diagonal Euclidean chord distances.
Tensor pairwise_distances(const Montage& m);

/// All edges carry weight 1. KNNG takes each node's k nearest neighbors
/// (ties to the lower electrode index) and symmetrizes by union; the
/// threshold policy connects pairs strictly closer than d.
Graph build_graph(const Montage& m, const EdgePolicy& p);

}  // namespace eegraph
