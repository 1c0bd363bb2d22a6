#pragma once

#include <string>
#include <vector>

#include "eegraph/tensor.hpp"

namespace eegraph {

/// One named model tensor. `learnable` gates optimizer updates (false for
/// batch-norm running statistics); `regularize` gates L1/L2 penalties
/// (false for biases, batch-norm affine pairs, and GIN lambda).
struct NamedParam {
  std::string name;
  Tensor tensor;
  bool learnable = true;
  bool regularize = true;
};

using ParamList = std::vector<NamedParam>;

inline std::size_t count_learnable(const ParamList& params) {
  std::size_t total = 0;
  for (const auto& p : params)
    if (p.learnable) total += p.tensor.size();
  return total;
}

}  // namespace eegraph
