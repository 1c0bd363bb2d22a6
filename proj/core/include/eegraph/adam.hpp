#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "eegraph/params.hpp"
#include "eegraph/tensor.hpp"

namespace eegraph {

/// Adam with bias correction. The learning rate is passed per step so the
/// halving schedule can live in the trainer.
class Adam {
 public:
  explicit Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  /// Applies one update to every learnable parameter. Throws if a learnable
  /// parameter has no populated gradient.
  void step(const ParamList& params, double lr);

  std::uint64_t step_count() const { return step_count_; }

 private:
  struct Moments {
    std::vector<double> m, v;
  };
  double beta1_, beta2_, eps_;
  std::uint64_t step_count_ = 0;
  std::unordered_map<const detail::Node*, Moments> state_;
};

}  // namespace eegraph
