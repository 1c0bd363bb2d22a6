#include "eegraph/compressor.hpp"

#include <stdexcept>

namespace eegraph {

std::vector<std::size_t> compressor_lengths(std::size_t samples,
                                            std::size_t target) {
  std::vector<std::size_t> lengths{samples};
  while (lengths.back() > target)
    lengths.push_back((lengths.back() - 3) / 2 + 1);
  return lengths;
}

Compressor::Compressor(std::size_t channels, std::size_t samples,
                       std::mt19937_64& rng)
    : channels_(channels), samples_(samples) {
  if (samples < 3)
    throw std::invalid_argument("compressor: need at least 3 samples, got " +
                                std::to_string(samples));
  if (channels < 1) throw std::invalid_argument("compressor: no channels");

  const auto lengths = compressor_lengths(samples, kTargetFeatures);
  for (std::size_t s = 0; s + 1 < lengths.size(); ++s) {
    Stage stage;
    stage.kernel = glorot_uniform({channels, 3}, 3, 1, rng);
    stage.bn = std::make_unique<BatchNorm>(channels);
    stages_.push_back(std::move(stage));
  }
  projection_ = Dense(lengths.back(), kTargetFeatures, rng);
}

Tensor Compressor::forward(const Tensor& X, bool training) {
  if (X.rank() != 2 || X.shape()[0] != channels_ || X.shape()[1] != samples_)
    throw std::invalid_argument("compressor: input " +
                                shape_to_string(X.shape()) + " does not match " +
                                std::to_string(channels_) + "x" +
                                std::to_string(samples_));
  Tensor h = X;
  for (auto& stage : stages_) {
    h = conv1d(h, stage.kernel, 2);
    // batch norm over the time axis: transpose to (time x channels)
    h = relu(transpose(stage.bn->forward(transpose(h), training)));
  }
  return projection_.forward(h);
}

void Compressor::collect(const std::string& prefix, ParamList& out) const {
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    const std::string sp = prefix + ".stage" + std::to_string(s);
    out.push_back({sp + ".kernel", stages_[s].kernel, true, true});
    out.push_back({sp + ".bn.gamma", stages_[s].bn->gamma, true, false});
    out.push_back({sp + ".bn.beta", stages_[s].bn->beta, true, false});
    out.push_back({sp + ".bn.running_mean", stages_[s].bn->running_mean, false,
                   false});
    out.push_back({sp + ".bn.running_var", stages_[s].bn->running_var, false,
                   false});
  }
  projection_.collect(prefix + ".projection", out);
}

}  // namespace eegraph
