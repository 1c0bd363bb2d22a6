#pragma once

#include <cstddef>
#include <memory>
#include <random>
#include <vector>

#include "eegraph/layers.hpp"
#include "eegraph/params.hpp"
#include "eegraph/tensor.hpp"

namespace eegraph {

/// Computes the time-axis lengths produced by repeated kernel-3 stride-2
/// convolutions until the length is <= target; the first entry is the input
/// length. floor((L - 3) / 2) + 1 per stage.
std::vector<std::size_t> compressor_lengths(std::size_t samples,
                                            std::size_t target = 32);

/// Temporal front-end: per-channel (conv k=3 s=2 -> batch norm -> relu)
/// stages until the time axis is <= 32, then a learnable linear projection
/// to exactly 32 features per channel. Batch norm statistics run over the
/// time axis, one feature per channel.
class Compressor {
 public:
  static constexpr std::size_t kTargetFeatures = 32;

  Compressor(std::size_t channels, std::size_t samples, std::mt19937_64& rng);

  Tensor forward(const Tensor& X, bool training);

  std::size_t channels() const { return channels_; }
  std::size_t input_samples() const { return samples_; }
  std::size_t stage_count() const { return stages_.size(); }
  void collect(const std::string& prefix, ParamList& out) const;

 private:
  struct Stage {
    Tensor kernel;  // channels x 3
    std::unique_ptr<BatchNorm> bn;
  };
  std::size_t channels_, samples_;
  std::vector<Stage> stages_;
  Dense projection_;  // last length -> 32, applied per channel row
};

}  // namespace eegraph
