#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "eegraph/tensor.hpp"

namespace eegraph {

/// Labeled EEG trials, (trial x channel x sample) row-major. Values are held
/// as doubles but every payload round-trips through f32, so loads and saves
/// are bit-exact.
struct TrialSet {
  std::string name;
  std::size_t n_trials = 0;
  std::size_t n_channels = 0;
  std::size_t n_samples = 0;
  std::size_t n_classes = 0;
  double sample_rate_hz = 0.0;
  std::string montage_ref;
  std::vector<double> data;  // n_trials * n_channels * n_samples
  std::vector<int> labels;

  /// One trial as a (channels x samples) constant tensor.
  Tensor trial(std::size_t t) const;
  double* trial_data(std::size_t t) {
    return data.data() + t * n_channels * n_samples;
  }
  const double* trial_data(std::size_t t) const {
    return data.data() + t * n_channels * n_samples;
  }
};

/// Manifest JSON {name, n_trials, n_channels, n_samples, n_classes,
/// sample_rate_hz, montage, payload, labels}; payload is f32 little-endian
/// row-major and labels are u16 little-endian, both relative to the manifest.
TrialSet load_trialset(const std::string& manifest_path);
void save_trialset(const TrialSet& ts, const std::string& manifest_path);

/// Train/validation sizes for an 80/20 split: (floor(0.8 n), rest).
std::pair<std::size_t, std::size_t> split_sizes(std::size_t n_trials);

/// Seeded shuffle, first 80% train. Requires at least 5 trials.
std::pair<TrialSet, TrialSet> split(const TrialSet& ts, std::uint64_t seed);

/// Subset in the given trial order.
TrialSet subset(const TrialSet& ts, const std::vector<std::size_t>& indices);

}  // namespace eegraph
