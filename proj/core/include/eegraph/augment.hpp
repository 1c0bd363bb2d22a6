#pragma once

#include <cstdint>
#include <vector>

#include "eegraph/dataset.hpp"

namespace eegraph {

struct AugmentResult {
  TrialSet trials;
  /// Channels whose signal power was zero (copied without noise).
  std::size_t zero_power_channels = 0;
};

/// Adds per-channel white Gaussian noise calibrated so that
/// signal_power / noise_power equals each requested SNR (in dB), appending
/// one noisy copy of every trial per level after the originals. The noise
/// stream is derived per (level, trial) so any processing order gives
/// identical output. An empty level list returns the input unchanged.
AugmentResult augment_awgn(const TrialSet& ts,
                           const std::vector<double>& snr_db_levels,
                           std::uint64_t seed);

}  // namespace eegraph
