#pragma once

#include <cstdint>
#include <string>

#include "eegraph/dataset.hpp"

namespace eegraph {

/// Two-class hemisphere dataset on the 16-channel montage: unit-variance
/// background noise everywhere, and class 1 adds a fixed unit-power waveform
/// to the left-hemisphere channels, so marked channels sit at 0 dB SNR.
/// Labels alternate, values are rounded through f32 to match disk storage.
TrialSet make_hemisphere_fixture(std::uint64_t seed,
                                 std::size_t n_trials = 2000,
                                 std::size_t n_samples = 64);

/// Linearly separable smoke set: the class flips the sign of a fixed
/// checkerboard pattern under light noise.
TrialSet make_smoke_fixture(std::uint64_t seed, std::size_t n_trials = 64);

/// Writes montages/{errp56,rsvp16}.txt, hemi/manifest.json and
/// smoke/manifest.json (with payloads) under out_dir.
void write_fixture_tree(const std::string& out_dir, std::uint64_t seed);

}  // namespace eegraph
