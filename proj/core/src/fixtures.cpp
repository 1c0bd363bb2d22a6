#include "eegraph/fixtures.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <vector>

#include "eegraph/montage.hpp"
#include "eegraph/rng.hpp"

namespace eegraph {

namespace fs = std::filesystem;

namespace {

float f32(double v) { return static_cast<float>(v); }

std::vector<bool> left_hemisphere_mask(const Montage& m) {
  std::vector<bool> mask(m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    mask[i] = m.at(i).x < -0.05;
  return mask;
}

}  // namespace

TrialSet make_hemisphere_fixture(std::uint64_t seed, std::size_t n_trials,
                                 std::size_t n_samples) {
  Montage montage = reference_montage_rsvp16();
  std::vector<bool> left = left_hemisphere_mask(montage);

  // Whole cycles across the window keep the discrete power exactly 1.
  std::vector<double> waveform(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k)
    waveform[k] = std::numbers::sqrt2 *
                  std::sin(2.0 * std::numbers::pi * 5.0 *
                           static_cast<double>(k) / static_cast<double>(n_samples));

  TrialSet ts;
  ts.name = "hemi16";
  ts.n_trials = n_trials;
  ts.n_channels = montage.size();
  ts.n_samples = n_samples;
  ts.n_classes = 2;
  ts.sample_rate_hz = 250.0;
  ts.montage_ref = "rsvp16";
  ts.data.resize(n_trials * ts.n_channels * n_samples);
  ts.labels.resize(n_trials);

  for (std::size_t t = 0; t < n_trials; ++t) {
    auto rng = make_rng(seed, "fixture", t);
    int label = static_cast<int>(t % 2);
    ts.labels[t] = label;
    double* trial = ts.trial_data(t);
    for (std::size_t c = 0; c < ts.n_channels; ++c) {
      bool inject = label == 1 && left[c];
      for (std::size_t k = 0; k < n_samples; ++k) {
        double v = gaussian(rng);
        if (inject) v += waveform[k];
        trial[c * n_samples + k] = f32(v);
      }
    }
  }
  return ts;
}

TrialSet make_smoke_fixture(std::uint64_t seed, std::size_t n_trials) {
  Montage montage = reference_montage_rsvp16();
  const std::size_t n_samples = 8;

  TrialSet ts;
  ts.name = "smoke16";
  ts.n_trials = n_trials;
  ts.n_channels = montage.size();
  ts.n_samples = n_samples;
  ts.n_classes = 2;
  ts.sample_rate_hz = 250.0;
  ts.montage_ref = "rsvp16";
  ts.data.resize(n_trials * ts.n_channels * n_samples);
  ts.labels.resize(n_trials);

  for (std::size_t t = 0; t < n_trials; ++t) {
    auto rng = make_rng(seed, "fixture", t);
    int label = static_cast<int>(t % 2);
    ts.labels[t] = label;
    double sign = label == 1 ? 1.0 : -1.0;
    double* trial = ts.trial_data(t);
    for (std::size_t c = 0; c < ts.n_channels; ++c)
      for (std::size_t k = 0; k < n_samples; ++k) {
        double pattern = ((c + k) % 2 == 0) ? 0.5 : -0.5;
        trial[c * n_samples + k] = f32(sign * pattern + 0.05 * gaussian(rng));
      }
  }
  return ts;
}

void write_fixture_tree(const std::string& out_dir, std::uint64_t seed) {
  fs::path base(out_dir);
  fs::create_directories(base / "montages");
  fs::create_directories(base / "hemi");
  fs::create_directories(base / "smoke");

  save_montage(reference_montage_errp56(), (base / "montages" / "errp56.txt").string());
  save_montage(reference_montage_rsvp16(), (base / "montages" / "rsvp16.txt").string());

  save_trialset(make_hemisphere_fixture(seed), (base / "hemi" / "manifest.json").string());
  save_trialset(make_smoke_fixture(seed), (base / "smoke" / "manifest.json").string());
}

}  // namespace eegraph
