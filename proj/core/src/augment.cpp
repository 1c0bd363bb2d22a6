#include "eegraph/augment.hpp"

#include <cmath>
#include <cstring>

#include "eegraph/errors.hpp"
#include "eegraph/rng.hpp"

namespace eegraph {

AugmentResult augment_awgn(const TrialSet& ts,
                           const std::vector<double>& snr_db_levels,
                           std::uint64_t seed) {
  for (double level : snr_db_levels)
    if (!std::isfinite(level))
      throw DataError("augment_awgn: non-finite SNR level");

  AugmentResult result;
  result.trials = ts;
  if (snr_db_levels.empty()) return result;

  TrialSet& out = result.trials;
  const std::size_t stride = ts.n_channels * ts.n_samples;
  out.data.reserve(stride * ts.n_trials * (1 + snr_db_levels.size()));
  out.labels.reserve(ts.n_trials * (1 + snr_db_levels.size()));

  for (std::size_t li = 0; li < snr_db_levels.size(); ++li) {
    const double snr_db = snr_db_levels[li];
    const double power_ratio = std::pow(10.0, snr_db / 10.0);
    for (std::size_t t = 0; t < ts.n_trials; ++t) {
      auto rng = make_rng(seed, "awgn", li * ts.n_trials + t);
      const double* src = ts.trial_data(t);
      std::vector<double> noisy(src, src + stride);
      for (std::size_t c = 0; c < ts.n_channels; ++c) {
        double power = 0.0;
        for (std::size_t s = 0; s < ts.n_samples; ++s) {
          const double v = src[c * ts.n_samples + s];
          power += v * v;
        }
        power /= static_cast<double>(ts.n_samples);
        if (power == 0.0) {
          ++result.zero_power_channels;
          continue;
        }
        const double sigma = std::sqrt(power / power_ratio);
        for (std::size_t s = 0; s < ts.n_samples; ++s)
          noisy[c * ts.n_samples + s] += sigma * gaussian(rng);
      }
      out.data.insert(out.data.end(), noisy.begin(), noisy.end());
      out.labels.push_back(ts.labels[t]);
    }
  }
  out.n_trials = ts.n_trials * (1 + snr_db_levels.size());
  return result;
}

}  // namespace eegraph
