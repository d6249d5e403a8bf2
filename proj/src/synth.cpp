#include "neurodecode/synth.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "neurodecode/dsp.hpp"
#include "neurodecode/kernels.hpp"
#include "neurodecode/rng.hpp"

namespace neurodecode::synth {

namespace {

constexpr std::size_t kWarmup = 256;  // discards the filter startup transient

std::string channel_name(std::size_t ch) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "ch%02zu", ch);
  return buf;
}

}  // namespace

std::size_t SynthSpec::informative_channels() const {
  return std::min(2 * informative_pairs, channels);
}

void SynthSpec::validate() const {
  if (channels < 2) throw std::invalid_argument("synth: need at least 2 channels");
  if (trials_per_class < 1) throw std::invalid_argument("synth: need at least 1 trial per class");
  if (epoch_samples < 16 || epoch_samples % 16 != 0)
    throw std::invalid_argument("synth: epoch_samples must be a positive multiple of 16");
  if (!(rate_hz > 0.0)) throw std::invalid_argument("synth: rate must be positive");
  if (informative_pairs < 1)
    throw std::invalid_argument("synth: informative_pairs must be >= 1");
  if (informative_pairs >= channels)
    throw std::invalid_argument("synth: informative_pairs must be < channels");
  if (!(variance_ratio > 1.0))
    throw std::invalid_argument("synth: variance_ratio must be > 1");
  if (!(band_low_hz > 0.0) || !(band_low_hz < band_high_hz) ||
      !(band_high_hz < rate_hz / 2.0))
    throw std::invalid_argument("synth: band must satisfy 0 < low < high < rate/2");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("synth: noise_sigma must be >= 0");
}

TrialSet generate(const SynthSpec& spec) {
  spec.validate();

  const dsp::IirFilter band =
      dsp::design_butterworth_bandpass(4, spec.band_low_hz, spec.band_high_hz,
                                       spec.rate_hz);
  // Impulse-response energy: white noise through the filter has this factor
  // squared as its output variance, so dividing restores unit variance.
  std::vector<double> impulse(8192, 0.0);
  impulse[0] = 1.0;
  const std::vector<double> ir = dsp::filter_signal(band, impulse);
  const double gain = std::sqrt(kernels::sumsq(ir.data(), ir.size()));

  const double sqrt_r = std::sqrt(spec.variance_ratio);
  const std::size_t p = spec.informative_pairs;
  const std::size_t info = spec.informative_channels();
  const std::size_t total = 2 * spec.trials_per_class;
  const std::uint64_t trial_base = derive_seed(spec.seed, "trial");

  TrialSet set;
  set.rate_hz = spec.rate_hz;
  set.epoch_samples = spec.epoch_samples;
  set.class_names = {{0, "class0"}, {1, "class1"}};
  for (std::size_t ch = 0; ch < spec.channels; ++ch)
    set.channel_names.push_back(channel_name(ch));
  set.trials.resize(total);

  for (std::size_t index = 0; index < total; ++index) {
    const int label = index < spec.trials_per_class ? 0 : 1;
    Trial& trial = set.trials[index];
    trial.trial_id = static_cast<std::int64_t>(index);
    trial.label = label;
    trial.epoch.rate_hz = spec.rate_hz;
    trial.epoch.channel_names = set.channel_names;
    trial.epoch.samples = Matrix(spec.channels, spec.epoch_samples);

    Rng rng(derive_seed(trial_base, static_cast<std::uint64_t>(index)));
    std::vector<double> white(kWarmup + spec.epoch_samples);
    for (std::size_t ch = 0; ch < spec.channels; ++ch) {
      double scale = 1.0;
      if (ch < p)
        scale = label == 0 ? sqrt_r : 1.0 / sqrt_r;
      else if (ch < info)
        scale = label == 0 ? 1.0 / sqrt_r : sqrt_r;
      scale /= gain;

      for (double& v : white) v = rng.normal();
      const std::vector<double> shaped = dsp::filter_signal(band, white);
      double* out = trial.epoch.samples.row(ch);
      for (std::size_t s = 0; s < spec.epoch_samples; ++s)
        out[s] = shaped[kWarmup + s] * scale + spec.noise_sigma * rng.normal();
    }
  }
  set.validate();
  return set;
}

}  // namespace neurodecode::synth
