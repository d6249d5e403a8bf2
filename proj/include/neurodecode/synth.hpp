#pragma once

#include <cstdint>

#include "neurodecode/types.hpp"

namespace neurodecode::synth {

// Two-class generator with a variance-contrast structure: group A channels
// [0, p) carry variance r for class 0 and 1/r for class 1; group B channels
// [p, min(2p, channels)) carry the mirror image. Remaining channels are
// class-neutral. Sensor noise controls how much the classes overlap.
struct SynthSpec {
  std::size_t channels = 16;
  std::size_t trials_per_class = 100;
  std::size_t epoch_samples = 512;  // divisible by 16
  double rate_hz = 256.0;
  std::size_t informative_pairs = 9;  // p
  double variance_ratio = 4.0;        // r > 1
  double band_low_hz = 8.0;
  double band_high_hz = 30.0;
  double noise_sigma = 7.5;
  std::uint64_t seed = 0;

  // Channels that differ between classes: [0, min(2p, channels)).
  std::size_t informative_channels() const;
  void validate() const;
};

TrialSet generate(const SynthSpec& spec);

}  // namespace neurodecode::synth
