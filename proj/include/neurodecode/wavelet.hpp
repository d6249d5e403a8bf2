#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "neurodecode/csp.hpp"
#include "neurodecode/types.hpp"

namespace neurodecode::wavelet {

// 8-tap Daubechies-4 orthonormal analysis pair. db4_highpass is the
// alternating-sign reversal of db4_lowpass (quadrature mirror).
extern const std::array<double, 8> db4_lowpass;
extern const std::array<double, 8> db4_highpass;

struct WaveletDecomposition {
  std::vector<std::vector<double>> details;  // details[j] = level j+1
  std::vector<double> approximation;         // deepest-level lowpass output
  std::size_t original_length = 0;

  std::size_t levels() const { return details.size(); }
};

// Per-channel feature block: 12 values from the rank's max-filter channel
// followed by 12 from its min-filter channel.
struct FeatureVector {
  std::array<double, 24> values{};
  std::int64_t trial_id = 0;
  int rank = 0;  // 1-based rank within the model's selections
  int label = 0;
};

// Cascade analysis with periodic extension. Requires the length to be
// divisible by 2^levels and at least 8 * 2^levels.
WaveletDecomposition dwt_db4(std::span<const double> signal, int levels);

// Exact inverse of dwt_db4 (transpose of the orthonormal analysis).
std::vector<double> idwt_db4(const WaveletDecomposition& decomp);

// For each of four detail levels: [RMS, population variance, energy entropy].
std::array<double, 12> subband_features(const WaveletDecomposition& decomp);

// One FeatureVector per selection rank, pairing selected_max[i] with
// selected_min[i]. The epoch is truncated to a multiple of 16 samples.
std::vector<FeatureVector> trial_features(const Trial& trial,
                                          const csp::CspModel& model);

// CSV with header trial_id,rank,label,v00..v23.
std::string features_csv(const std::vector<FeatureVector>& features);

}  // namespace neurodecode::wavelet
