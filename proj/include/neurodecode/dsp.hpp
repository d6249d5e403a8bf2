#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "neurodecode/types.hpp"

namespace neurodecode::dsp {

/// One second-order section, a0 normalized to 1:
///   y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2]
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

struct IirFilter {
  std::vector<Biquad> sections;
  std::string description;

  /// Throws if any section has a pole with |p| >= 1 - 1e-9.
  void validate_stable() const;
};

/// Order-N analog Butterworth prototype, bandpass-transformed and discretized
/// by the bilinear transform with frequency prewarping. The -3 dB points land
/// on low_hz/high_hz; gain is normalized to 1 at the band center.
IirFilter design_butterworth_bandpass(int order, double low_hz, double high_hz,
                                      double rate_hz);

/// Second-order notch with zeros on the unit circle at +-center_hz and a
/// -3 dB bandwidth of about center_hz / q.
IirFilter design_notch(double center_hz, double q, double rate_hz);

std::complex<double> frequency_response(const IirFilter& f, double freq_hz,
                                        double rate_hz);
double magnitude_db(const IirFilter& f, double freq_hz, double rate_hz);

/// Causal single pass with zero initial conditions.
std::vector<double> filter_signal(const IirFilter& f, std::span<const double> x);
Recording filter_forward(const IirFilter& f, const Recording& rec);

/// Polyphase rational resampler: upsample by `up`, Kaiser-windowed sinc
/// low-pass, downsample by `down`. Taps are stored per phase in reversed
/// order so the inner loop is a contiguous dot product.
struct ResamplerSpec {
  unsigned up = 1, down = 1;
  std::vector<double> fir_taps;  // full kernel, odd length, symmetric
  std::vector<std::vector<double>> phase_taps_reversed;
};

/// Finds a reduced integer ratio up/down ~ target_hz/rate_hz (both <= 1000)
/// and builds the kernel. Throws if no such ratio exists.
ResamplerSpec design_resampler(double rate_hz, double target_hz);

std::vector<double> resample_signal(const ResamplerSpec& spec,
                                    std::span<const double> x);

/// Group-delay-compensated resampling of every channel. Identity ratios
/// return the input unchanged.
Recording resample(const Recording& rec, double target_hz);

}  // namespace neurodecode::dsp
