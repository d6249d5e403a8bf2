#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

#include "neurodecode/dsp.hpp"
#include "neurodecode/rng.hpp"

using namespace neurodecode;
using std::numbers::pi;

namespace {

// Oracle for frequency_response: run a unit impulse through the filter and
// evaluate the DFT of the (long, decayed) impulse response at freq_hz. This
// exercises only filter_signal + textbook math, independent of the closed-form
// per-section evaluation inside the library.
std::complex<double> impulse_response_dft(const dsp::IirFilter& f,
                                          double freq_hz, double rate_hz,
                                          std::size_t length = 16384) {
  std::vector<double> impulse(length, 0.0);
  impulse[0] = 1.0;
  const std::vector<double> h = dsp::filter_signal(f, impulse);
  const double w = 2.0 * pi * freq_hz / rate_hz;
  std::complex<double> acc = 0.0;
  for (std::size_t n = 0; n < h.size(); ++n)
    acc += h[n] * std::exp(std::complex<double>(0.0, -w * static_cast<double>(n)));
  return acc;
}

std::vector<double> sinusoid(double freq_hz, double rate_hz, std::size_t n,
                             double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = std::sin(2.0 * pi * freq_hz * static_cast<double>(i) / rate_hz + phase);
  return x;
}

double correlation(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::min(a.size(), b.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) { ma += a[i]; mb += b[i]; }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double num = 0, da = 0, db = 0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (a[i] - ma) * (b[i] - mb);
    da += (a[i] - ma) * (a[i] - ma);
    db += (b[i] - mb) * (b[i] - mb);
  }
  return num / std::sqrt(da * db);
}

}  // namespace

TEST_CASE("frequency_response matches the impulse-response DFT oracle") {
  const dsp::IirFilter f = dsp::design_butterworth_bandpass(5, 8.0, 70.0, 256.0);
  for (double freq : {2.0, 8.0, 20.0, 39.0, 70.0, 100.0, 120.0}) {
    const std::complex<double> closed = dsp::frequency_response(f, freq, 256.0);
    const std::complex<double> oracle = impulse_response_dft(f, freq, 256.0);
    CHECK(std::abs(closed - oracle) <= 1e-9 * std::max(1.0, std::abs(closed)));
  }
  const dsp::IirFilter n = dsp::design_notch(60.0, 30.0, 256.0);
  for (double freq : {55.0, 59.5, 60.5, 65.0}) {
    const std::complex<double> closed = dsp::frequency_response(n, freq, 256.0);
    const std::complex<double> oracle = impulse_response_dft(n, freq, 256.0);
    CHECK(std::abs(closed - oracle) <= 1e-9 * std::max(1.0, std::abs(closed)));
  }
}

TEST_CASE("bandpass hits its corner and center specifications") {
  const double rate = 256.0;
  const dsp::IirFilter f = dsp::design_butterworth_bandpass(5, 8.0, 70.0, rate);
  f.validate_stable();
  // Corners at -3 dB (prewarped bilinear design lands them exactly on spec,
  // tolerance covers the definition of -3 dB as 10*log10(1/2)).
  CHECK(dsp::magnitude_db(f, 8.0, rate) == doctest::Approx(-3.0103).epsilon(0.02));
  CHECK(dsp::magnitude_db(f, 70.0, rate) == doctest::Approx(-3.0103).epsilon(0.02));
  // Unity at the geometric band center.
  const double center = std::sqrt(8.0 * 70.0);
  CHECK(std::abs(dsp::magnitude_db(f, center, rate)) < 0.05);
  // Monotone decade rolloff for a 5th-order design: >= 40 dB down at the
  // stopband probes used by the acceptance gate.
  CHECK(dsp::magnitude_db(f, 1.0, rate) < -40.0);
  CHECK(dsp::magnitude_db(f, 120.0, rate) < -40.0);
}

TEST_CASE("bandpass designs are stable across random band edges") {
  Rng rng(21);
  for (int i = 0; i < 50; ++i) {
    const double rate = rng.uniform(128.0, 1024.0);
    const double low = rng.uniform(0.5, rate / 8.0);
    const double high = rng.uniform(low * 1.5, rate / 2.0 * 0.9);
    const int order = 1 + static_cast<int>(rng.index(8));
    const dsp::IirFilter f = dsp::design_butterworth_bandpass(order, low, high, rate);
    CHECK_NOTHROW(f.validate_stable());
    CHECK(f.sections.size() == static_cast<std::size_t>(order));
    // Attenuating, not amplifying, far outside the band.
    CHECK(dsp::magnitude_db(f, low * 0.05, rate) < -3.0);
  }
}

TEST_CASE("bandpass rejects invalid parameters") {
  CHECK_THROWS_AS(dsp::design_butterworth_bandpass(0, 8, 70, 256),
                  std::invalid_argument);
  CHECK_THROWS_AS(dsp::design_butterworth_bandpass(5, 70, 8, 256),
                  std::invalid_argument);
  CHECK_THROWS_AS(dsp::design_butterworth_bandpass(5, 8, 130, 256),
                  std::invalid_argument);  // edge above Nyquist
  CHECK_THROWS_AS(dsp::design_butterworth_bandpass(5, -1, 70, 256),
                  std::invalid_argument);
}

TEST_CASE("notch kills the center and spares the shoulders") {
  const double rate = 256.0;
  const dsp::IirFilter n = dsp::design_notch(60.0, 30.0, rate);
  n.validate_stable();
  CHECK(dsp::magnitude_db(n, 60.0, rate) < -50.0);
  CHECK(dsp::magnitude_db(n, 55.0, rate) > -1.0);
  CHECK(dsp::magnitude_db(n, 65.0, rate) > -1.0);
  // Approximately unity far from the notch.
  CHECK(std::abs(dsp::magnitude_db(n, 10.0, rate)) < 0.2);

  // Time-domain confirmation: a 60 Hz tone comes out >= 50 dB smaller.
  const std::vector<double> tone = sinusoid(60.0, rate, 4096);
  const std::vector<double> y = dsp::filter_signal(n, tone);
  double in_rms = 0, out_rms = 0;
  for (std::size_t i = 1024; i < tone.size(); ++i) {  // skip transient
    in_rms += tone[i] * tone[i];
    out_rms += y[i] * y[i];
  }
  CHECK(10.0 * std::log10(out_rms / in_rms) < -50.0);
}

TEST_CASE("filtering is linear and time-invariant") {
  Rng rng(22);
  const dsp::IirFilter f = dsp::design_butterworth_bandpass(3, 4.0, 40.0, 256.0);
  std::vector<double> x1(300), x2(300);
  for (auto& v : x1) v = rng.normal();
  for (auto& v : x2) v = rng.normal();

  // Linearity: F(a*x1 + b*x2) == a*F(x1) + b*F(x2)
  const double a = 2.5, b = -1.25;
  std::vector<double> mix(300);
  for (std::size_t i = 0; i < 300; ++i) mix[i] = a * x1[i] + b * x2[i];
  const auto y1 = dsp::filter_signal(f, x1);
  const auto y2 = dsp::filter_signal(f, x2);
  const auto ym = dsp::filter_signal(f, mix);
  for (std::size_t i = 0; i < 300; ++i)
    CHECK(ym[i] == doctest::Approx(a * y1[i] + b * y2[i]).epsilon(1e-10));

  // Time invariance: delaying the input delays the output (zero state makes
  // this exact for a causal filter).
  std::vector<double> delayed(300, 0.0);
  std::copy(x1.begin(), x1.end() - 7, delayed.begin() + 7);
  const auto yd = dsp::filter_signal(f, delayed);
  for (std::size_t i = 7; i < 300; ++i)
    CHECK(yd[i] == doctest::Approx(y1[i - 7]).epsilon(1e-10));
}

TEST_CASE("filter_forward preserves recording shape and metadata") {
  Rng rng(23);
  Recording rec;
  rec.rate_hz = 256.0;
  rec.channel_names = {"a", "b", "c"};
  rec.samples = Matrix(3, 400);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 400; ++c) rec.samples(r, c) = rng.normal();
  const dsp::IirFilter f = dsp::design_butterworth_bandpass(4, 8.0, 70.0, 256.0);
  const Recording out = dsp::filter_forward(f, rec);
  CHECK(out.channels() == 3);
  CHECK(out.length() == 400);
  CHECK(out.rate_hz == 256.0);
  CHECK(out.channel_names == rec.channel_names);
  // Channel 0 processed independently: equals filter_signal on that row.
  std::vector<double> row(400);
  for (std::size_t c = 0; c < 400; ++c) row[c] = rec.samples(0, c);
  const auto expect = dsp::filter_signal(f, row);
  for (std::size_t c = 0; c < 400; ++c) CHECK(out.samples(0, c) == expect[c]);
}

TEST_CASE("resampler reduces 1024 -> 250 to the 125/512 ratio") {
  const dsp::ResamplerSpec spec = dsp::design_resampler(1024.0, 250.0);
  CHECK(spec.up == 125);
  CHECK(spec.down == 512);
  CHECK(spec.fir_taps.size() % 2 == 1);  // odd, symmetric kernel
  const std::size_t mid = spec.fir_taps.size() / 2;
  for (std::size_t i = 0; i < mid; ++i)
    CHECK(spec.fir_taps[i] ==
          doctest::Approx(spec.fir_taps[spec.fir_taps.size() - 1 - i])
              .epsilon(1e-12));
}

TEST_CASE("identity resampling returns the input untouched") {
  Rng rng(24);
  Recording rec;
  rec.rate_hz = 256.0;
  rec.channel_names = {"a", "b"};
  rec.samples = Matrix(2, 128);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 128; ++c) rec.samples(r, c) = rng.normal();
  const Recording out = dsp::resample(rec, 256.0);
  CHECK(out.rate_hz == 256.0);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 128; ++c)
      CHECK(out.samples(r, c) == rec.samples(r, c));
}

TEST_CASE("resampled sinusoid tracks the continuous-time signal") {
  // A 10 Hz tone sampled at 1024 Hz, resampled to 256 Hz, must line up with
  // the directly synthesized 256 Hz tone away from the edges.
  const double freq = 10.0;
  const std::vector<double> hi = sinusoid(freq, 1024.0, 4096, 0.3);
  Recording rec;
  rec.rate_hz = 1024.0;
  rec.channel_names = {"a", "b"};
  rec.samples = Matrix(2, hi.size());
  for (std::size_t c = 0; c < hi.size(); ++c) {
    rec.samples(0, c) = hi[c];
    rec.samples(1, c) = 0.5 * hi[c];
  }
  const Recording out = dsp::resample(rec, 256.0);
  CHECK(out.rate_hz == 256.0);
  REQUIRE(out.length() >= 900);

  const std::vector<double> want = sinusoid(freq, 256.0, out.length(), 0.3);
  // Compare the central 80% (edge effects from the finite kernel).
  const std::size_t lo = out.length() / 10, hi_idx = out.length() - lo;
  std::vector<double> got(out.length());
  for (std::size_t c = 0; c < out.length(); ++c) got[c] = out.samples(0, c);
  const double r = correlation(
      std::span<const double>(got).subspan(lo, hi_idx - lo),
      std::span<const double>(want).subspan(lo, hi_idx - lo));
  CHECK(r > 0.999);
  // Amplitude preserved within 1%.
  double got_rms = 0, want_rms = 0;
  for (std::size_t c = lo; c < hi_idx; ++c) {
    got_rms += got[c] * got[c];
    want_rms += want[c] * want[c];
  }
  CHECK(std::sqrt(got_rms / want_rms) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("resampler rejects irreducible or degenerate ratios") {
  CHECK_THROWS_AS(dsp::design_resampler(256.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(dsp::design_resampler(0.0, 256.0), std::invalid_argument);
  // pi is not a ratio of small integers.
  CHECK_THROWS_AS(dsp::design_resampler(256.0, 256.0 * pi), std::invalid_argument);
}
