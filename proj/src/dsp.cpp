#include "neurodecode/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "neurodecode/kernels.hpp"

namespace neurodecode::dsp {

namespace {

using std::numbers::pi;
using cplx = std::complex<double>;

// Pole magnitudes of z^2 + a1 z + a2.
double max_pole_radius(const Biquad& s) {
  const double disc = s.a1 * s.a1 - 4.0 * s.a2;
  if (disc >= 0.0) {
    const double r = std::sqrt(disc);
    return std::max(std::abs((-s.a1 + r) / 2.0), std::abs((-s.a1 - r) / 2.0));
  }
  return std::sqrt(s.a2);
}

cplx bilinear(cplx s, double rate_hz) {
  const double k = 2.0 * rate_hz;
  return (k + s) / (k - s);
}

Biquad section_from_conjugate_pole(cplx z) {
  Biquad s;
  s.a1 = -2.0 * z.real();
  s.a2 = std::norm(z);
  return s;
}

Biquad section_from_real_poles(double z1, double z2) {
  Biquad s;
  s.a1 = -(z1 + z2);
  s.a2 = z1 * z2;
  return s;
}

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  return std::sin(pi * x) / (pi * x);
}

// Zero-order modified Bessel function of the first kind (series form).
double bessel_i0(double x) {
  const double x2 = x / 2.0;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double y = x2 / k;
    term *= y * y;
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

double kaiser(double beta, double r) {  // r in [-1, 1]
  const double t = 1.0 - r * r;
  if (t < 0.0) return 0.0;
  return bessel_i0(beta * std::sqrt(t)) / bessel_i0(beta);
}

// Best rational approximation by continued-fraction convergents.
std::pair<unsigned, unsigned> rational_ratio(double x, unsigned max_term,
                                             double rel_tol) {
  double frac = x;
  std::uint64_t p_prev = 1, q_prev = 0;  // convergent k-1
  std::uint64_t p = static_cast<std::uint64_t>(std::floor(frac)), q = 1;
  frac -= std::floor(frac);
  for (int iter = 0; iter < 64; ++iter) {
    if (p > 0 && q > 0 && std::abs(static_cast<double>(p) / static_cast<double>(q) - x) <= rel_tol * x)
      return {static_cast<unsigned>(p), static_cast<unsigned>(q)};
    if (frac <= 0.0) break;
    frac = 1.0 / frac;
    const std::uint64_t a = static_cast<std::uint64_t>(std::floor(frac));
    frac -= std::floor(frac);
    const std::uint64_t p_next = a * p + p_prev;
    const std::uint64_t q_next = a * q + q_prev;
    if (p_next > max_term || q_next > max_term) break;
    p_prev = p; q_prev = q;
    p = p_next; q = q_next;
  }
  throw std::invalid_argument(
      "resample ratio is not reducible to integers <= 1000");
}

}  // namespace

void IirFilter::validate_stable() const {
  for (const Biquad& s : sections)
    if (max_pole_radius(s) >= 1.0 - 1e-9)
      throw std::runtime_error("unstable filter section in " + description);
}

IirFilter design_butterworth_bandpass(int order, double low_hz, double high_hz,
                                      double rate_hz) {
  if (order < 1) throw std::invalid_argument("bandpass order must be >= 1");
  if (!(low_hz > 0.0) || !(low_hz < high_hz) || !(high_hz < rate_hz / 2.0))
    throw std::invalid_argument("bandpass edges must satisfy 0 < low < high < rate/2");

  // Prewarped analog edges so the bilinear transform maps the -3 dB points
  // back onto low_hz / high_hz exactly.
  const double wl = 2.0 * rate_hz * std::tan(pi * low_hz / rate_hz);
  const double wh = 2.0 * rate_hz * std::tan(pi * high_hz / rate_hz);
  const double bw = wh - wl;
  const double w0sq = wl * wh;

  // Lowpass->bandpass maps each prototype pole p to the roots of
  // s^2 - p*bw*s + w0^2. Using only prototype poles with Im >= 0 keeps the
  // digital pole set exactly closed under conjugation.
  std::vector<Biquad> sections;
  const int n_complex = order / 2;
  for (int k = 1; k <= n_complex; ++k) {
    const double theta = pi * (2.0 * k + order - 1.0) / (2.0 * order);
    const cplx p(std::cos(theta), std::sin(theta));
    const cplx pb = p * bw;
    const cplx root = std::sqrt(pb * pb - 4.0 * w0sq);
    for (const cplx s : {(pb + root) / 2.0, (pb - root) / 2.0})
      sections.push_back(section_from_conjugate_pole(bilinear(s, rate_hz)));
  }
  if (order % 2 == 1) {
    // Real prototype pole at -1.
    const double disc = bw * bw - 4.0 * w0sq;
    if (disc >= 0.0) {
      const double r = std::sqrt(disc);
      const double z1 = bilinear(cplx((-bw + r) / 2.0, 0.0), rate_hz).real();
      const double z2 = bilinear(cplx((-bw - r) / 2.0, 0.0), rate_hz).real();
      sections.push_back(section_from_real_poles(z1, z2));
    } else {
      const cplx s(-bw / 2.0, std::sqrt(-disc) / 2.0);
      sections.push_back(section_from_conjugate_pole(bilinear(s, rate_hz)));
    }
  }

  // N zeros at z=+1 and N at z=-1: each section takes one of each.
  for (Biquad& s : sections) {
    s.b0 = 1.0;
    s.b1 = 0.0;
    s.b2 = -1.0;
  }

  IirFilter f{std::move(sections), "butterworth-bandpass"};

  // Normalize to unit gain at the digital image of the analog center
  // frequency, where the prototype response is exactly 1.
  const double f_center = rate_hz / pi * std::atan(std::sqrt(w0sq) / (2.0 * rate_hz));
  const double g = std::abs(frequency_response(f, f_center, rate_hz));
  const double per_section = std::pow(1.0 / g, 1.0 / static_cast<double>(f.sections.size()));
  for (Biquad& s : f.sections) {
    s.b0 *= per_section;
    s.b1 *= per_section;
    s.b2 *= per_section;
  }
  f.validate_stable();
  return f;
}

IirFilter design_notch(double center_hz, double q, double rate_hz) {
  if (!(center_hz > 0.0) || !(center_hz < rate_hz / 2.0))
    throw std::invalid_argument("notch center must satisfy 0 < center < rate/2");
  if (!(q > 0.0)) throw std::invalid_argument("notch q must be positive");

  const double w0 = 2.0 * pi * center_hz / rate_hz;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double norm = 1.0 + alpha;
  Biquad s;
  s.b0 = 1.0 / norm;
  s.b1 = -2.0 * std::cos(w0) / norm;
  s.b2 = 1.0 / norm;
  s.a1 = -2.0 * std::cos(w0) / norm;
  s.a2 = (1.0 - alpha) / norm;
  IirFilter f{{s}, "notch"};
  f.validate_stable();
  return f;
}

std::complex<double> frequency_response(const IirFilter& f, double freq_hz,
                                        double rate_hz) {
  const double w = 2.0 * pi * freq_hz / rate_hz;
  const cplx z1 = std::polar(1.0, -w);
  const cplx z2 = z1 * z1;
  cplx h(1.0, 0.0);
  for (const Biquad& s : f.sections)
    h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  return h;
}

double magnitude_db(const IirFilter& f, double freq_hz, double rate_hz) {
  return 20.0 * std::log10(std::abs(frequency_response(f, freq_hz, rate_hz)));
}

std::vector<double> filter_signal(const IirFilter& f, std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  for (const Biquad& s : f.sections) {
    // Transposed direct form II, states zeroed per section.
    double s1 = 0.0, s2 = 0.0;
    for (double& v : y) {
      const double in = v;
      const double out = s.b0 * in + s1;
      s1 = s.b1 * in - s.a1 * out + s2;
      s2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
  return y;
}

Recording filter_forward(const IirFilter& f, const Recording& rec) {
  rec.validate();
  Recording out = rec;
  for (std::size_t ch = 0; ch < rec.channels(); ++ch) {
    const std::vector<double> y =
        filter_signal(f, std::span<const double>(rec.samples.row(ch), rec.length()));
    std::copy(y.begin(), y.end(), out.samples.row(ch));
  }
  return out;
}

ResamplerSpec design_resampler(double rate_hz, double target_hz) {
  if (!(rate_hz > 0.0) || !(target_hz > 0.0))
    throw std::invalid_argument("rates must be positive");
  auto [up, down] = rational_ratio(target_hz / rate_hz, 1000, 1e-9);
  const unsigned g = std::gcd(up, down);
  up /= g;
  down /= g;

  ResamplerSpec spec;
  spec.up = up;
  spec.down = down;
  if (up == 1 && down == 1) return spec;  // identity, no kernel needed

  // Kaiser-windowed sinc, beta 8.6 (~90 dB stopband), cutoff at the smaller
  // of the two Nyquist frequencies in the upsampled domain. The gain factor
  // `up` compensates for the zeros inserted by upsampling.
  const double beta = 8.6;
  const std::size_t half = 10 * std::max(up, down);
  const std::size_t ntaps = 2 * half + 1;
  const double fc = std::min(1.0 / (2.0 * up), 1.0 / (2.0 * down));
  spec.fir_taps.resize(ntaps);
  for (std::size_t i = 0; i < ntaps; ++i) {
    const double x = static_cast<double>(i) - static_cast<double>(half);
    spec.fir_taps[i] = up * 2.0 * fc * sinc(2.0 * fc * x) *
                       kaiser(beta, x / static_cast<double>(half));
  }

  spec.phase_taps_reversed.resize(up);
  for (unsigned p = 0; p < up; ++p) {
    std::vector<double>& taps = spec.phase_taps_reversed[p];
    for (std::size_t t = p; t < ntaps; t += up) taps.push_back(spec.fir_taps[t]);
    std::reverse(taps.begin(), taps.end());
  }
  return spec;
}

std::vector<double> resample_signal(const ResamplerSpec& spec,
                                    std::span<const double> x) {
  const std::size_t len = x.size();
  if (spec.up == 1 && spec.down == 1) return {x.begin(), x.end()};
  const std::size_t out_len =
      (len * spec.up + spec.down - 1) / spec.down;  // ceil(len*up/down)
  const std::size_t half = (spec.fir_taps.size() - 1) / 2;
  std::vector<double> y(out_len, 0.0);
  for (std::size_t i = 0; i < out_len; ++i) {
    // Output i sits at upsampled index i*down; the +half centers the
    // symmetric kernel, cancelling its group delay.
    const std::size_t a = i * spec.down + half;
    const unsigned phase = static_cast<unsigned>(a % spec.up);
    const std::ptrdiff_t a_div = static_cast<std::ptrdiff_t>(a / spec.up);
    const std::vector<double>& taps = spec.phase_taps_reversed[phase];
    const std::ptrdiff_t nt = static_cast<std::ptrdiff_t>(taps.size());
    const std::ptrdiff_t start = a_div - nt + 1;
    const std::ptrdiff_t s0 = std::max<std::ptrdiff_t>(start, 0);
    const std::ptrdiff_t s1 = std::min<std::ptrdiff_t>(start + nt, static_cast<std::ptrdiff_t>(len));
    if (s1 > s0)
      y[i] = kernels::dot(taps.data() + (s0 - start), x.data() + s0,
                          static_cast<std::size_t>(s1 - s0));
  }
  return y;
}

Recording resample(const Recording& rec, double target_hz) {
  rec.validate();
  const ResamplerSpec spec = design_resampler(rec.rate_hz, target_hz);
  if (spec.up == 1 && spec.down == 1) return rec;
  Recording out;
  out.rate_hz = target_hz;
  out.channel_names = rec.channel_names;
  const std::size_t out_len = (rec.length() * spec.up + spec.down - 1) / spec.down;
  out.samples = Matrix(rec.channels(), out_len);
  for (std::size_t ch = 0; ch < rec.channels(); ++ch) {
    const std::vector<double> y = resample_signal(
        spec, std::span<const double>(rec.samples.row(ch), rec.length()));
    std::copy(y.begin(), y.end(), out.samples.row(ch));
  }
  return out;
}

}  // namespace neurodecode::dsp
