#include "neurodecode/wavelet.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "neurodecode/io_util.hpp"
#include "neurodecode/kernels.hpp"

namespace neurodecode::wavelet {

const std::array<double, 8> db4_lowpass = {
    0.23037781330885523,   0.71484657055254153,  0.63088076792959036,
    -0.027983769416983849, -0.18703481171888114, 0.030841381835986965,
    0.032883011666982945,  -0.010597401784997278};

const std::array<double, 8> db4_highpass = [] {
  std::array<double, 8> g{};
  for (int t = 0; t < 8; ++t)
    g[t] = (t % 2 == 0 ? 1.0 : -1.0) * db4_lowpass[7 - t];
  return g;
}();

namespace {

void analysis_step(std::span<const double> x, std::vector<double>& approx,
                   std::vector<double>& detail) {
  const std::size_t n = x.size();
  const std::size_t half = n / 2;
  approx.assign(half, 0.0);
  detail.assign(half, 0.0);
  for (std::size_t k = 0; k < half; ++k) {
    double a = 0.0, d = 0.0;
    for (std::size_t t = 0; t < 8; ++t) {
      const double v = x[(2 * k + t) % n];
      a += db4_lowpass[t] * v;
      d += db4_highpass[t] * v;
    }
    approx[k] = a;
    detail[k] = d;
  }
}

// Transpose of analysis_step: exact inverse because the periodized
// two-channel bank is orthonormal.
std::vector<double> synthesis_step(std::span<const double> approx,
                                   std::span<const double> detail) {
  const std::size_t half = approx.size();
  const std::size_t n = 2 * half;
  std::vector<double> x(n, 0.0);
  for (std::size_t k = 0; k < half; ++k)
    for (std::size_t t = 0; t < 8; ++t)
      x[(2 * k + t) % n] += db4_lowpass[t] * approx[k] + db4_highpass[t] * detail[k];
  return x;
}

double shannon_entropy_bits(std::span<const double> coeffs) {
  const double total = kernels::sumsq(coeffs.data(), coeffs.size());
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double c : coeffs) {
    const double p = c * c / total;
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

}  // namespace

WaveletDecomposition dwt_db4(std::span<const double> signal, int levels) {
  if (levels < 1) throw std::invalid_argument("dwt: levels must be >= 1");
  const std::size_t n = signal.size();
  const std::size_t block = std::size_t{1} << levels;
  if (n % block != 0)
    throw std::invalid_argument("dwt: length not divisible by 2^levels");
  if (n < 8 * block)
    throw std::invalid_argument("dwt: signal too short for requested levels");

  WaveletDecomposition out;
  out.original_length = n;
  std::vector<double> current(signal.begin(), signal.end());
  for (int level = 0; level < levels; ++level) {
    std::vector<double> approx, detail;
    analysis_step(current, approx, detail);
    out.details.push_back(std::move(detail));
    current = std::move(approx);
  }
  out.approximation = std::move(current);
  return out;
}

std::vector<double> idwt_db4(const WaveletDecomposition& decomp) {
  if (decomp.details.empty())
    throw std::invalid_argument("idwt: no detail levels");
  std::size_t expect = decomp.original_length;
  for (const std::vector<double>& d : decomp.details) {
    expect /= 2;
    if (d.size() != expect)
      throw std::invalid_argument("idwt: inconsistent detail length");
  }
  if (decomp.approximation.size() != expect)
    throw std::invalid_argument("idwt: inconsistent approximation length");

  std::vector<double> current = decomp.approximation;
  for (std::size_t level = decomp.details.size(); level-- > 0;)
    current = synthesis_step(current, decomp.details[level]);
  return current;
}

std::array<double, 12> subband_features(const WaveletDecomposition& decomp) {
  if (decomp.levels() != 4)
    throw std::invalid_argument("subband_features: expected 4 detail levels");
  std::array<double, 12> out{};
  for (std::size_t j = 0; j < 4; ++j) {
    const std::vector<double>& c = decomp.details[j];
    const double n = static_cast<double>(c.size());
    const double energy = kernels::sumsq(c.data(), c.size());
    const double mean = kernels::sum(c.data(), c.size()) / n;
    double var = 0.0;
    for (double v : c) var += (v - mean) * (v - mean);
    out[3 * j + 0] = std::sqrt(energy / n);
    out[3 * j + 1] = var / n;
    out[3 * j + 2] = shannon_entropy_bits(c);
  }
  return out;
}

std::vector<FeatureVector> trial_features(const Trial& trial,
                                          const csp::CspModel& model) {
  if (trial.epoch.channels() != model.channels())
    throw std::invalid_argument("trial_features: channel count mismatch");
  const std::size_t usable = trial.epoch.length() / 16 * 16;
  if (usable < 128)
    throw std::invalid_argument("trial_features: epoch shorter than 128 samples");

  std::vector<FeatureVector> out;
  out.reserve(model.k);
  for (std::size_t rank = 0; rank < model.k; ++rank) {
    FeatureVector fv;
    fv.trial_id = trial.trial_id;
    fv.rank = static_cast<int>(rank + 1);
    fv.label = trial.label;
    const std::size_t channels[2] = {model.selected_max[rank],
                                     model.selected_min[rank]};
    for (int part = 0; part < 2; ++part) {
      const double* row = trial.epoch.samples.row(channels[part]);
      const std::array<double, 12> feats =
          subband_features(dwt_db4(std::span<const double>(row, usable), 4));
      std::copy(feats.begin(), feats.end(), fv.values.begin() + 12 * part);
    }
    out.push_back(fv);
  }
  return out;
}

std::string features_csv(const std::vector<FeatureVector>& features) {
  std::string csv = "trial_id,rank,label";
  for (int i = 0; i < 24; ++i) {
    char col[8];
    std::snprintf(col, sizeof col, ",v%02d", i);
    csv += col;
  }
  csv += "\n";
  for (const FeatureVector& fv : features) {
    csv += std::to_string(fv.trial_id) + "," + std::to_string(fv.rank) + "," +
           std::to_string(fv.label);
    for (double v : fv.values) csv += "," + io::format_double(v);
    csv += "\n";
  }
  return csv;
}

}  // namespace neurodecode::wavelet
