#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "neurodecode/nnet.hpp"
#include "neurodecode/types.hpp"
#include "neurodecode/wavelet.hpp"

namespace neurodecode::pipeline {

struct FoldAssignment {
  std::map<std::int64_t, std::size_t> fold_of_trial;
  std::size_t fold_count = 0;
};

// Seeded partition at trial granularity; stratified keeps per-class fold
// sizes within one trial of each other.
FoldAssignment make_folds(const TrialSet& set, std::size_t folds,
                          std::uint64_t seed, bool stratified = true);

// Hard voting over an odd number of binary votes.
int majority_vote(const std::vector<int>& votes);

// Raised when a trial's feature vectors straddle the train/test boundary.
class LeakageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void audit_no_leakage(const std::vector<wavelet::FeatureVector>& train,
                      const std::vector<wavelet::FeatureVector>& test);

// Per-dimension z-scoring, fit on training features only.
struct Standardizer {
  std::array<double, 24> mean{};
  std::array<double, 24> stddev{};  // floored at 1e-12

  static Standardizer fit(const std::vector<wavelet::FeatureVector>& features);
  void apply(std::vector<wavelet::FeatureVector>& features) const;
};

struct PipelineConfig {
  std::size_t k = 9;
  double csp_ridge = 1e-8;
  bool standardize = true;
  bool stratified = true;
  nnet::TrainConfig train;
};

struct TrialPrediction {
  std::int64_t trial_id = 0;
  int label = 0;
  std::size_t fold = 0;
  std::vector<int> votes;          // one per selection rank
  std::vector<double> probabilities;
  int predicted = 0;
};

// Audits ids, standardizes, trains and predicts; groups test vectors by
// trial preserving their order. Odd vote counts use the plain majority;
// with an even count a tie is arbitrated by the rank-1 vote (the pair of
// channels with the largest spatial-filter coefficients).
std::vector<TrialPrediction> classify_features(
    std::vector<wavelet::FeatureVector> train_features,
    std::vector<wavelet::FeatureVector> test_features,
    const PipelineConfig& config, std::uint64_t train_seed);

// Full leakage-safe fold: spatial filters, features, scaler and network all
// fit on the training fold only.
std::vector<TrialPrediction> run_fold(const TrialSet& set,
                                      const FoldAssignment& assignment,
                                      std::size_t fold_index,
                                      const PipelineConfig& config,
                                      std::uint64_t seed);

struct CvReport {
  std::vector<double> fold_accuracy;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // population std over folds
  std::vector<TrialPrediction> trials;

  // config echo
  std::size_t folds = 0;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  double csp_ridge = 0.0;
  bool standardize = true;
  bool stratified = true;
  nnet::TrainConfig train;

  std::string to_json() const;
  std::string folds_csv() const;
  std::string trials_csv() const;
};

// Deterministic aggregation of per-fold results (fold order, not completion
// order), so parallel runs reproduce the sequential report byte for byte.
CvReport assemble_report(std::vector<std::vector<TrialPrediction>> per_fold,
                         const PipelineConfig& config, std::size_t folds,
                         std::uint64_t seed);

CvReport run_cv(const TrialSet& set, std::size_t folds,
                const PipelineConfig& config, std::uint64_t seed,
                std::size_t jobs = 1);

struct SweepRow {
  std::size_t k = 0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
};

std::vector<SweepRow> sweep_channels(const TrialSet& set,
                                     const std::vector<std::size_t>& k_values,
                                     std::size_t folds,
                                     const PipelineConfig& config,
                                     std::uint64_t seed, std::size_t jobs = 1);

std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace neurodecode::pipeline
