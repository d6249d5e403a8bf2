#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "neurodecode/pipeline.hpp"
#include "neurodecode/rng.hpp"
#include "neurodecode/synth.hpp"

using namespace neurodecode;

namespace {

TrialSet small_synthetic(std::uint64_t seed, std::size_t channels = 8,
                         std::size_t per_class = 20,
                         std::size_t epoch = 256) {
  synth::SynthSpec spec;
  spec.channels = channels;
  spec.trials_per_class = per_class;
  spec.epoch_samples = epoch;
  spec.informative_pairs = 2;
  spec.variance_ratio = 4.0;
  spec.noise_sigma = 0.5;
  spec.seed = seed;
  return synth::generate(spec);
}

wavelet::FeatureVector constant_vector(std::int64_t trial_id, int rank,
                                       int label, double value) {
  wavelet::FeatureVector fv;
  fv.trial_id = trial_id;
  fv.rank = rank;
  fv.label = label;
  fv.values.fill(value);
  return fv;
}

// Training set where the features trivially encode the label: +v for class 1,
// -v for class 0, with slight per-sample jitter so batchnorm has variance.
std::vector<wavelet::FeatureVector> separable_training_set(std::size_t per_class) {
  Rng rng(1234);
  std::vector<wavelet::FeatureVector> out;
  for (std::size_t i = 0; i < per_class; ++i) {
    wavelet::FeatureVector pos = constant_vector(1000 + i, 1, 1, 1.0);
    wavelet::FeatureVector neg = constant_vector(2000 + i, 1, 0, -1.0);
    for (auto& v : pos.values) v += 0.1 * rng.normal();
    for (auto& v : neg.values) v += 0.1 * rng.normal();
    out.push_back(pos);
    out.push_back(neg);
  }
  return out;
}

pipeline::PipelineConfig fast_config(std::size_t k, std::size_t epochs = 30) {
  pipeline::PipelineConfig c;
  c.k = k;
  c.train.epochs = epochs;
  return c;
}

}  // namespace

TEST_CASE("make_folds covers every trial with balanced stratified folds") {
  const TrialSet set = small_synthetic(3);
  const std::size_t folds = 5;
  const pipeline::FoldAssignment a = pipeline::make_folds(set, folds, 7);
  CHECK(a.fold_count == folds);
  REQUIRE(a.fold_of_trial.size() == set.trials.size());

  // fold sizes per class within one trial of each other
  std::map<std::size_t, std::size_t> per_fold[2];
  for (const Trial& t : set.trials) {
    const auto it = a.fold_of_trial.find(t.trial_id);
    REQUIRE(it != a.fold_of_trial.end());
    CHECK(it->second < folds);
    per_fold[t.label][it->second]++;
  }
  for (int label = 0; label < 2; ++label) {
    std::size_t lo = set.trials.size(), hi = 0;
    for (std::size_t f = 0; f < folds; ++f) {
      lo = std::min(lo, per_fold[label][f]);
      hi = std::max(hi, per_fold[label][f]);
    }
    CHECK(hi - lo <= 1);
  }
}

TEST_CASE("make_folds is seed-deterministic and seed-sensitive") {
  const TrialSet set = small_synthetic(4);
  const auto a = pipeline::make_folds(set, 5, 11);
  const auto b = pipeline::make_folds(set, 5, 11);
  const auto c = pipeline::make_folds(set, 5, 12);
  CHECK(a.fold_of_trial == b.fold_of_trial);
  CHECK_FALSE(a.fold_of_trial == c.fold_of_trial);
}

TEST_CASE("make_folds handles edge fold counts") {
  const TrialSet set = small_synthetic(5, 8, 6);
  // One fold: everything is test.
  const auto one = pipeline::make_folds(set, 1, 0);
  for (const auto& [id, fold] : one.fold_of_trial) CHECK(fold == 0);
  // More folds than trials per class: rejected.
  CHECK_THROWS_AS(pipeline::make_folds(set, 7, 0), std::invalid_argument);
  CHECK_THROWS_AS(pipeline::make_folds(set, 0, 0), std::invalid_argument);
  // Unstratified accepts up to the total trial count.
  CHECK_NOTHROW(pipeline::make_folds(set, 12, 0, false));
}

TEST_CASE("majority_vote implements strict odd-count majority") {
  CHECK(pipeline::majority_vote({1}) == 1);
  CHECK(pipeline::majority_vote({0, 1, 1}) == 1);
  CHECK(pipeline::majority_vote({0, 0, 1}) == 0);
  // 4 ones out of 9 -> class 0.
  CHECK(pipeline::majority_vote({1, 1, 1, 1, 0, 0, 0, 0, 0}) == 0);
  // 5 ones out of 9 -> class 1.
  CHECK(pipeline::majority_vote({1, 1, 1, 1, 1, 0, 0, 0, 0}) == 1);
  CHECK_THROWS_AS(pipeline::majority_vote({}), std::invalid_argument);
  CHECK_THROWS_AS(pipeline::majority_vote({1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(pipeline::majority_vote({1, 2, 0}), std::invalid_argument);
}

TEST_CASE("audit_no_leakage raises on any shared trial id") {
  std::vector<wavelet::FeatureVector> train{constant_vector(1, 1, 0, 0.0),
                                            constant_vector(2, 1, 1, 0.0)};
  std::vector<wavelet::FeatureVector> clean{constant_vector(3, 1, 0, 0.0)};
  std::vector<wavelet::FeatureVector> dirty{constant_vector(3, 1, 0, 0.0),
                                            constant_vector(2, 2, 1, 0.0)};
  CHECK_NOTHROW(pipeline::audit_no_leakage(train, clean));
  CHECK_THROWS_AS(pipeline::audit_no_leakage(train, dirty),
                  pipeline::LeakageError);
}

TEST_CASE("standardizer zero-means and unit-scales the training set") {
  Rng rng(71);
  std::vector<wavelet::FeatureVector> feats;
  for (int i = 0; i < 50; ++i) {
    wavelet::FeatureVector fv = constant_vector(i, 1, i % 2, 0.0);
    for (std::size_t d = 0; d < 24; ++d)
      fv.values[d] = 3.0 + 2.0 * rng.normal() * (static_cast<double>(d) + 1.0);
    feats.push_back(fv);
  }
  const pipeline::Standardizer s = pipeline::Standardizer::fit(feats);
  std::vector<wavelet::FeatureVector> scaled = feats;
  s.apply(scaled);
  for (std::size_t d = 0; d < 24; ++d) {
    double mean = 0.0, var = 0.0;
    for (const auto& fv : scaled) mean += fv.values[d];
    mean /= 50.0;
    for (const auto& fv : scaled) {
      const double diff = fv.values[d] - mean;
      var += diff * diff;
    }
    var /= 50.0;
    CHECK(std::abs(mean) <= 1e-12);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("standardizer survives constant dimensions") {
  std::vector<wavelet::FeatureVector> feats(4, constant_vector(0, 1, 0, 5.0));
  for (int i = 0; i < 4; ++i) feats[i].trial_id = i;
  const pipeline::Standardizer s = pipeline::Standardizer::fit(feats);
  for (double sd : s.stddev) CHECK(sd == 1e-12);  // floored, never zero
  std::vector<wavelet::FeatureVector> scaled = feats;
  s.apply(scaled);
  for (const auto& fv : scaled)
    for (double v : fv.values) CHECK(std::isfinite(v));
  CHECK_THROWS_AS(pipeline::Standardizer::fit({}), std::invalid_argument);
}

TEST_CASE("classify_features refuses leaking trial ids") {
  auto train = separable_training_set(10);
  std::vector<wavelet::FeatureVector> test{
      constant_vector(train.front().trial_id, 1, 1, 1.0)};
  CHECK_THROWS_AS(pipeline::classify_features(train, test, fast_config(1), 1),
                  pipeline::LeakageError);
}

TEST_CASE("classify_features groups votes by trial in rank order") {
  const auto train = separable_training_set(20);
  std::vector<wavelet::FeatureVector> test;
  // Trial 7: ranks 1/2/3 all positive; trial 8: all negative.
  for (int rank = 1; rank <= 3; ++rank) {
    test.push_back(constant_vector(7, rank, 1, 1.0));
    test.push_back(constant_vector(8, rank, 0, -1.0));
  }
  const auto preds =
      pipeline::classify_features(train, test, fast_config(3, 60), 42);
  REQUIRE(preds.size() == 2);
  CHECK(preds[0].trial_id == 7);  // order of first appearance
  CHECK(preds[1].trial_id == 8);
  for (const auto& tp : preds) {
    CHECK(tp.votes.size() == 3);
    CHECK(tp.probabilities.size() == 3);
  }
  CHECK(preds[0].votes == std::vector<int>{1, 1, 1});
  CHECK(preds[1].votes == std::vector<int>{0, 0, 0});
  CHECK(preds[0].predicted == 1);
  CHECK(preds[1].predicted == 0);
}

TEST_CASE("an even vote tie is arbitrated by the rank-1 vote") {
  const auto train = separable_training_set(20);
  // Two ranks per trial, intentionally disagreeing.
  std::vector<wavelet::FeatureVector> test{
      constant_vector(7, 1, 1, 1.0), constant_vector(7, 2, 1, -1.0),
      constant_vector(8, 1, 0, -1.0), constant_vector(8, 2, 0, 1.0)};
  const auto preds =
      pipeline::classify_features(train, test, fast_config(2, 60), 42);
  REQUIRE(preds.size() == 2);
  REQUIRE(preds[0].votes == std::vector<int>{1, 0});  // tied
  REQUIRE(preds[1].votes == std::vector<int>{0, 1});  // tied
  CHECK(preds[0].predicted == 1);  // rank-1 vote wins
  CHECK(preds[1].predicted == 0);
  // An even but unbalanced vote follows the majority, not rank 1.
  std::vector<wavelet::FeatureVector> test2{
      constant_vector(9, 1, 1, -1.0), constant_vector(9, 2, 1, 1.0),
      constant_vector(9, 3, 1, 1.0), constant_vector(9, 4, 1, 1.0)};
  const auto preds2 =
      pipeline::classify_features(train, test2, fast_config(4, 60), 42);
  REQUIRE(preds2.size() == 1);
  REQUIRE(preds2[0].votes == std::vector<int>{0, 1, 1, 1});
  CHECK(preds2[0].predicted == 1);
}

TEST_CASE("assemble_report aggregates fold results deterministically") {
  std::vector<std::vector<pipeline::TrialPrediction>> per_fold(2);
  auto mk = [](std::int64_t id, int label, int predicted) {
    pipeline::TrialPrediction tp;
    tp.trial_id = id;
    tp.label = label;
    tp.predicted = predicted;
    return tp;
  };
  // Fold 0: 2/2 correct. Fold 1: 1/2 correct.
  per_fold[0] = {mk(1, 0, 0), mk(2, 1, 1)};
  per_fold[1] = {mk(3, 0, 1), mk(4, 1, 1)};
  const pipeline::CvReport r =
      pipeline::assemble_report(std::move(per_fold), fast_config(3), 2, 5);
  REQUIRE(r.fold_accuracy.size() == 2);
  CHECK(r.fold_accuracy[0] == 1.0);
  CHECK(r.fold_accuracy[1] == 0.5);
  CHECK(r.mean_accuracy == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(r.std_accuracy == doctest::Approx(0.25).epsilon(1e-15));
  REQUIRE(r.trials.size() == 4);
  CHECK(r.trials[0].trial_id == 1);  // fold order preserved
  CHECK(r.trials[3].trial_id == 4);
  // Config echo lands in the JSON.
  const std::string json = r.to_json();
  CHECK(json.find("\"mean_accuracy\"") != std::string::npos);
  CHECK(json.find("\"k\": 3") != std::string::npos);
  // CSV shapes.
  CHECK(r.folds_csv().rfind("fold,accuracy\n", 0) == 0);
  CHECK(r.trials_csv().rfind("trial_id,label,vote1,vote2,vote3,predicted", 0) == 0);
}

TEST_CASE("a perfect stub classifier reports exactly 100 percent") {
  std::vector<std::vector<pipeline::TrialPrediction>> per_fold(3);
  std::int64_t id = 0;
  for (auto& fold : per_fold)
    for (int i = 0; i < 4; ++i) {
      pipeline::TrialPrediction tp;
      tp.trial_id = id++;
      tp.label = i % 2;
      tp.predicted = tp.label;
      fold.push_back(tp);
    }
  const pipeline::CvReport r =
      pipeline::assemble_report(std::move(per_fold), fast_config(9), 3, 0);
  CHECK(r.mean_accuracy == 1.0);
  CHECK(r.std_accuracy == 0.0);
}

TEST_CASE("run_cv separates an easy synthetic problem") {
  const TrialSet set = small_synthetic(21);
  const pipeline::CvReport r = pipeline::run_cv(set, 4, fast_config(2), 33);
  REQUIRE(r.fold_accuracy.size() == 4);
  CHECK(r.trials.size() == set.trials.size());
  CHECK(r.mean_accuracy >= 0.8);
  // Every test trial voted once per selection rank.
  for (const auto& tp : r.trials) CHECK(tp.votes.size() == 2);
  // Each trial id appears exactly once.
  std::map<std::int64_t, int> seen;
  for (const auto& tp : r.trials) seen[tp.trial_id]++;
  for (const auto& [id, n] : seen) CHECK(n == 1);
}

TEST_CASE("run_cv is reproducible and parallel-invariant") {
  const TrialSet set = small_synthetic(22, 8, 12, 256);
  const pipeline::PipelineConfig cfg = fast_config(2, 10);
  const pipeline::CvReport a = pipeline::run_cv(set, 3, cfg, 9, 1);
  const pipeline::CvReport b = pipeline::run_cv(set, 3, cfg, 9, 1);
  const pipeline::CvReport c = pipeline::run_cv(set, 3, cfg, 9, 4);
  CHECK(a.to_json() == b.to_json());
  CHECK(a.to_json() == c.to_json());  // byte-identical across job counts
  CHECK(a.trials_csv() == c.trials_csv());
}

TEST_CASE("label permutation drops accuracy to chance") {
  TrialSet set = small_synthetic(23, 8, 24, 256);
  // Destroy the label-signal association, keeping the class balance.
  std::vector<int> labels;
  for (const Trial& t : set.trials) labels.push_back(t.label);
  Rng rng(701);
  rng.shuffle(labels);
  for (std::size_t i = 0; i < labels.size(); ++i) set.trials[i].label = labels[i];

  const pipeline::CvReport r = pipeline::run_cv(set, 4, fast_config(2, 20), 15);
  CHECK(r.mean_accuracy >= 0.25);
  CHECK(r.mean_accuracy <= 0.75);
}

TEST_CASE("sweep_channels matches run_cv point for point") {
  const TrialSet set = small_synthetic(24, 8, 12, 256);
  const pipeline::PipelineConfig cfg = fast_config(3, 10);
  const auto rows = pipeline::sweep_channels(set, {1, 3}, 3, cfg, 4);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].k == 1);
  CHECK(rows[1].k == 3);
  pipeline::PipelineConfig c1 = cfg;
  c1.k = 1;
  const pipeline::CvReport direct = pipeline::run_cv(set, 3, c1, 4);
  CHECK(rows[0].mean_accuracy == direct.mean_accuracy);
  CHECK(rows[0].std_accuracy == direct.std_accuracy);

  const std::string csv = pipeline::sweep_csv(rows);
  CHECK(csv.rfind("k,mean_accuracy,std_accuracy\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

  CHECK_THROWS_AS(pipeline::sweep_channels(set, {0}, 3, cfg, 4),
                  std::invalid_argument);
  CHECK_THROWS_AS(pipeline::sweep_channels(set, {9}, 3, cfg, 4),
                  std::invalid_argument);
}

TEST_CASE("run_fold rejects bad fold indices and missing assignments") {
  const TrialSet set = small_synthetic(25, 8, 8, 256);
  const auto assignment = pipeline::make_folds(set, 4, 2);
  CHECK_THROWS_AS(
      pipeline::run_fold(set, assignment, 4, fast_config(2, 5), 2),
      std::invalid_argument);
  pipeline::FoldAssignment partial = assignment;
  partial.fold_of_trial.erase(partial.fold_of_trial.begin());
  CHECK_THROWS_AS(
      pipeline::run_fold(set, partial, 0, fast_config(2, 5), 2),
      std::invalid_argument);
}
