#include "neurodecode/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>
#include <unordered_set>

#include "neurodecode/csp.hpp"
#include "neurodecode/io_util.hpp"
#include "neurodecode/rng.hpp"
#include "json.hpp"

namespace neurodecode::pipeline {

FoldAssignment make_folds(const TrialSet& set, std::size_t folds,
                          std::uint64_t seed, bool stratified) {
  if (folds < 1) throw std::invalid_argument("make_folds: need at least 1 fold");
  set.validate();

  FoldAssignment out;
  out.fold_count = folds;
  Rng rng(derive_seed(seed, "folds"));

  std::vector<std::vector<std::size_t>> groups;
  if (stratified) {
    groups.resize(2);
    for (std::size_t i = 0; i < set.trials.size(); ++i)
      groups[static_cast<std::size_t>(set.trials[i].label)].push_back(i);
  } else {
    groups.resize(1);
    for (std::size_t i = 0; i < set.trials.size(); ++i) groups[0].push_back(i);
  }
  for (std::vector<std::size_t>& g : groups) {
    if (g.size() < folds)
      throw std::invalid_argument("make_folds: too few trials for fold count");
    rng.shuffle(g);
    for (std::size_t pos = 0; pos < g.size(); ++pos)
      out.fold_of_trial[set.trials[g[pos]].trial_id] = pos % folds;
  }
  return out;
}

int majority_vote(const std::vector<int>& votes) {
  if (votes.empty() || votes.size() % 2 == 0)
    throw std::invalid_argument("majority_vote: vote count must be odd");
  std::size_t ones = 0;
  for (int v : votes) {
    if (v != 0 && v != 1)
      throw std::invalid_argument("majority_vote: votes must be 0 or 1");
    ones += static_cast<std::size_t>(v);
  }
  return ones * 2 > votes.size() ? 1 : 0;
}

void audit_no_leakage(const std::vector<wavelet::FeatureVector>& train,
                      const std::vector<wavelet::FeatureVector>& test) {
  std::unordered_set<std::int64_t> train_ids;
  for (const wavelet::FeatureVector& fv : train) train_ids.insert(fv.trial_id);
  for (const wavelet::FeatureVector& fv : test)
    if (train_ids.contains(fv.trial_id))
      throw LeakageError("trial " + std::to_string(fv.trial_id) +
                         " has feature vectors in both training and test sets");
}

Standardizer Standardizer::fit(const std::vector<wavelet::FeatureVector>& features) {
  if (features.empty())
    throw std::invalid_argument("standardizer: no features to fit");
  Standardizer s;
  const double n = static_cast<double>(features.size());
  for (const wavelet::FeatureVector& fv : features)
    for (std::size_t d = 0; d < fv.values.size(); ++d) s.mean[d] += fv.values[d];
  for (double& m : s.mean) m /= n;
  for (const wavelet::FeatureVector& fv : features)
    for (std::size_t d = 0; d < fv.values.size(); ++d) {
      const double diff = fv.values[d] - s.mean[d];
      s.stddev[d] += diff * diff;
    }
  for (double& v : s.stddev) v = std::max(std::sqrt(v / n), 1e-12);
  return s;
}

void Standardizer::apply(std::vector<wavelet::FeatureVector>& features) const {
  for (wavelet::FeatureVector& fv : features)
    for (std::size_t d = 0; d < fv.values.size(); ++d)
      fv.values[d] = (fv.values[d] - mean[d]) / stddev[d];
}

std::vector<TrialPrediction> classify_features(
    std::vector<wavelet::FeatureVector> train_features,
    std::vector<wavelet::FeatureVector> test_features,
    const PipelineConfig& config, std::uint64_t train_seed) {
  if (train_features.empty() || test_features.empty())
    throw std::invalid_argument("classify_features: empty feature set");
  audit_no_leakage(train_features, test_features);

  if (config.standardize) {
    const Standardizer scaler = Standardizer::fit(train_features);
    scaler.apply(train_features);
    scaler.apply(test_features);
  }

  nnet::TrainConfig tc = config.train;
  tc.seed = train_seed;
  const nnet::MlpModel init = nnet::MlpModel::create(
      derive_seed(train_seed, "init"), train_features.front().values.size());
  const nnet::MlpModel model = nnet::train(init, train_features, tc);

  Matrix x(test_features.size(), test_features.front().values.size());
  for (std::size_t i = 0; i < test_features.size(); ++i)
    std::copy(test_features[i].values.begin(), test_features[i].values.end(),
              x.row(i));
  const std::vector<double> probs = nnet::forward_inference(model, x);

  // Group by trial in order of first appearance; within a trial the vectors
  // arrive in rank order, so votes stay aligned with selection ranks.
  std::vector<TrialPrediction> out;
  std::map<std::int64_t, std::size_t> slot;
  for (std::size_t i = 0; i < test_features.size(); ++i) {
    const wavelet::FeatureVector& fv = test_features[i];
    auto [it, inserted] = slot.try_emplace(fv.trial_id, out.size());
    if (inserted) {
      TrialPrediction tp;
      tp.trial_id = fv.trial_id;
      tp.label = fv.label;
      out.push_back(std::move(tp));
    }
    TrialPrediction& tp = out[it->second];
    tp.probabilities.push_back(probs[i]);
    tp.votes.push_back(probs[i] >= 0.5 ? 1 : 0);
  }

  for (TrialPrediction& tp : out) {
    if (tp.votes.size() % 2 == 1) {
      tp.predicted = majority_vote(tp.votes);
    } else {
      const std::size_t ones = static_cast<std::size_t>(
          std::count(tp.votes.begin(), tp.votes.end(), 1));
      if (ones * 2 != tp.votes.size()) {
        tp.predicted = ones * 2 > tp.votes.size() ? 1 : 0;
      } else {
        // Tied hard votes: the rank-1 pair (largest CSP coefficients, most
        // class-discriminative channels) arbitrates.
        tp.predicted = tp.votes.front();
      }
    }
  }
  return out;
}

std::vector<TrialPrediction> run_fold(const TrialSet& set,
                                      const FoldAssignment& assignment,
                                      std::size_t fold_index,
                                      const PipelineConfig& config,
                                      std::uint64_t seed) {
  if (fold_index >= assignment.fold_count)
    throw std::invalid_argument("run_fold: fold index out of range");

  std::vector<const Trial*> train_by_class[2];
  std::vector<const Trial*> test_trials;
  for (const Trial& t : set.trials) {
    const auto it = assignment.fold_of_trial.find(t.trial_id);
    if (it == assignment.fold_of_trial.end())
      throw std::invalid_argument("run_fold: trial missing from assignment");
    if (it->second == fold_index)
      test_trials.push_back(&t);
    else
      train_by_class[static_cast<std::size_t>(t.label)].push_back(&t);
  }
  if (test_trials.empty()) throw std::invalid_argument("run_fold: empty test fold");

  const csp::SpatialCovariance cov0 = csp::covariance(train_by_class[0], 0);
  const csp::SpatialCovariance cov1 = csp::covariance(train_by_class[1], 1);
  const csp::CspModel model = csp::fit_csp(cov0, cov1, config.k, config.csp_ridge);

  std::vector<wavelet::FeatureVector> train_features, test_features;
  for (int label = 0; label < 2; ++label)
    for (const Trial* t : train_by_class[label]) {
      const std::vector<wavelet::FeatureVector> fvs = wavelet::trial_features(*t, model);
      train_features.insert(train_features.end(), fvs.begin(), fvs.end());
    }
  for (const Trial* t : test_trials) {
    const std::vector<wavelet::FeatureVector> fvs = wavelet::trial_features(*t, model);
    test_features.insert(test_features.end(), fvs.begin(), fvs.end());
  }

  std::vector<TrialPrediction> predictions = classify_features(
      std::move(train_features), std::move(test_features), config,
      derive_seed(derive_seed(seed, "train"), fold_index));
  for (TrialPrediction& tp : predictions) tp.fold = fold_index;
  return predictions;
}

CvReport assemble_report(std::vector<std::vector<TrialPrediction>> per_fold,
                         const PipelineConfig& config, std::size_t folds,
                         std::uint64_t seed) {
  CvReport report;
  report.folds = folds;
  report.k = config.k;
  report.seed = seed;
  report.csp_ridge = config.csp_ridge;
  report.standardize = config.standardize;
  report.stratified = config.stratified;
  report.train = config.train;

  for (const std::vector<TrialPrediction>& fold : per_fold) {
    std::size_t correct = 0;
    for (const TrialPrediction& tp : fold)
      if (tp.predicted == tp.label) ++correct;
    if (fold.empty())
      throw std::invalid_argument("assemble_report: empty fold result");
    report.fold_accuracy.push_back(static_cast<double>(correct) /
                                   static_cast<double>(fold.size()));
    report.trials.insert(report.trials.end(), fold.begin(), fold.end());
  }

  const double n = static_cast<double>(report.fold_accuracy.size());
  for (double a : report.fold_accuracy) report.mean_accuracy += a;
  report.mean_accuracy /= n;
  for (double a : report.fold_accuracy) {
    const double d = a - report.mean_accuracy;
    report.std_accuracy += d * d;
  }
  report.std_accuracy = std::sqrt(report.std_accuracy / n);
  return report;
}

CvReport run_cv(const TrialSet& set, std::size_t folds,
                const PipelineConfig& config, std::uint64_t seed,
                std::size_t jobs) {
  const FoldAssignment assignment = make_folds(set, folds, seed, config.stratified);

  std::vector<std::vector<TrialPrediction>> per_fold(folds);
  std::vector<std::exception_ptr> errors(folds);
  if (jobs <= 1) {
    for (std::size_t f = 0; f < folds; ++f)
      per_fold[f] = run_fold(set, assignment, f, config, seed);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (;;) {
        const std::size_t f = next.fetch_add(1);
        if (f >= folds) return;
        try {
          per_fold[f] = run_fold(set, assignment, f, config, seed);
        } catch (...) {
          errors[f] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < std::min(jobs, folds); ++j)
      pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errors)
      if (e) std::rethrow_exception(e);
  }
  return assemble_report(std::move(per_fold), config, folds, seed);
}

std::vector<SweepRow> sweep_channels(const TrialSet& set,
                                     const std::vector<std::size_t>& k_values,
                                     std::size_t folds,
                                     const PipelineConfig& config,
                                     std::uint64_t seed, std::size_t jobs) {
  for (std::size_t k : k_values)
    if (k == 0 || k > set.channels())
      throw std::invalid_argument("sweep_channels: k out of range");
  std::vector<SweepRow> rows;
  for (std::size_t k : k_values) {
    PipelineConfig c = config;
    c.k = k;
    const CvReport report = run_cv(set, folds, c, seed, jobs);
    rows.push_back({k, report.mean_accuracy, report.std_accuracy});
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string csv = "k,mean_accuracy,std_accuracy\n";
  for (const SweepRow& r : rows)
    csv += std::to_string(r.k) + "," + io::format_double(r.mean_accuracy) +
           "," + io::format_double(r.std_accuracy) + "\n";
  return csv;
}

namespace {

nlohmann::json prediction_to_json(const TrialPrediction& tp) {
  nlohmann::json j;
  j["trial_id"] = tp.trial_id;
  j["label"] = tp.label;
  j["fold"] = tp.fold;
  j["votes"] = tp.votes;
  j["probabilities"] = tp.probabilities;
  j["predicted"] = tp.predicted;
  return j;
}

}  // namespace

std::string CvReport::to_json() const {
  nlohmann::json j;
  j["config"] = {{"folds", folds},
                 {"k", k},
                 {"seed", seed},
                 {"csp_ridge", csp_ridge},
                 {"standardize", standardize},
                 {"stratified", stratified},
                 {"train",
                  {{"learning_rate", train.learning_rate},
                   {"batch_size", train.batch_size},
                   {"epochs", train.epochs},
                   {"beta1", train.beta1},
                   {"beta2", train.beta2},
                   {"adam_epsilon", train.adam_epsilon},
                   {"bn_momentum", train.bn_momentum}}}};
  j["fold_accuracy"] = fold_accuracy;
  j["mean_accuracy"] = mean_accuracy;
  j["std_accuracy"] = std_accuracy;
  auto trials_json = nlohmann::json::array();
  for (const TrialPrediction& tp : trials) trials_json.push_back(prediction_to_json(tp));
  j["trials"] = std::move(trials_json);
  return j.dump(2) + "\n";
}

std::string CvReport::folds_csv() const {
  std::string csv = "fold,accuracy\n";
  for (std::size_t f = 0; f < fold_accuracy.size(); ++f)
    csv += std::to_string(f) + "," + io::format_double(fold_accuracy[f]) + "\n";
  return csv;
}

std::string CvReport::trials_csv() const {
  std::string csv = "trial_id,label";
  for (std::size_t i = 1; i <= k; ++i) csv += ",vote" + std::to_string(i);
  csv += ",predicted\n";
  for (const TrialPrediction& tp : trials) {
    csv += std::to_string(tp.trial_id) + "," + std::to_string(tp.label);
    for (int v : tp.votes) csv += "," + std::to_string(v);
    csv += "," + std::to_string(tp.predicted) + "\n";
  }
  return csv;
}

}  // namespace neurodecode::pipeline
