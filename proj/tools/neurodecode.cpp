#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "neurodecode/dataset.hpp"
#include "neurodecode/dsp.hpp"
#include "neurodecode/io_util.hpp"
#include "neurodecode/nnet.hpp"
#include "neurodecode/pipeline.hpp"
#include "neurodecode/rng.hpp"
#include "neurodecode/synth.hpp"

namespace fs = std::filesystem;
using namespace neurodecode;

namespace {

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size())
    throw std::invalid_argument(what + " must be a non-negative integer, got '" +
                                text + "'");
  return v;
}

// Full run configuration; file values sit between built-in defaults and
// command-line flags, with NEURODECODE_SEED between file and flags.
struct RunConfig {
  std::string dataset;
  std::string output_dir = "out";

  double resample_hz = 256.0;
  double bandpass_low_hz = 8.0;
  double bandpass_high_hz = 70.0;
  int bandpass_order = 5;
  double notch_hz = 60.0;
  double notch_q = 30.0;
  bool enable_resample = true;
  bool enable_bandpass = true;
  bool enable_notch = true;

  std::size_t k = 9;
  double csp_ridge = 1e-8;

  nnet::TrainConfig train;

  std::size_t folds = 10;
  std::uint64_t seed = 0;
  bool stratify = true;
  bool standardize = true;
  std::size_t jobs = 1;
};

void expect_keys(const nlohmann::json& j,
                 std::initializer_list<const char*> keys,
                 const std::string& where) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : keys)
      if (item.key() == k) known = true;
    if (!known)
      throw std::invalid_argument("config: unknown key '" + where + item.key() +
                                  "'");
  }
}

template <typename T>
void take(const nlohmann::json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

RunConfig load_config(const fs::path& path) {
  const nlohmann::json j = nlohmann::json::parse(io::read_file(path));
  expect_keys(j, {"dataset", "output_dir", "preprocess", "csp", "train", "cv"},
              "");
  RunConfig rc;
  take(j, "dataset", rc.dataset);
  take(j, "output_dir", rc.output_dir);
  if (j.contains("preprocess")) {
    const nlohmann::json& p = j.at("preprocess");
    expect_keys(p,
                {"resample_hz", "bandpass_low_hz", "bandpass_high_hz",
                 "bandpass_order", "notch_hz", "notch_q", "enable_resample",
                 "enable_bandpass", "enable_notch"},
                "preprocess.");
    take(p, "resample_hz", rc.resample_hz);
    take(p, "bandpass_low_hz", rc.bandpass_low_hz);
    take(p, "bandpass_high_hz", rc.bandpass_high_hz);
    take(p, "bandpass_order", rc.bandpass_order);
    take(p, "notch_hz", rc.notch_hz);
    take(p, "notch_q", rc.notch_q);
    take(p, "enable_resample", rc.enable_resample);
    take(p, "enable_bandpass", rc.enable_bandpass);
    take(p, "enable_notch", rc.enable_notch);
  }
  if (j.contains("csp")) {
    const nlohmann::json& c = j.at("csp");
    expect_keys(c, {"k", "ridge"}, "csp.");
    take(c, "k", rc.k);
    take(c, "ridge", rc.csp_ridge);
  }
  if (j.contains("train")) {
    const nlohmann::json& t = j.at("train");
    expect_keys(t,
                {"learning_rate", "batch_size", "epochs", "beta1", "beta2",
                 "adam_epsilon", "bn_momentum"},
                "train.");
    take(t, "learning_rate", rc.train.learning_rate);
    take(t, "batch_size", rc.train.batch_size);
    take(t, "epochs", rc.train.epochs);
    take(t, "beta1", rc.train.beta1);
    take(t, "beta2", rc.train.beta2);
    take(t, "adam_epsilon", rc.train.adam_epsilon);
    take(t, "bn_momentum", rc.train.bn_momentum);
  }
  if (j.contains("cv")) {
    const nlohmann::json& c = j.at("cv");
    expect_keys(c, {"folds", "seed", "stratify", "standardize", "jobs"}, "cv.");
    take(c, "folds", rc.folds);
    take(c, "seed", rc.seed);
    take(c, "stratify", rc.stratify);
    take(c, "standardize", rc.standardize);
    take(c, "jobs", rc.jobs);
  }
  return rc;
}

struct CommonFlags {
  std::string config_path, data_path, out_dir;
  std::size_t folds = 0, k = 0, jobs = 0, epochs = 0, batch_size = 0;
  double learning_rate = 0.0, ridge = 0.0;
  std::uint64_t seed = 0;
  bool no_standardize = false, no_stratify = false;

  CLI::Option *o_config = nullptr, *o_data = nullptr, *o_out = nullptr,
              *o_folds = nullptr, *o_k = nullptr, *o_jobs = nullptr,
              *o_epochs = nullptr, *o_batch = nullptr, *o_lr = nullptr,
              *o_ridge = nullptr, *o_seed = nullptr;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
  f.o_config = cmd->add_option("--config", f.config_path, "JSON run configuration");
  f.o_data = cmd->add_option("--data", f.data_path, "dataset manifest path");
  f.o_out = cmd->add_option("--out", f.out_dir, "output directory");
  f.o_folds = cmd->add_option("--folds", f.folds, "cross-validation folds");
  f.o_k = cmd->add_option("--k", f.k, "channels per spatial filter");
  f.o_jobs = cmd->add_option("--jobs", f.jobs, "parallel fold jobs");
  f.o_epochs = cmd->add_option("--epochs", f.epochs, "training epochs");
  f.o_batch = cmd->add_option("--batch-size", f.batch_size, "mini-batch size");
  f.o_lr = cmd->add_option("--learning-rate", f.learning_rate);
  f.o_ridge = cmd->add_option("--ridge", f.ridge, "covariance ridge factor");
  f.o_seed = cmd->add_option("--seed", f.seed, "master random seed");
  cmd->add_flag("--no-standardize", f.no_standardize, "skip feature z-scoring");
  cmd->add_flag("--no-stratify", f.no_stratify, "plain instead of stratified folds");
}

RunConfig resolve_config(const CommonFlags& f) {
  RunConfig rc;
  if (f.o_config->count()) rc = load_config(f.config_path);
  if (const char* env = std::getenv("NEURODECODE_SEED"))
    rc.seed = parse_u64(env, "NEURODECODE_SEED");
  if (f.o_data->count()) rc.dataset = f.data_path;
  if (f.o_out->count()) rc.output_dir = f.out_dir;
  if (f.o_folds->count()) rc.folds = f.folds;
  if (f.o_k->count()) rc.k = f.k;
  if (f.o_jobs->count()) rc.jobs = f.jobs;
  if (f.o_epochs->count()) rc.train.epochs = f.epochs;
  if (f.o_batch->count()) rc.train.batch_size = f.batch_size;
  if (f.o_lr->count()) rc.train.learning_rate = f.learning_rate;
  if (f.o_ridge->count()) rc.csp_ridge = f.ridge;
  if (f.o_seed->count()) rc.seed = f.seed;
  if (f.no_standardize) rc.standardize = false;
  if (f.no_stratify) rc.stratify = false;
  if (rc.dataset.empty())
    throw std::invalid_argument("no dataset given (use --data or a config file)");
  return rc;
}

pipeline::PipelineConfig to_pipeline_config(const RunConfig& rc) {
  pipeline::PipelineConfig pc;
  pc.k = rc.k;
  pc.csp_ridge = rc.csp_ridge;
  pc.standardize = rc.standardize;
  pc.stratified = rc.stratify;
  pc.train = rc.train;
  return pc;
}

void cmd_generate(const synth::SynthSpec& spec, const std::string& out_dir) {
  const TrialSet set = synth::generate(spec);
  const fs::path manifest = fs::path(out_dir) / "manifest.json";
  dataset::save_manifest(set, manifest);
  std::printf("wrote %zu trials (%zu per class), %zu channels, %zu samples at %g Hz\n",
              set.trials.size(), spec.trials_per_class, spec.channels,
              spec.epoch_samples, spec.rate_hz);
  std::printf("manifest: %s\n", manifest.string().c_str());
}

void cmd_preprocess(const RunConfig& rc) {
  TrialSet set = dataset::load_manifest(rc.dataset);
  const bool resampling = rc.enable_resample && set.rate_hz != rc.resample_hz;
  const double out_rate = resampling ? rc.resample_hz : set.rate_hz;

  dsp::IirFilter bandpass, notch;
  if (rc.enable_bandpass)
    bandpass = dsp::design_butterworth_bandpass(
        rc.bandpass_order, rc.bandpass_low_hz, rc.bandpass_high_hz, out_rate);
  if (rc.enable_notch)
    notch = dsp::design_notch(rc.notch_hz, rc.notch_q, out_rate);

  for (Trial& trial : set.trials) {
    Recording rec = std::move(trial.epoch);
    if (resampling) rec = dsp::resample(rec, rc.resample_hz);
    if (rc.enable_bandpass) rec = dsp::filter_forward(bandpass, rec);
    if (rc.enable_notch) rec = dsp::filter_forward(notch, rec);
    trial.epoch = std::move(rec);
  }
  set.rate_hz = out_rate;
  set.epoch_samples = set.trials.empty() ? set.epoch_samples
                                         : set.trials.front().epoch.length();

  const bool any = resampling || rc.enable_bandpass || rc.enable_notch;
  std::string pp_json;
  if (any) {
    nlohmann::json pp;
    if (resampling) pp["resample_hz"] = rc.resample_hz;
    if (rc.enable_bandpass)
      pp["bandpass"] = {{"low_hz", rc.bandpass_low_hz},
                        {"high_hz", rc.bandpass_high_hz},
                        {"order", rc.bandpass_order}};
    if (rc.enable_notch)
      pp["notch"] = {{"center_hz", rc.notch_hz}, {"q", rc.notch_q}};
    pp_json = pp.dump();
  }
  const fs::path manifest = fs::path(rc.output_dir) / "manifest.json";
  dataset::save_manifest(set, manifest, any ? &pp_json : nullptr);
  std::printf("preprocessed %zu trials to %g Hz, %zu samples\n",
              set.trials.size(), set.rate_hz, set.epoch_samples);
  std::printf("manifest: %s\n", manifest.string().c_str());
}

void cmd_evaluate(const RunConfig& rc) {
  const TrialSet set = dataset::load_manifest(rc.dataset);
  const pipeline::CvReport report =
      pipeline::run_cv(set, rc.folds, to_pipeline_config(rc), rc.seed, rc.jobs);

  fs::create_directories(rc.output_dir);
  const fs::path out(rc.output_dir);
  io::write_file_atomic(out / "report.json", report.to_json());
  io::write_file_atomic(out / "folds.csv", report.folds_csv());
  io::write_file_atomic(out / "trials.csv", report.trials_csv());
  std::printf("accuracy: %.2f%% ± %.2f%% (%zu folds, k=%zu, seed=%llu)\n",
              100.0 * report.mean_accuracy, 100.0 * report.std_accuracy,
              rc.folds, rc.k, static_cast<unsigned long long>(rc.seed));
}

void cmd_sweep(const RunConfig& rc, const std::vector<std::size_t>& k_values) {
  const TrialSet set = dataset::load_manifest(rc.dataset);
  const std::vector<pipeline::SweepRow> rows = pipeline::sweep_channels(
      set, k_values, rc.folds, to_pipeline_config(rc), rc.seed, rc.jobs);

  fs::create_directories(rc.output_dir);
  io::write_file_atomic(fs::path(rc.output_dir) / "sweep.csv",
                        pipeline::sweep_csv(rows));
  for (const pipeline::SweepRow& r : rows)
    std::printf("k=%2zu  accuracy %.2f%% ± %.2f%%\n", r.k,
                100.0 * r.mean_accuracy, 100.0 * r.std_accuracy);
}

int cmd_gradcheck(std::uint64_t seed, std::size_t samples, double step,
                  double tolerance, std::size_t batch_size) {
  const nnet::MlpModel model = nnet::MlpModel::create(derive_seed(seed, "model"));
  Rng rng(derive_seed(seed, "batch"));
  Matrix batch(batch_size, model.input_width());
  std::vector<int> labels(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    for (std::size_t d = 0; d < batch.cols(); ++d) batch(i, d) = rng.normal();
    labels[i] = static_cast<int>(i % 2);
  }
  nnet::GradCheckOptions opts;
  opts.sample_count = samples;
  opts.step = step;
  opts.tolerance = tolerance;
  opts.seed = seed;
  const nnet::GradCheckReport report = nnet::gradient_check(model, batch, labels, opts);
  std::printf("gradient check: max relative error %.3e over %zu parameters (tolerance %.1e): %s\n",
              report.max_rel_error, report.checked, tolerance,
              report.pass ? "pass" : "FAIL");
  if (!report.pass)
    std::printf("worst parameter: %s\n", report.worst_name.c_str());
  return report.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EEG variance-pattern trial classification toolkit"};
  app.require_subcommand(1);
  int exit_code = 0;

  // generate
  synth::SynthSpec spec;
  std::string gen_out;
  CLI::App* gen = app.add_subcommand("generate", "Create a synthetic labeled dataset");
  gen->add_option("--channels", spec.channels, "channel count");
  gen->add_option("--trials", spec.trials_per_class, "trials per class");
  gen->add_option("--epoch", spec.epoch_samples, "samples per trial");
  gen->add_option("--rate", spec.rate_hz, "sampling rate in Hz");
  gen->add_option("--pairs", spec.informative_pairs, "informative channel pairs");
  gen->add_option("--ratio", spec.variance_ratio, "class variance ratio");
  gen->add_option("--band-low", spec.band_low_hz, "signal band lower edge");
  gen->add_option("--band-high", spec.band_high_hz, "signal band upper edge");
  gen->add_option("--noise", spec.noise_sigma, "sensor noise sigma");
  CLI::Option* gen_seed = gen->add_option("--seed", spec.seed, "generator seed");
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->callback([&] {
    if (!gen_seed->count())
      if (const char* env = std::getenv("NEURODECODE_SEED"))
        spec.seed = parse_u64(env, "NEURODECODE_SEED");
    cmd_generate(spec, gen_out);
  });

  // preprocess
  CommonFlags pf;
  double pp_resample = 0.0, pp_low = 0.0, pp_high = 0.0, pp_notch = 0.0, pp_q = 0.0;
  int pp_order = 0;
  bool pp_no_resample = false, pp_no_bandpass = false, pp_no_notch = false;
  CLI::App* pre = app.add_subcommand("preprocess", "Resample, bandpass and notch every trial");
  add_common_flags(pre, pf);
  CLI::Option* o_resample = pre->add_option("--resample", pp_resample, "target rate in Hz");
  CLI::Option* o_low = pre->add_option("--bandpass-low", pp_low);
  CLI::Option* o_high = pre->add_option("--bandpass-high", pp_high);
  CLI::Option* o_order = pre->add_option("--bandpass-order", pp_order);
  CLI::Option* o_notch = pre->add_option("--notch", pp_notch, "notch center in Hz");
  CLI::Option* o_q = pre->add_option("--notch-q", pp_q, "notch quality factor");
  pre->add_flag("--no-resample", pp_no_resample);
  pre->add_flag("--no-bandpass", pp_no_bandpass);
  pre->add_flag("--no-notch", pp_no_notch);
  pre->callback([&] {
    RunConfig rc = resolve_config(pf);
    if (o_resample->count()) rc.resample_hz = pp_resample;
    if (o_low->count()) rc.bandpass_low_hz = pp_low;
    if (o_high->count()) rc.bandpass_high_hz = pp_high;
    if (o_order->count()) rc.bandpass_order = pp_order;
    if (o_notch->count()) rc.notch_hz = pp_notch;
    if (o_q->count()) rc.notch_q = pp_q;
    if (pp_no_resample) rc.enable_resample = false;
    if (pp_no_bandpass) rc.enable_bandpass = false;
    if (pp_no_notch) rc.enable_notch = false;
    cmd_preprocess(rc);
  });

  // evaluate
  CommonFlags ef;
  CLI::App* eval = app.add_subcommand("evaluate", "Cross-validated training and voting");
  add_common_flags(eval, ef);
  eval->callback([&] { cmd_evaluate(resolve_config(ef)); });

  // sweep
  CommonFlags sf;
  std::vector<std::size_t> k_values;
  std::size_t k_min = 0, k_max = 0;
  CLI::App* sweep = app.add_subcommand("sweep", "Accuracy across channel counts");
  add_common_flags(sweep, sf);
  CLI::Option* o_kvals = sweep->add_option("--k-values", k_values, "explicit k list");
  CLI::Option* o_kmin = sweep->add_option("--k-min", k_min);
  CLI::Option* o_kmax = sweep->add_option("--k-max", k_max);
  sweep->callback([&] {
    std::vector<std::size_t> ks = k_values;
    if (!o_kvals->count()) {
      if (!o_kmin->count() || !o_kmax->count() || k_min > k_max)
        throw std::invalid_argument("sweep needs --k-values or --k-min/--k-max");
      for (std::size_t k = k_min; k <= k_max; ++k) ks.push_back(k);
    }
    cmd_sweep(resolve_config(sf), ks);
  });

  // gradcheck
  std::uint64_t gc_seed = 0;
  std::size_t gc_samples = 100, gc_batch = 20;
  double gc_step = 1e-5, gc_tol = 1e-4;
  CLI::App* gc = app.add_subcommand("gradcheck", "Finite-difference gradient verification");
  CLI::Option* gc_seed_opt = gc->add_option("--seed", gc_seed);
  gc->add_option("--samples", gc_samples, "parameters to sample");
  gc->add_option("--step", gc_step, "central-difference step");
  gc->add_option("--tolerance", gc_tol, "max relative error");
  gc->add_option("--batch", gc_batch, "probe batch size");
  gc->callback([&] {
    if (!gc_seed_opt->count())
      if (const char* env = std::getenv("NEURODECODE_SEED"))
        gc_seed = parse_u64(env, "NEURODECODE_SEED");
    exit_code = cmd_gradcheck(gc_seed, gc_samples, gc_step, gc_tol, gc_batch);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return exit_code;
}
