#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "neurodecode/matrix.hpp"
#include "neurodecode/wavelet.hpp"

namespace neurodecode::nnet {

enum class Activation { Relu, Tanh };
enum class Mode { Training, Inference };

struct DenseLayer {
  Matrix w;               // [out x in]
  std::vector<double> b;  // [out]
};

struct BatchNorm {
  std::vector<double> gamma, beta, running_mean, running_var;
};

struct HiddenLayer {
  DenseLayer dense;
  BatchNorm bn;
  Activation activation = Activation::Relu;
  double dropout = 0.0;

  std::size_t width() const { return dense.w.rows(); }
};

struct MlpModel {
  std::vector<HiddenLayer> hidden;
  DenseLayer output;  // [1 x last hidden width]
  Mode mode = Mode::Inference;
  double bn_epsilon = 1e-8;
  double bn_momentum = 0.9;
  std::uint64_t init_seed = 0;

  // Default topology: input -> 4 x 40 hidden units -> 1 sigmoid output.
  // Activations relu/relu/tanh/relu, dropout 0.10/0.30/0.30/0.30.
  static MlpModel create(std::uint64_t seed, std::size_t input_width = 24);

  std::size_t input_width() const {
    return hidden.empty() ? output.w.cols() : hidden.front().dense.w.cols();
  }
  void validate() const;
  std::string to_json() const;
  static MlpModel from_json(const std::string& text);
};

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t epochs = 200;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double bn_momentum = 0.9;

  void validate() const;
};

// Fine-grained forward controls. Mode::Training maps to batch statistics +
// active dropout + running-average updates; Mode::Inference to none of them.
struct ForwardOptions {
  bool batch_stats = false;
  bool dropout = false;
  bool update_running = false;
  std::uint64_t dropout_seed = 0;

  static ForwardOptions training(std::uint64_t dropout_seed) {
    return {true, true, true, dropout_seed};
  }
  static ForwardOptions inference() { return {}; }
};

struct ForwardCache {
  struct Layer {
    Matrix input;                         // [n x in]
    std::vector<double> mean, var, istd;  // stats used for normalization
    Matrix xhat;                          // normalized pre-scale activations
    Matrix bn_out;                        // gamma * xhat + beta
    Matrix act_out;                       // after activation
    Matrix mask;                          // dropout multipliers (0 or 1/keep)
  };
  std::vector<Layer> layers;
  Matrix head_input;           // input of the output dense layer
  std::vector<double> logits;  // [n]
  std::vector<double> probs;   // [n]
  bool batch_stats = false;
};

// Returns per-sample probabilities. With opts.update_running the model's
// batchnorm running averages advance; everything else is untouched.
std::vector<double> forward(MlpModel& model, const Matrix& batch,
                            const ForwardOptions& opts,
                            ForwardCache* cache = nullptr);
std::vector<double> forward(MlpModel& model, const Matrix& batch, Mode mode);
std::vector<double> forward_inference(const MlpModel& model, const Matrix& batch);

double loss_bce(const std::vector<double>& probs, const std::vector<int>& labels);

struct Gradients {
  struct Layer {
    Matrix dw;
    std::vector<double> db, dgamma, dbeta;
  };
  std::vector<Layer> hidden;
  Matrix output_dw;
  std::vector<double> output_db;
};

// Exact gradients of loss_bce through the cached forward pass. The cache
// decides whether batch statistics are part of the differentiated graph.
Gradients backward(const MlpModel& model, const ForwardCache& cache,
                   const std::vector<int>& labels);

// Flat parameter indexing (trainable parameters only: w, b, gamma, beta per
// hidden layer, then output w, b). Used by the optimizer and the checker.
std::size_t parameter_count(const MlpModel& model);
double& parameter_at(MlpModel& model, std::size_t index);
double gradient_at(const Gradients& grads, const MlpModel& model,
                   std::size_t index);
std::string parameter_name(const MlpModel& model, std::size_t index);

MlpModel train(const MlpModel& init, const Matrix& x,
               const std::vector<int>& labels, const TrainConfig& config);
MlpModel train(const MlpModel& init,
               const std::vector<wavelet::FeatureVector>& features,
               const TrainConfig& config);

struct GradCheckOptions {
  std::size_t sample_count = 100;
  double step = 1e-5;
  double tolerance = 1e-4;
  std::uint64_t seed = 0;
  bool batch_stats = true;
  bool dropout = true;
  // Test hook: if >= 0, the analytic gradient at this flat index is doubled
  // before comparison, which a correct checker must flag.
  std::ptrdiff_t corrupt_index = -1;
};

struct GradCheckReport {
  bool pass = false;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  std::string worst_name;
  std::size_t checked = 0;
};

GradCheckReport gradient_check(const MlpModel& model, const Matrix& batch,
                               const std::vector<int>& labels,
                               const GradCheckOptions& opts);

}  // namespace neurodecode::nnet
