#include "neurodecode/nnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "neurodecode/kernels.hpp"
#include "neurodecode/rng.hpp"
#include "json.hpp"

namespace neurodecode::nnet {

namespace {

double stable_sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

DenseLayer init_dense(std::size_t out, std::size_t in, Activation act, Rng& rng) {
  // Fan-in-scaled uniform for rectifier layers, fan-sum-scaled for tanh and
  // the sigmoid head: keeps early activations in the responsive range.
  const double limit = act == Activation::Relu
                           ? std::sqrt(6.0 / static_cast<double>(in))
                           : std::sqrt(6.0 / static_cast<double>(in + out));
  DenseLayer d;
  d.w = Matrix(out, in);
  for (std::size_t i = 0; i < out * in; ++i)
    d.w.data()[i] = rng.uniform(-limit, limit);
  d.b.assign(out, 0.0);
  return d;
}

void check_labels(const std::vector<int>& labels) {
  for (int y : labels)
    if (y != 0 && y != 1)
      throw std::invalid_argument("labels must be 0 or 1");
}

// Flat layout per hidden layer: w, b, gamma, beta; then output w, b.
// resolve() maps a flat index to a pointer inside the model and, in
// parallel, inside a Gradients structure when one is given.
struct ParamRef {
  double* value = nullptr;
  const double* grad = nullptr;
  std::string name;
};

ParamRef resolve(MlpModel& model, const Gradients* grads, std::size_t index,
                 bool want_name) {
  char buf[64];
  std::size_t at = index;
  for (std::size_t li = 0; li < model.hidden.size(); ++li) {
    HiddenLayer& h = model.hidden[li];
    const Gradients::Layer* gl = grads ? &grads->hidden[li] : nullptr;
    const std::size_t wn = h.dense.w.rows() * h.dense.w.cols();
    const std::size_t width = h.width();
    if (at < wn) {
      ParamRef r{&h.dense.w.data()[at], gl ? &gl->dw.data()[at] : nullptr, {}};
      if (want_name) {
        std::snprintf(buf, sizeof buf, "hidden%zu.w[%zu][%zu]", li + 1,
                      at / h.dense.w.cols(), at % h.dense.w.cols());
        r.name = buf;
      }
      return r;
    }
    at -= wn;
    if (at < width) {
      ParamRef r{&h.dense.b[at], gl ? &gl->db[at] : nullptr, {}};
      if (want_name) {
        std::snprintf(buf, sizeof buf, "hidden%zu.b[%zu]", li + 1, at);
        r.name = buf;
      }
      return r;
    }
    at -= width;
    if (at < width) {
      ParamRef r{&h.bn.gamma[at], gl ? &gl->dgamma[at] : nullptr, {}};
      if (want_name) {
        std::snprintf(buf, sizeof buf, "hidden%zu.gamma[%zu]", li + 1, at);
        r.name = buf;
      }
      return r;
    }
    at -= width;
    if (at < width) {
      ParamRef r{&h.bn.beta[at], gl ? &gl->dbeta[at] : nullptr, {}};
      if (want_name) {
        std::snprintf(buf, sizeof buf, "hidden%zu.beta[%zu]", li + 1, at);
        r.name = buf;
      }
      return r;
    }
    at -= width;
  }
  const std::size_t own = model.output.w.rows() * model.output.w.cols();
  if (at < own) {
    ParamRef r{&model.output.w.data()[at],
               grads ? &grads->output_dw.data()[at] : nullptr, {}};
    if (want_name) {
      std::snprintf(buf, sizeof buf, "output.w[%zu][%zu]",
                    at / model.output.w.cols(), at % model.output.w.cols());
      r.name = buf;
    }
    return r;
  }
  at -= own;
  if (at < model.output.b.size()) {
    ParamRef r{&model.output.b[at], grads ? &grads->output_db[at] : nullptr, {}};
    if (want_name) {
      std::snprintf(buf, sizeof buf, "output.b[%zu]", at);
      r.name = buf;
    }
    return r;
  }
  throw std::out_of_range("parameter index out of range");
}

}  // namespace

MlpModel MlpModel::create(std::uint64_t seed, std::size_t input_width) {
  if (input_width == 0) throw std::invalid_argument("input width must be positive");
  constexpr std::size_t kWidth = 40;
  const Activation acts[4] = {Activation::Relu, Activation::Relu,
                              Activation::Tanh, Activation::Relu};
  const double drops[4] = {0.10, 0.30, 0.30, 0.30};

  MlpModel m;
  m.init_seed = seed;
  Rng rng(derive_seed(seed, "init"));
  std::size_t in = input_width;
  for (int h = 0; h < 4; ++h) {
    HiddenLayer layer;
    layer.activation = acts[h];
    layer.dropout = drops[h];
    layer.dense = init_dense(kWidth, in, acts[h], rng);
    layer.bn.gamma.assign(kWidth, 1.0);
    layer.bn.beta.assign(kWidth, 0.0);
    layer.bn.running_mean.assign(kWidth, 0.0);
    layer.bn.running_var.assign(kWidth, 1.0);
    m.hidden.push_back(std::move(layer));
    in = kWidth;
  }
  m.output = init_dense(1, in, Activation::Tanh, rng);
  m.mode = Mode::Inference;
  return m;
}

void MlpModel::validate() const {
  std::size_t in = input_width();
  for (std::size_t li = 0; li < hidden.size(); ++li) {
    const HiddenLayer& h = hidden[li];
    const std::size_t width = h.width();
    if (h.dense.w.cols() != in)
      throw std::invalid_argument("hidden layer width chain broken");
    if (h.dense.b.size() != width || h.bn.gamma.size() != width ||
        h.bn.beta.size() != width || h.bn.running_mean.size() != width ||
        h.bn.running_var.size() != width)
      throw std::invalid_argument("hidden layer vector sizes inconsistent");
    if (!(h.dropout >= 0.0 && h.dropout < 1.0))
      throw std::invalid_argument("dropout ratio must be in [0, 1)");
    for (double v : h.bn.running_var)
      if (!(v > 0.0))
        throw std::invalid_argument("running variance must stay positive");
    in = width;
  }
  if (output.w.rows() != 1 || output.w.cols() != in || output.b.size() != 1)
    throw std::invalid_argument("output layer shape mismatch");
  if (!(bn_epsilon > 0.0) || !(bn_momentum > 0.0 && bn_momentum < 1.0))
    throw std::invalid_argument("batchnorm constants out of range");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (batch_size < 2) throw std::invalid_argument("batch size must be >= 2");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw std::invalid_argument("moment decay rates must be in [0, 1)");
  if (!(adam_epsilon > 0.0)) throw std::invalid_argument("optimizer epsilon must be positive");
  if (!(bn_momentum > 0.0 && bn_momentum < 1.0))
    throw std::invalid_argument("batchnorm momentum must be in (0, 1)");
}

std::vector<double> forward(MlpModel& model, const Matrix& batch,
                            const ForwardOptions& opts, ForwardCache* cache) {
  if (batch.cols() != model.input_width())
    throw std::invalid_argument("forward: input width mismatch");
  if (!batch.all_finite())
    throw std::invalid_argument("forward: non-finite input");
  const std::size_t n = batch.rows();
  if (opts.batch_stats && n < 2)
    throw std::invalid_argument("forward: batch statistics need >= 2 samples");

  Rng mask_rng(opts.dropout_seed);
  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c.layers.assign(model.hidden.size(), {});
  c.batch_stats = opts.batch_stats;

  Matrix x = batch;
  for (std::size_t li = 0; li < model.hidden.size(); ++li) {
    HiddenLayer& h = model.hidden[li];
    ForwardCache::Layer& lc = c.layers[li];
    const std::size_t width = h.width();
    lc.input = std::move(x);

    Matrix z(n, width);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t o = 0; o < width; ++o)
        z(i, o) = kernels::dot(h.dense.w.row(o), lc.input.row(i),
                               lc.input.cols()) +
                  h.dense.b[o];

    lc.mean.assign(width, 0.0);
    lc.var.assign(width, 0.0);
    lc.istd.assign(width, 0.0);
    if (opts.batch_stats) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t o = 0; o < width; ++o) lc.mean[o] += z(i, o);
      for (std::size_t o = 0; o < width; ++o) lc.mean[o] /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t o = 0; o < width; ++o) {
          const double d = z(i, o) - lc.mean[o];
          lc.var[o] += d * d;
        }
      for (std::size_t o = 0; o < width; ++o) lc.var[o] /= static_cast<double>(n);
      if (opts.update_running)
        for (std::size_t o = 0; o < width; ++o) {
          h.bn.running_mean[o] = model.bn_momentum * h.bn.running_mean[o] +
                                 (1.0 - model.bn_momentum) * lc.mean[o];
          h.bn.running_var[o] = model.bn_momentum * h.bn.running_var[o] +
                                (1.0 - model.bn_momentum) * lc.var[o];
        }
    } else {
      lc.mean = h.bn.running_mean;
      lc.var = h.bn.running_var;
    }
    for (std::size_t o = 0; o < width; ++o)
      lc.istd[o] = 1.0 / std::sqrt(lc.var[o] + model.bn_epsilon);

    lc.xhat = Matrix(n, width);
    lc.bn_out = Matrix(n, width);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t o = 0; o < width; ++o) {
        const double xh = (z(i, o) - lc.mean[o]) * lc.istd[o];
        lc.xhat(i, o) = xh;
        lc.bn_out(i, o) = h.bn.gamma[o] * xh + h.bn.beta[o];
      }

    lc.act_out = Matrix(n, width);
    if (h.activation == Activation::Relu) {
      for (std::size_t i = 0; i < n * width; ++i)
        lc.act_out.data()[i] = std::max(0.0, lc.bn_out.data()[i]);
    } else {
      for (std::size_t i = 0; i < n * width; ++i)
        lc.act_out.data()[i] = std::tanh(lc.bn_out.data()[i]);
    }

    if (opts.dropout && h.dropout > 0.0) {
      const double keep = 1.0 - h.dropout;
      lc.mask = Matrix(n, width);
      x = Matrix(n, width);
      for (std::size_t i = 0; i < n * width; ++i) {
        const double m = mask_rng.uniform() < keep ? 1.0 / keep : 0.0;
        lc.mask.data()[i] = m;
        x.data()[i] = lc.act_out.data()[i] * m;
      }
    } else {
      lc.mask = Matrix();
      x = lc.act_out;
    }
  }

  c.head_input = std::move(x);
  c.logits.resize(n);
  c.probs.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    c.logits[i] = kernels::dot(model.output.w.row(0), c.head_input.row(i),
                               c.head_input.cols()) +
                  model.output.b[0];
    c.probs[i] = stable_sigmoid(c.logits[i]);
  }
  return c.probs;
}

std::vector<double> forward(MlpModel& model, const Matrix& batch, Mode mode) {
  if (mode == Mode::Training)
    return forward(model, batch,
                   ForwardOptions::training(derive_seed(model.init_seed, "mask")));
  return forward(model, batch, ForwardOptions::inference());
}

std::vector<double> forward_inference(const MlpModel& model, const Matrix& batch) {
  // Inference never mutates; the const_cast is safe because
  // ForwardOptions::inference() disables every writing path.
  return forward(const_cast<MlpModel&>(model), batch, ForwardOptions::inference());
}

double loss_bce(const std::vector<double>& probs, const std::vector<int>& labels) {
  if (probs.size() != labels.size() || probs.empty())
    throw std::invalid_argument("loss: size mismatch");
  check_labels(labels);
  double loss = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = std::clamp(probs[i], 1e-12, 1.0 - 1e-12);
    loss -= labels[i] == 1 ? std::log(p) : std::log(1.0 - p);
  }
  return loss / static_cast<double>(probs.size());
}

Gradients backward(const MlpModel& model, const ForwardCache& cache,
                   const std::vector<int>& labels) {
  const std::size_t n = cache.probs.size();
  if (n == 0 || cache.layers.size() != model.hidden.size())
    throw std::invalid_argument("backward: stale or missing forward cache");
  if (labels.size() != n)
    throw std::invalid_argument("backward: label count mismatch");
  check_labels(labels);

  Gradients g;
  g.hidden.resize(model.hidden.size());

  // d loss / d logit for sigmoid + cross-entropy.
  std::vector<double> dlogit(n);
  for (std::size_t i = 0; i < n; ++i)
    dlogit[i] = (cache.probs[i] - static_cast<double>(labels[i])) /
                static_cast<double>(n);

  const std::size_t head_width = cache.head_input.cols();
  g.output_dw = Matrix(1, head_width);
  g.output_db.assign(1, 0.0);
  Matrix dx(n, head_width);
  for (std::size_t i = 0; i < n; ++i) {
    kernels::axpy(dlogit[i], cache.head_input.row(i), g.output_dw.row(0),
                  head_width);
    g.output_db[0] += dlogit[i];
    kernels::axpy(dlogit[i], model.output.w.row(0), dx.row(i), head_width);
  }

  for (std::size_t li = model.hidden.size(); li-- > 0;) {
    const HiddenLayer& h = model.hidden[li];
    const ForwardCache::Layer& lc = cache.layers[li];
    const std::size_t width = h.width();
    Gradients::Layer& gl = g.hidden[li];

    if (!lc.mask.empty())
      for (std::size_t i = 0; i < n * width; ++i)
        dx.data()[i] *= lc.mask.data()[i];

    if (h.activation == Activation::Relu) {
      for (std::size_t i = 0; i < n * width; ++i)
        if (lc.bn_out.data()[i] <= 0.0) dx.data()[i] = 0.0;
    } else {
      for (std::size_t i = 0; i < n * width; ++i) {
        const double a = lc.act_out.data()[i];
        dx.data()[i] *= 1.0 - a * a;
      }
    }

    gl.dgamma.assign(width, 0.0);
    gl.dbeta.assign(width, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t o = 0; o < width; ++o) {
        gl.dgamma[o] += dx(i, o) * lc.xhat(i, o);
        gl.dbeta[o] += dx(i, o);
      }

    // dx currently holds d loss / d bn_out; fold in gamma to get d/d xhat.
    Matrix dz(n, width);
    if (cache.batch_stats) {
      std::vector<double> sum_dxh(width, 0.0), sum_dxh_xh(width, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t o = 0; o < width; ++o) {
          const double dxh = dx(i, o) * h.bn.gamma[o];
          sum_dxh[o] += dxh;
          sum_dxh_xh[o] += dxh * lc.xhat(i, o);
        }
      const double dn = static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t o = 0; o < width; ++o) {
          const double dxh = dx(i, o) * h.bn.gamma[o];
          dz(i, o) = lc.istd[o] / dn *
                     (dn * dxh - sum_dxh[o] - lc.xhat(i, o) * sum_dxh_xh[o]);
        }
    } else {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t o = 0; o < width; ++o)
          dz(i, o) = dx(i, o) * h.bn.gamma[o] * lc.istd[o];
    }

    const std::size_t in_width = lc.input.cols();
    gl.dw = Matrix(width, in_width);
    gl.db.assign(width, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t o = 0; o < width; ++o) {
        kernels::axpy(dz(i, o), lc.input.row(i), gl.dw.row(o), in_width);
        gl.db[o] += dz(i, o);
      }

    Matrix dprev(n, in_width);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t o = 0; o < width; ++o)
        kernels::axpy(dz(i, o), h.dense.w.row(o), dprev.row(i), in_width);
    dx = std::move(dprev);
  }
  return g;
}

std::size_t parameter_count(const MlpModel& model) {
  std::size_t count = 0;
  for (const HiddenLayer& h : model.hidden)
    count += h.dense.w.rows() * h.dense.w.cols() + 3 * h.width();
  count += model.output.w.rows() * model.output.w.cols() + model.output.b.size();
  return count;
}

double& parameter_at(MlpModel& model, std::size_t index) {
  return *resolve(model, nullptr, index, false).value;
}

double gradient_at(const Gradients& grads, const MlpModel& model,
                   std::size_t index) {
  return *resolve(const_cast<MlpModel&>(model), &grads, index, false).grad;
}

std::string parameter_name(const MlpModel& model, std::size_t index) {
  return resolve(const_cast<MlpModel&>(model), nullptr, index, true).name;
}

MlpModel train(const MlpModel& init, const Matrix& x,
               const std::vector<int>& labels, const TrainConfig& config) {
  config.validate();
  init.validate();
  const std::size_t n = x.rows();
  if (n != labels.size()) throw std::invalid_argument("train: label count mismatch");
  check_labels(labels);
  const std::size_t ones = static_cast<std::size_t>(
      std::count(labels.begin(), labels.end(), 1));
  if (ones == 0 || ones == n)
    throw std::invalid_argument("train: single-class training set");

  MlpModel model = init;
  model.mode = Mode::Training;
  if (config.epochs > 0) model.bn_momentum = config.bn_momentum;

  const std::size_t pc = parameter_count(model);
  std::vector<double> m1(pc, 0.0), m2(pc, 0.0);
  std::uint64_t step = 0;

  Rng order_rng(derive_seed(config.seed, "shuffle"));
  const std::uint64_t mask_base = derive_seed(config.seed, "dropout");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  Matrix xb;
  std::vector<int> yb;
  ForwardCache cache;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    order_rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t bs = std::min(config.batch_size, n - start);
      if (bs < 2) continue;  // batch statistics need at least two samples
      xb = Matrix(bs, x.cols());
      yb.resize(bs);
      for (std::size_t i = 0; i < bs; ++i) {
        const std::size_t src = order[start + i];
        std::copy(x.row(src), x.row(src) + x.cols(), xb.row(i));
        yb[i] = labels[src];
      }
      ForwardOptions opts = ForwardOptions::training(derive_seed(mask_base, step));
      forward(model, xb, opts, &cache);
      const Gradients grads = backward(model, cache, yb);

      ++step;
      const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      for (std::size_t p = 0; p < pc; ++p) {
        const double g = gradient_at(grads, model, p);
        m1[p] = config.beta1 * m1[p] + (1.0 - config.beta1) * g;
        m2[p] = config.beta2 * m2[p] + (1.0 - config.beta2) * g * g;
        parameter_at(model, p) -=
            config.learning_rate * (m1[p] / bc1) / (std::sqrt(m2[p] / bc2) + config.adam_epsilon);
      }
    }
  }
  model.mode = Mode::Inference;
  return model;
}

MlpModel train(const MlpModel& init,
               const std::vector<wavelet::FeatureVector>& features,
               const TrainConfig& config) {
  if (features.empty()) throw std::invalid_argument("train: no features");
  Matrix x(features.size(), features.front().values.size());
  std::vector<int> labels(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    std::copy(features[i].values.begin(), features[i].values.end(), x.row(i));
    labels[i] = features[i].label;
  }
  return train(init, x, labels, config);
}

GradCheckReport gradient_check(const MlpModel& model, const Matrix& batch,
                               const std::vector<int>& labels,
                               const GradCheckOptions& opts) {
  MlpModel work = model;
  ForwardOptions fo;
  fo.batch_stats = opts.batch_stats;
  fo.dropout = opts.dropout;
  fo.update_running = false;
  fo.dropout_seed = derive_seed(opts.seed, "gradcheck.mask");

  ForwardCache cache;
  forward(work, batch, fo, &cache);
  const Gradients grads = backward(work, cache, labels);

  const std::size_t pc = parameter_count(work);
  std::vector<std::size_t> all(pc);
  std::iota(all.begin(), all.end(), std::size_t{0});
  Rng pick(derive_seed(opts.seed, "gradcheck.pick"));
  pick.shuffle(all);
  const std::size_t count = std::min(opts.sample_count, pc);
  all.resize(count);
  if (opts.corrupt_index >= 0) {
    const auto target = static_cast<std::size_t>(opts.corrupt_index);
    if (target >= pc) throw std::out_of_range("corrupt index out of range");
    if (std::find(all.begin(), all.end(), target) == all.end()) all[0] = target;
  }

  GradCheckReport rep;
  rep.checked = count;
  for (std::size_t idx : all) {
    double analytic = gradient_at(grads, work, idx);
    if (opts.corrupt_index >= 0 &&
        static_cast<std::size_t>(opts.corrupt_index) == idx)
      analytic *= 2.0;

    double& param = parameter_at(work, idx);
    const double original = param;
    param = original + opts.step;
    const double lp = loss_bce(forward(work, batch, fo), labels);
    param = original - opts.step;
    const double lm = loss_bce(forward(work, batch, fo), labels);
    param = original;

    const double fd = (lp - lm) / (2.0 * opts.step);
    const double rel = std::abs(fd - analytic) /
                       std::max(1e-6, std::abs(fd) + std::abs(analytic));
    if (rel >= rep.max_rel_error) {
      rep.max_rel_error = rel;
      rep.worst_index = idx;
      rep.worst_name = parameter_name(work, idx);
    }
  }
  rep.pass = rep.max_rel_error <= opts.tolerance;
  return rep;
}

namespace {

nlohmann::json dense_to_json(const DenseLayer& d) {
  nlohmann::json j;
  j["out"] = d.w.rows();
  j["in"] = d.w.cols();
  j["w"] = std::vector<double>(d.w.data(), d.w.data() + d.w.rows() * d.w.cols());
  j["b"] = d.b;
  return j;
}

DenseLayer dense_from_json(const nlohmann::json& j) {
  DenseLayer d;
  const auto out = j.at("out").get<std::size_t>();
  const auto in = j.at("in").get<std::size_t>();
  const auto w = j.at("w").get<std::vector<double>>();
  if (w.size() != out * in) throw std::invalid_argument("dense weight size mismatch");
  d.w = Matrix(out, in);
  std::copy(w.begin(), w.end(), d.w.data());
  d.b = j.at("b").get<std::vector<double>>();
  if (d.b.size() != out) throw std::invalid_argument("dense bias size mismatch");
  return d;
}

}  // namespace

std::string MlpModel::to_json() const {
  nlohmann::json j;
  j["input_width"] = input_width();
  j["bn_epsilon"] = bn_epsilon;
  j["bn_momentum"] = bn_momentum;
  j["init_seed"] = init_seed;
  j["mode"] = mode == Mode::Training ? "training" : "inference";
  auto layers = nlohmann::json::array();
  for (const HiddenLayer& h : hidden) {
    nlohmann::json lj = dense_to_json(h.dense);
    lj["activation"] = h.activation == Activation::Relu ? "relu" : "tanh";
    lj["dropout"] = h.dropout;
    lj["gamma"] = h.bn.gamma;
    lj["beta"] = h.bn.beta;
    lj["running_mean"] = h.bn.running_mean;
    lj["running_var"] = h.bn.running_var;
    layers.push_back(std::move(lj));
  }
  j["hidden"] = std::move(layers);
  j["output"] = dense_to_json(output);
  return j.dump(2) + "\n";
}

MlpModel MlpModel::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  MlpModel m;
  m.bn_epsilon = j.at("bn_epsilon").get<double>();
  m.bn_momentum = j.at("bn_momentum").get<double>();
  m.init_seed = j.at("init_seed").get<std::uint64_t>();
  m.mode = j.at("mode").get<std::string>() == "training" ? Mode::Training
                                                         : Mode::Inference;
  for (const nlohmann::json& lj : j.at("hidden")) {
    HiddenLayer h;
    h.dense = dense_from_json(lj);
    h.activation = lj.at("activation").get<std::string>() == "tanh"
                       ? Activation::Tanh
                       : Activation::Relu;
    h.dropout = lj.at("dropout").get<double>();
    h.bn.gamma = lj.at("gamma").get<std::vector<double>>();
    h.bn.beta = lj.at("beta").get<std::vector<double>>();
    h.bn.running_mean = lj.at("running_mean").get<std::vector<double>>();
    h.bn.running_var = lj.at("running_var").get<std::vector<double>>();
    m.hidden.push_back(std::move(h));
  }
  m.output = dense_from_json(j.at("output"));
  m.validate();
  return m;
}

}  // namespace neurodecode::nnet
