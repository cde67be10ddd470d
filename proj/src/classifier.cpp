#include "fallsynth/classifier.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>

#include "fallsynth/error.hpp"
#include "fallsynth/ingest.hpp"
#include "fallsynth/rng.hpp"

namespace fallsynth {
namespace {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using RowVec = Eigen::Matrix<T, 1, Eigen::Dynamic>;
template <typename T>
using ConstMatMap = Eigen::Map<const Mat<T>>;
template <typename T>
using MatMap = Eigen::Map<Mat<T>>;
template <typename T>
using ConstRowMap = Eigen::Map<const RowVec<T>>;
template <typename T>
using RowMap = Eigen::Map<RowVec<T>>;

template <typename T>
void require_finite(const Eigen::Ref<const Mat<T>>& m, const char* layer) {
  if (!m.allFinite()) throw NumericError(std::string("non-finite values in layer ") + layer);
}

// Activations kept for backpropagation.
template <typename T>
struct Cache {
  std::vector<Mat<T>> inputs;  // per step, B x input
  std::vector<Mat<T>> gates;   // per step, B x 4H, activated (i, f, g, o)
  std::vector<Mat<T>> cell;    // steps + 1 entries, cell[0] = 0
  std::vector<Mat<T>> hidden;  // steps + 1 entries, hidden[0] = 0
  std::vector<Mat<T>> tanh_cell;
  Mat<T> z1;    // dense1 pre-activation
  Mat<T> xhat;  // normalized ReLU output
  RowVec<T> inv_std;
  Mat<T> bn;               // BN output
  std::vector<T> raw;      // unclamped sigmoid output
  std::vector<T> clamped;  // returned probabilities
};

// Owned, aligned copies of the parameters. Eigen picks its kernels by pointer
// alignment, so mapping std::vector storage directly would make the rounding
// depend on where the allocator put the buffer.
template <typename T>
struct Views {
  Mat<T> wx, wh, w1;
  RowVec<T> bg, b1, gamma, beta, w2;
  T b2;
};

template <typename T>
Views<T> views(const ModelParams<T>& m) {
  const auto& s = m.shape;
  const std::size_t g = 4 * s.hidden;
  auto ptr = [&](Tensor t) { return m.tensor(t).data(); };
  return Views<T>{
      ConstMatMap<T>(ptr(Tensor::GateInputWeights), g, s.input),
      ConstMatMap<T>(ptr(Tensor::GateRecurrentWeights), g, s.hidden),
      ConstMatMap<T>(ptr(Tensor::Dense1Weights), s.dense, s.hidden),
      ConstRowMap<T>(ptr(Tensor::GateBias), g),
      ConstRowMap<T>(ptr(Tensor::Dense1Bias), s.dense),
      ConstRowMap<T>(ptr(Tensor::BnGamma), s.dense),
      ConstRowMap<T>(ptr(Tensor::BnBeta), s.dense),
      ConstRowMap<T>(ptr(Tensor::Dense2Weights), s.dense),
      *ptr(Tensor::Dense2Bias),
  };
}

template <typename T>
void check_batch(const ModelParams<T>& model, const Batch<T>& batch) {
  if (batch.batch == 0 || batch.steps == 0) throw EmptyInputError("forward: empty batch");
  if (batch.input != model.shape.input) {
    throw ShapeError("forward: batch has " + std::to_string(batch.input) +
                     " input channels, model expects " + std::to_string(model.shape.input));
  }
  if (batch.values.size() != batch.batch * batch.steps * batch.input) {
    throw ShapeError("forward: batch buffer size mismatch");
  }
}

template <typename T>
void run_forward(const ModelParams<T>& model, const Batch<T>& batch, Mode mode, Cache<T>& cache,
                 ModelParams<T>* running_update) {
  check_batch(model, batch);
  const auto v = views(model);
  const std::size_t B = batch.batch;
  const std::size_t H = model.shape.hidden;
  const std::size_t D = model.shape.dense;
  const auto Bi = static_cast<Eigen::Index>(B);
  const auto Hi = static_cast<Eigen::Index>(H);

  cache.inputs.resize(batch.steps);
  cache.gates.resize(batch.steps);
  cache.tanh_cell.resize(batch.steps);
  cache.cell.assign(batch.steps + 1, Mat<T>::Zero(Bi, Hi));
  cache.hidden.assign(batch.steps + 1, Mat<T>::Zero(Bi, Hi));

  for (std::size_t t = 0; t < batch.steps; ++t) {
    Mat<T>& x = cache.inputs[t];
    x = ConstMatMap<T>(batch.values.data() + t * B * batch.input, Bi,
                       static_cast<Eigen::Index>(batch.input));
    Mat<T>& a = cache.gates[t];
    a.noalias() = x * v.wx.transpose();
    a.noalias() += cache.hidden[t] * v.wh.transpose();
    a.rowwise() += v.bg;

    auto i_blk = a.leftCols(Hi);
    auto f_blk = a.middleCols(Hi, Hi);
    auto g_blk = a.middleCols(2 * Hi, Hi);
    auto o_blk = a.rightCols(Hi);
    i_blk = (T(1) + (-i_blk.array()).exp()).inverse().matrix();
    f_blk = (T(1) + (-f_blk.array()).exp()).inverse().matrix();
    g_blk = g_blk.array().tanh().matrix();
    o_blk = (T(1) + (-o_blk.array()).exp()).inverse().matrix();

    cache.cell[t + 1] =
        (f_blk.array() * cache.cell[t].array() + i_blk.array() * g_blk.array()).matrix();
    cache.tanh_cell[t] = cache.cell[t + 1].array().tanh().matrix();
    cache.hidden[t + 1] = (o_blk.array() * cache.tanh_cell[t].array()).matrix();
  }
  const Mat<T>& last = cache.hidden[batch.steps];
  require_finite<T>(last, "lstm");

  cache.z1.noalias() = last * v.w1.transpose();
  cache.z1.rowwise() += v.b1;
  require_finite<T>(cache.z1, "dense1");
  Mat<T> relu = cache.z1.cwiseMax(T(0));

  RowVec<T> mu(static_cast<Eigen::Index>(D));
  RowVec<T> var(static_cast<Eigen::Index>(D));
  if (mode == Mode::Train) {
    mu = relu.colwise().mean();
    var = (relu.rowwise() - mu).array().square().matrix().colwise().mean();
  } else {
    mu = ConstRowMap<T>(model.running_mean.data(), static_cast<Eigen::Index>(D));
    var = ConstRowMap<T>(model.running_var.data(), static_cast<Eigen::Index>(D));
  }
  cache.inv_std = (var.array() + T(kBnEpsilon)).rsqrt().matrix();
  cache.xhat = ((relu.rowwise() - mu).array().rowwise() * cache.inv_std.array()).matrix();
  cache.bn = ((cache.xhat.array().rowwise() * v.gamma.array()).rowwise() + v.beta.array()).matrix();
  require_finite<T>(cache.bn, "batchnorm");

  const RowVec<T> z2 = (cache.bn * v.w2.transpose()).transpose().array() + v.b2;
  cache.raw.resize(B);
  cache.clamped.resize(B);
  const T lo = T(kProbabilityClamp);
  const T hi = T(1) - T(kProbabilityClamp);
  for (std::size_t b = 0; b < B; ++b) {
    const T z = z2(static_cast<Eigen::Index>(b));
    if (!std::isfinite(z)) throw NumericError("non-finite values in layer dense2");
    const T p = z >= T(0) ? T(1) / (T(1) + std::exp(-z)) : std::exp(z) / (T(1) + std::exp(z));
    cache.raw[b] = p;
    cache.clamped[b] = std::clamp(p, lo, hi);
  }

  if (mode == Mode::Train && running_update != nullptr) {
    const T mom = T(kBnMomentum);
    for (std::size_t d = 0; d < D; ++d) {
      const auto di = static_cast<Eigen::Index>(d);
      const T rm = mom * model.running_mean[d] + (T(1) - mom) * mu(di);
      const T rv = mom * model.running_var[d] + (T(1) - mom) * var(di);
      running_update->running_mean[d] = rm;
      running_update->running_var[d] = rv;
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------

std::array<TensorInfo, kTensorCount> tensor_layout(const ModelShape& s) {
  const std::size_t g = 4 * s.hidden;
  std::array<TensorInfo, kTensorCount> out{{
      {"gate_input_weights", 0, g, s.input},
      {"gate_recurrent_weights", 0, g, s.hidden},
      {"gate_bias", 0, 1, g},
      {"dense1_weights", 0, s.dense, s.hidden},
      {"dense1_bias", 0, 1, s.dense},
      {"bn_gamma", 0, 1, s.dense},
      {"bn_beta", 0, 1, s.dense},
      {"dense2_weights", 0, 1, s.dense},
      {"dense2_bias", 0, 1, 1},
  }};
  std::size_t offset = 0;
  for (auto& info : out) {
    info.offset = offset;
    offset += info.size();
  }
  return out;
}

template <typename T>
ModelParams<T>::ModelParams(ModelShape s) : shape(s) {
  if (s.input == 0 || s.hidden == 0 || s.dense == 0) throw ConfigError("model sizes must be >= 1");
  const auto layout = tensor_layout(s);
  weights.assign(layout.back().offset + layout.back().size(), T(0));
  running_mean.assign(s.dense, T(0));
  running_var.assign(s.dense, T(1));
}

template <typename T>
std::span<T> ModelParams<T>::tensor(Tensor t) {
  const auto info = tensor_layout(shape)[static_cast<std::size_t>(t)];
  return std::span<T>(weights).subspan(info.offset, info.size());
}

template <typename T>
std::span<const T> ModelParams<T>::tensor(Tensor t) const {
  const auto info = tensor_layout(shape)[static_cast<std::size_t>(t)];
  return std::span<const T>(weights).subspan(info.offset, info.size());
}

template <typename T>
ModelParams<T> init_model(std::uint64_t seed, const ModelShape& shape) {
  ModelParams<T> m(shape);
  Rng rng(seed);
  auto fill = [&](Tensor t, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (T& w : m.tensor(t)) {
      // Round toward zero so the float value never exceeds the bound.
      const double u = rng.uniform(-bound, bound);
      T value = static_cast<T>(u);
      if (std::abs(static_cast<double>(value)) > bound) {
        value = std::nextafter(value, T(0));
      }
      w = value;
    }
  };
  fill(Tensor::GateInputWeights, shape.input + shape.hidden);
  fill(Tensor::GateRecurrentWeights, shape.input + shape.hidden);
  fill(Tensor::Dense1Weights, shape.hidden);
  fill(Tensor::Dense2Weights, shape.dense);

  auto bias = m.tensor(Tensor::GateBias);
  std::fill(bias.begin() + static_cast<std::ptrdiff_t>(shape.hidden),
            bias.begin() + static_cast<std::ptrdiff_t>(2 * shape.hidden), T(1));
  auto gamma = m.tensor(Tensor::BnGamma);
  std::fill(gamma.begin(), gamma.end(), T(1));
  return m;
}

template <typename T>
Batch<T> make_batch(std::span<const Window> windows, std::span<const std::size_t> indices) {
  Batch<T> b;
  if (indices.empty()) return b;
  b.batch = indices.size();
  b.steps = windows[indices.front()].length();
  b.input = kAxes;
  b.values.resize(b.batch * b.steps * b.input);
  for (std::size_t bi = 0; bi < b.batch; ++bi) {
    const Window& w = windows[indices[bi]];
    if (w.length() != b.steps || w.values.size() != b.steps * kAxes) {
      throw ShapeError("batch windows differ in length");
    }
    for (std::size_t t = 0; t < b.steps; ++t) {
      for (std::size_t k = 0; k < kAxes; ++k) {
        b.values[(t * b.batch + bi) * b.input + k] = static_cast<T>(w.values[t * kAxes + k]);
      }
    }
  }
  return b;
}

template <typename T>
Batch<T> make_batch(std::span<const Window> windows) {
  std::vector<std::size_t> idx(windows.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return make_batch<T>(windows, idx);
}

template <typename T>
std::vector<T> forward(const ModelParams<T>& model, const Batch<T>& batch, Mode mode,
                       ModelParams<T>* running_update) {
  Cache<T> cache;
  run_forward(model, batch, mode, cache, running_update);
  return std::move(cache.clamped);
}

template <typename T>
T bce_loss(std::span<const T> probabilities, std::span<const int> labels) {
  if (probabilities.size() != labels.size() || labels.empty()) {
    throw DataError("loss: probabilities and labels differ in length");
  }
  const T lo = T(kProbabilityClamp);
  const T hi = T(1) - T(kProbabilityClamp);
  double sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const T p = std::clamp(probabilities[i], lo, hi);
    sum -= labels[i] == 1 ? std::log(static_cast<double>(p)) : std::log1p(-static_cast<double>(p));
  }
  return static_cast<T>(sum / static_cast<double>(labels.size()));
}

template <typename T>
LossAndGradients<T> loss_and_gradients(const ModelParams<T>& model, const Batch<T>& batch,
                                       std::span<const int> labels,
                                       ModelParams<T>* running_update) {
  if (labels.size() != batch.batch) throw DataError("loss: label count differs from batch size");
  for (int y : labels) {
    if (y != 0 && y != 1) throw DataError("loss: labels must be 0 or 1");
  }

  Cache<T> cache;
  run_forward(model, batch, Mode::Train, cache, running_update);

  LossAndGradients<T> out;
  out.loss = bce_loss<T>(cache.clamped, labels);
  out.gradients.assign(model.weights.size(), T(0));

  const auto v = views(model);
  const std::size_t B = batch.batch;
  const auto Bi = static_cast<Eigen::Index>(B);
  const auto Hi = static_cast<Eigen::Index>(model.shape.hidden);
  const auto Di = static_cast<Eigen::Index>(model.shape.dense);
  const auto Gi = 4 * Hi;
  const auto layout = tensor_layout(model.shape);
  auto grad_ptr = [&](Tensor t) {
    return out.gradients.data() + layout[static_cast<std::size_t>(t)].offset;
  };

  // dL/dz2 through the clamp and the sigmoid.
  const T lo = T(kProbabilityClamp);
  const T hi = T(1) - T(kProbabilityClamp);
  Eigen::Matrix<T, Eigen::Dynamic, 1> dz2(Bi);
  for (std::size_t b = 0; b < B; ++b) {
    const T p = cache.raw[b];
    const T pc = cache.clamped[b];
    const T y = static_cast<T>(labels[b]);
    const T dpc = (-y / pc + (T(1) - y) / (T(1) - pc)) / static_cast<T>(B);
    const bool inside = p > lo && p < hi;
    dz2(static_cast<Eigen::Index>(b)) = inside ? dpc * p * (T(1) - p) : T(0);
  }

  const RowVec<T> dw2 = dz2.transpose() * cache.bn;
  RowMap<T>(grad_ptr(Tensor::Dense2Weights), Di) = dw2;
  *grad_ptr(Tensor::Dense2Bias) = dz2.sum();

  const Mat<T> dbn = dz2 * v.w2;
  const RowVec<T> dgamma = (dbn.array() * cache.xhat.array()).matrix().colwise().sum();
  const RowVec<T> dbeta = dbn.colwise().sum();
  RowMap<T>(grad_ptr(Tensor::BnGamma), Di) = dgamma;
  RowMap<T>(grad_ptr(Tensor::BnBeta), Di) = dbeta;

  // Batch-statistics BN backward (biased variance).
  const Mat<T> dxhat = (dbn.array().rowwise() * v.gamma.array()).matrix();
  const RowVec<T> sum_dxhat = dxhat.colwise().sum();
  const RowVec<T> sum_dxhat_xhat = (dxhat.array() * cache.xhat.array()).matrix().colwise().sum();
  const T inv_b = T(1) / static_cast<T>(B);
  Mat<T> dz1 = ((((dxhat * static_cast<T>(B)).rowwise() - sum_dxhat).array() -
                 cache.xhat.array().rowwise() * sum_dxhat_xhat.array())
                    .rowwise() *
                (cache.inv_std.array() * inv_b))
                   .matrix();
  dz1 = (dz1.array() * (cache.z1.array() > T(0)).template cast<T>()).matrix();

  const Mat<T>& last = cache.hidden[batch.steps];
  Mat<T> dw1(Di, Hi);
  dw1.noalias() = dz1.transpose() * last;
  MatMap<T>(grad_ptr(Tensor::Dense1Weights), Di, Hi) = dw1;
  const RowVec<T> db1 = dz1.colwise().sum();
  RowMap<T>(grad_ptr(Tensor::Dense1Bias), Di) = db1;

  const auto Ii = static_cast<Eigen::Index>(batch.input);
  Mat<T> dwx = Mat<T>::Zero(Gi, Ii);
  Mat<T> dwh = Mat<T>::Zero(Gi, Hi);
  RowVec<T> dbg = RowVec<T>::Zero(Gi);

  Mat<T> dh = dz1 * v.w1;
  Mat<T> dc = Mat<T>::Zero(Bi, Hi);
  Mat<T> da(Bi, Gi);
  for (std::size_t t = batch.steps; t-- > 0;) {
    const Mat<T>& a = cache.gates[t];
    const auto ig = a.leftCols(Hi).array();
    const auto fg = a.middleCols(Hi, Hi).array();
    const auto gg = a.middleCols(2 * Hi, Hi).array();
    const auto og = a.rightCols(Hi).array();
    const auto tc = cache.tanh_cell[t].array();

    dc.array() += dh.array() * og * (T(1) - tc.square());
    da.leftCols(Hi) = (dc.array() * gg * ig * (T(1) - ig)).matrix();
    da.middleCols(Hi, Hi) = (dc.array() * cache.cell[t].array() * fg * (T(1) - fg)).matrix();
    da.middleCols(2 * Hi, Hi) = (dc.array() * ig * (T(1) - gg.square())).matrix();
    da.rightCols(Hi) = (dh.array() * tc * og * (T(1) - og)).matrix();

    dwx.noalias() += da.transpose() * cache.inputs[t];
    dwh.noalias() += da.transpose() * cache.hidden[t];
    dbg += da.colwise().sum();

    dh.noalias() = da * v.wh;
    dc.array() *= fg;
  }
  MatMap<T>(grad_ptr(Tensor::GateInputWeights), Gi, Ii) = dwx;
  MatMap<T>(grad_ptr(Tensor::GateRecurrentWeights), Gi, Hi) = dwh;
  RowMap<T>(grad_ptr(Tensor::GateBias), Gi) = dbg;

  for (T g : out.gradients) {
    if (!std::isfinite(g)) throw NumericError("non-finite gradient");
  }
  return out;
}

// ---------------------------------------------------------------------------

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (max_epochs == 0) throw ConfigError("max_epochs must be >= 1");
  if (patience > max_epochs) throw ConfigError("patience must not exceed max_epochs");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
}

std::string_view to_string(StopReason reason) {
  return reason == StopReason::EarlyStop ? "early_stop" : "max_epochs";
}

std::string write_history_csv(const TrainHistory& h) {
  std::string out = "epoch;train_loss;val_loss;val_f1\n";
  char buf[128];
  for (std::size_t e = 0; e < h.epochs(); ++e) {
    const int n = std::snprintf(buf, sizeof buf, "%zu;%.9g;%.9g;%.6f\n", e + 1, h.train_loss[e],
                                h.val_loss[e], h.val_f1[e]);
    out.append(buf, static_cast<std::size_t>(n));
  }
  return out;
}

bool EarlyStopping::observe(double val_loss) {
  const bool improved = epochs_ == 0 || val_loss < best_;
  if (improved) {
    best_ = val_loss;
    best_epoch_ = epochs_;
    since_best_ = 0;
  } else {
    ++since_best_;
  }
  ++epochs_;
  return improved;
}

template <typename T>
Adam<T>::Adam(std::size_t size, double learning_rate)
    : lr_(learning_rate), m_(size, T(0)), v_(size, T(0)) {}

template <typename T>
void Adam<T>::step(std::span<T> params, std::span<const T> grads) {
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double eps = 1e-8;
  ++t_;
  const T c1 = static_cast<T>(1.0 / (1.0 - std::pow(beta1, static_cast<double>(t_))));
  const T c2 = static_cast<T>(1.0 / (1.0 - std::pow(beta2, static_cast<double>(t_))));
  const T lr = static_cast<T>(lr_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const T g = grads[i];
    m_[i] = T(beta1) * m_[i] + T(1 - beta1) * g;
    v_[i] = T(beta2) * v_[i] + T(1 - beta2) * g * g;
    params[i] -= lr * (m_[i] * c1) / (std::sqrt(v_[i] * c2) + T(eps));
  }
}

std::vector<int> window_labels(std::span<const Window> windows) {
  std::vector<int> out(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) out[i] = static_cast<int>(windows[i].label);
  return out;
}

template <typename T>
std::vector<T> predict(const ModelParams<T>& model, std::span<const Window> windows,
                       std::size_t batch_size) {
  std::vector<T> out;
  out.reserve(windows.size());
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < windows.size(); start += batch_size) {
    idx.clear();
    for (std::size_t i = start; i < std::min(windows.size(), start + batch_size); ++i) {
      idx.push_back(i);
    }
    const auto probs = forward(model, make_batch<T>(windows, idx), Mode::Eval);
    out.insert(out.end(), probs.begin(), probs.end());
  }
  return out;
}

template <typename T>
ClassificationMetrics evaluate(const ModelParams<T>& model, std::span<const Window> windows,
                               double threshold) {
  if (windows.empty()) throw EmptyInputError("evaluate: no test windows");
  const auto probs = predict(model, windows);
  const std::vector<double> p(probs.begin(), probs.end());
  return classification_metrics(p, window_labels(windows), threshold);
}

template <typename T>
TrainResult<T> train(ModelParams<T> model, std::span<const Window> train_windows,
                     std::span<const Window> val_windows, const TrainConfig& config) {
  config.validate();
  if (train_windows.empty()) throw EmptyInputError("train: no training windows");
  if (val_windows.empty()) throw EmptyInputError("train: no validation windows");

  const auto train_labels = window_labels(train_windows);
  const auto val_labels = window_labels(val_windows);

  Rng rng(config.seed);
  Adam<T> adam(model.weights.size(), config.learning_rate);
  EarlyStopping stopper(config.patience);

  TrainResult<T> result{model, {}};
  std::vector<std::size_t> order(train_windows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::size_t> idx;
  std::vector<int> batch_labels;

  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    if (config.shuffle) rng.shuffle(std::span<std::size_t>(order));

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      idx.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                 order.begin() + static_cast<std::ptrdiff_t>(end));
      batch_labels.clear();
      for (std::size_t i : idx) batch_labels.push_back(train_labels[i]);

      const auto batch = make_batch<T>(train_windows, idx);
      auto lg = loss_and_gradients(model, batch, batch_labels, &model);
      adam.step(model.weights, lg.gradients);
      loss_sum += static_cast<double>(lg.loss) * static_cast<double>(idx.size());
    }

    const auto probs = predict(model, val_windows);
    const double val_loss = static_cast<double>(bce_loss<T>(probs, val_labels));
    if (!std::isfinite(val_loss)) throw NumericError("validation loss is not finite");
    const std::vector<double> p(probs.begin(), probs.end());
    const double val_f1 = classification_metrics(p, val_labels, config.threshold).f1;

    result.history.train_loss.push_back(loss_sum / static_cast<double>(order.size()));
    result.history.val_loss.push_back(val_loss);
    result.history.val_f1.push_back(val_f1);

    if (stopper.observe(val_loss)) result.model = model;
    if (stopper.should_stop()) {
      result.history.stop_reason = StopReason::EarlyStop;
      break;
    }
  }
  result.history.best_epoch = stopper.best_epoch();
  return result;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

template <typename T>
void put(std::vector<std::byte>& out, T value) {
  auto bits = std::bit_cast<std::array<std::byte, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
  out.insert(out.end(), bits.begin(), bits.end());
}

template <typename T>
T get(std::span<const std::byte> bytes, std::size_t& pos) {
  if (bytes.size() - pos < sizeof(T)) throw FormatError("checkpoint is truncated");
  std::array<std::byte, sizeof(T)> bits;
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(pos), sizeof(T), bits.begin());
  if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
  pos += sizeof(T);
  return std::bit_cast<T>(bits);
}

constexpr char kCheckpointMagic[4] = {'F', 'S', 'C', 'K'};

}  // namespace

std::vector<std::byte> write_checkpoint(const Checkpoint& ck) {
  std::vector<std::byte> out;
  for (char c : kCheckpointMagic) out.push_back(static_cast<std::byte>(c));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ck.model.shape.input));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ck.model.shape.hidden));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ck.model.shape.dense));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ck.window_length));
  for (double m : ck.scaler.mean) put<double>(out, m);
  for (double s : ck.scaler.stddev) put<double>(out, s);
  put<std::uint64_t>(out, ck.model.weights.size());
  for (float w : ck.model.weights) put<float>(out, w);
  for (float w : ck.model.running_mean) put<float>(out, w);
  for (float w : ck.model.running_var) put<float>(out, w);
  return out;
}

Checkpoint read_checkpoint(std::span<const std::byte> bytes) {
  if (bytes.size() < 4 || !std::equal(bytes.begin(), bytes.begin() + 4,
                                      reinterpret_cast<const std::byte*>(kCheckpointMagic))) {
    throw FormatError("not a model checkpoint (bad magic)");
  }
  std::size_t pos = 4;
  const auto version = get<std::uint32_t>(bytes, pos);
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  ModelShape shape;
  shape.input = get<std::uint32_t>(bytes, pos);
  shape.hidden = get<std::uint32_t>(bytes, pos);
  shape.dense = get<std::uint32_t>(bytes, pos);
  for (std::size_t d : {shape.input, shape.hidden, shape.dense}) {
    if (d == 0 || d > 65536) throw FormatError("checkpoint has an implausible layer size " + std::to_string(d));
  }
  Checkpoint ck{ModelParams<float>(shape), Scaler{}, get<std::uint32_t>(bytes, pos)};
  for (double& m : ck.scaler.mean) m = get<double>(bytes, pos);
  for (double& s : ck.scaler.stddev) s = get<double>(bytes, pos);
  const auto count = get<std::uint64_t>(bytes, pos);
  if (count != ck.model.weights.size()) {
    throw ShapeError("checkpoint holds " + std::to_string(count) + " weights, shape needs " +
                     std::to_string(ck.model.weights.size()));
  }
  for (float& w : ck.model.weights) w = get<float>(bytes, pos);
  for (float& w : ck.model.running_mean) w = get<float>(bytes, pos);
  for (float& w : ck.model.running_var) w = get<float>(bytes, pos);
  if (pos != bytes.size()) throw FormatError("trailing bytes after checkpoint");
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  const auto bytes = write_checkpoint(checkpoint);
  write_text_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string raw = read_text_file(path);
  return read_checkpoint(std::as_bytes(std::span<const char>(raw.data(), raw.size())));
}

// ---------------------------------------------------------------------------

#define FALLSYNTH_INSTANTIATE(T)                                                              \
  template struct ModelParams<T>;                                                             \
  template ModelParams<T> init_model<T>(std::uint64_t, const ModelShape&);                    \
  template Batch<T> make_batch<T>(std::span<const Window>);                                   \
  template Batch<T> make_batch<T>(std::span<const Window>, std::span<const std::size_t>);     \
  template std::vector<T> forward<T>(const ModelParams<T>&, const Batch<T>&, Mode,            \
                                     ModelParams<T>*);                                        \
  template LossAndGradients<T> loss_and_gradients<T>(const ModelParams<T>&, const Batch<T>&,  \
                                                     std::span<const int>, ModelParams<T>*);  \
  template T bce_loss<T>(std::span<const T>, std::span<const int>);                           \
  template class Adam<T>;                                                                     \
  template TrainResult<T> train<T>(ModelParams<T>, std::span<const Window>,                   \
                                   std::span<const Window>, const TrainConfig&);              \
  template std::vector<T> predict<T>(const ModelParams<T>&, std::span<const Window>,          \
                                     std::size_t);                                            \
  template ClassificationMetrics evaluate<T>(const ModelParams<T>&, std::span<const Window>, \
                                             double);

FALLSYNTH_INSTANTIATE(float)
FALLSYNTH_INSTANTIATE(double)

#undef FALLSYNTH_INSTANTIATE

}  // namespace fallsynth
