#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fallsynth/metrics.hpp"
#include "fallsynth/windowing.hpp"

namespace fallsynth {

// LSTM(hidden) -> last hidden state -> Dense(dense) -> ReLU -> BatchNorm ->
// Dense(1) -> sigmoid.
struct ModelShape {
  std::size_t input = 3;
  std::size_t hidden = 128;
  std::size_t dense = 128;

  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

inline constexpr double kBnMomentum = 0.99;
inline constexpr double kBnEpsilon = 1e-3;
inline constexpr double kProbabilityClamp = 1e-7;

// Trainable tensors, in storage order. Gate blocks are ordered input, forget,
// cell, output.
enum class Tensor : std::size_t {
  GateInputWeights,      // 4H x input
  GateRecurrentWeights,  // 4H x H
  GateBias,              // 4H
  Dense1Weights,         // D x H
  Dense1Bias,            // D
  BnGamma,               // D
  BnBeta,                // D
  Dense2Weights,         // 1 x D
  Dense2Bias,            // 1
};
inline constexpr std::size_t kTensorCount = 9;

struct TensorInfo {
  std::string_view name;
  std::size_t offset;
  std::size_t rows;
  std::size_t cols;
  std::size_t size() const noexcept { return rows * cols; }
};

std::array<TensorInfo, kTensorCount> tensor_layout(const ModelShape& shape);

template <typename T>
struct ModelParams {
  ModelShape shape;
  std::vector<T> weights;       // every trainable tensor, flat, see tensor_layout()
  std::vector<T> running_mean;  // BatchNorm, size dense
  std::vector<T> running_var;   // BatchNorm, size dense

  explicit ModelParams(ModelShape s = {});

  std::span<T> tensor(Tensor t);
  std::span<const T> tensor(Tensor t) const;

  template <typename U>
  ModelParams<U> cast() const {
    ModelParams<U> out(shape);
    out.weights.assign(weights.begin(), weights.end());
    out.running_mean.assign(running_mean.begin(), running_mean.end());
    out.running_var.assign(running_var.begin(), running_var.end());
    return out;
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Gate and dense weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)) with
// fan_in = input + hidden for the gates; biases 0 except the forget gate (1).
// BN gamma 1, beta 0, running mean 0, running variance 1.
template <typename T>
ModelParams<T> init_model(std::uint64_t seed, const ModelShape& shape = {});

enum class Mode { Train, Eval };

// Time-major input: values[(t * batch + b) * input + k].
template <typename T>
struct Batch {
  std::size_t batch = 0;
  std::size_t steps = 0;
  std::size_t input = 0;
  std::vector<T> values;
};

template <typename T>
Batch<T> make_batch(std::span<const Window> windows);
template <typename T>
Batch<T> make_batch(std::span<const Window> windows, std::span<const std::size_t> indices);

// Probabilities in (0, 1), one per window. Train mode normalizes with batch
// statistics; if `running_update` is non-null the momentum update of the
// running statistics is written there (the model itself is not modified).
// Throws NumericError naming the layer on non-finite activations.
template <typename T>
std::vector<T> forward(const ModelParams<T>& model, const Batch<T>& batch, Mode mode,
                       ModelParams<T>* running_update = nullptr);

template <typename T>
struct LossAndGradients {
  T loss = 0;
  std::vector<T> gradients;  // same layout as ModelParams::weights
};

// Mean binary cross-entropy (probabilities clamped to [1e-7, 1 - 1e-7]) in
// train mode, with gradients by backpropagation through all time steps.
template <typename T>
LossAndGradients<T> loss_and_gradients(const ModelParams<T>& model, const Batch<T>& batch,
                                       std::span<const int> labels,
                                       ModelParams<T>* running_update = nullptr);

// Mean clamped BCE of a forward pass.
template <typename T>
T bce_loss(std::span<const T> probabilities, std::span<const int> labels);

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t max_epochs = 250;
  std::size_t patience = 50;
  std::size_t batch_size = 64;
  bool shuffle = true;
  std::uint64_t seed = 0;
  double threshold = 0.5;

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

enum class StopReason { EarlyStop, MaxEpochs };
std::string_view to_string(StopReason reason);

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::vector<double> val_f1;
  std::size_t best_epoch = 0;  // 0-based
  StopReason stop_reason = StopReason::MaxEpochs;

  std::size_t epochs() const noexcept { return val_loss.size(); }
  friend bool operator==(const TrainHistory&, const TrainHistory&) = default;
};

// "epoch;train_loss;val_loss;val_f1"
std::string write_history_csv(const TrainHistory& history);

// Patience counter over validation losses; an epoch improves only if its loss
// is strictly lower than the best so far.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  // Returns true if this epoch is the new best.
  bool observe(double val_loss);
  bool should_stop() const noexcept { return epochs_ > 0 && since_best_ >= patience_; }
  std::size_t best_epoch() const noexcept { return best_epoch_; }
  double best_loss() const noexcept { return best_; }

 private:
  std::size_t patience_;
  std::size_t epochs_ = 0;
  std::size_t since_best_ = 0;
  std::size_t best_epoch_ = 0;
  double best_ = 0.0;
};

// Adam (beta1 0.9, beta2 0.999, eps 1e-8) with bias correction.
template <typename T>
class Adam {
 public:
  Adam(std::size_t size, double learning_rate);
  void step(std::span<T> params, std::span<const T> grads);

 private:
  double lr_;
  std::size_t t_ = 0;
  std::vector<T> m_;
  std::vector<T> v_;
};

template <typename T>
struct TrainResult {
  ModelParams<T> model;  // parameters from the best validation epoch
  TrainHistory history;
};

// Windows must already be standardized.
template <typename T>
TrainResult<T> train(ModelParams<T> model, std::span<const Window> train_windows,
                     std::span<const Window> val_windows, const TrainConfig& config);

template <typename T>
std::vector<T> predict(const ModelParams<T>& model, std::span<const Window> windows,
                       std::size_t batch_size = 256);

template <typename T>
ClassificationMetrics evaluate(const ModelParams<T>& model, std::span<const Window> windows,
                               double threshold = 0.5);

std::vector<int> window_labels(std::span<const Window> windows);

// Model checkpoint: "FSCK", u32 version, u32 input/hidden/dense, u32 window
// length, 6 float64 scaler values, u64 weight count, then little-endian
// float32 weights, running mean and running variance.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelParams<float> model;
  Scaler scaler;
  std::size_t window_length = kDefaultWindowLength;
};

std::vector<std::byte> write_checkpoint(const Checkpoint& checkpoint);
Checkpoint read_checkpoint(std::span<const std::byte> bytes);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace fallsynth
