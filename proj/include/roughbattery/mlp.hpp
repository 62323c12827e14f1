#pragma once

// Fully connected regression network: ReLU hidden layers, identity output,
// trained on mean squared error with backpropagation and Adam.

#include <cstdint>
#include <span>
#include <vector>

#include "roughbattery/matrix.hpp"

namespace roughbattery::models {

struct MlpConfig {
  /// Hidden layer widths; a single linear output unit is appended.
  std::vector<std::size_t> hidden{128, 256, 256, 256, 128, 64};
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  std::uint64_t seed = 42;

  void validate() const;
};

/// One dense layer: out = W in + b, W stored row-major as [out][in].
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  bool operator==(const DenseLayer&) const = default;
};

struct MlpNetwork {
  std::vector<DenseLayer> layers;

  std::size_t input_width() const { return layers.empty() ? 0 : layers.front().in; }
  std::size_t parameter_count() const;
  bool operator==(const MlpNetwork&) const = default;
};

/// Gradients (or Adam moments) with the network's shapes.
struct LayerBuffers {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> bias;

  static LayerBuffers zeros_like(const MlpNetwork& net);
};

struct AdamState {
  LayerBuffers first;   // m
  LayerBuffers second;  // v
  std::uint64_t step = 0;

  static AdamState zeros_like(const MlpNetwork& net);
};

/// He initialization: W ~ N(0, 2 / fan_in), zero biases. Deterministic per config.seed.
MlpNetwork mlp_init(const MlpConfig& config, std::size_t input_width);

/// Forward pass; throws DataError on a width mismatch.
double mlp_forward(const MlpNetwork& net, std::span<const double> x);

/// Batch MSE loss (1/B) sum (f(x_i) - y_i)^2 and its gradient by backpropagation.
double mlp_loss_and_gradients(const MlpNetwork& net, const Matrix& x, std::span<const double> y,
                              LayerBuffers& grads);

/// Applies one bias-corrected Adam update in place and increments state.step.
void adam_update(MlpNetwork& net, AdamState& state, const LayerBuffers& grads, const MlpConfig& config);

struct TrainStep {
  MlpNetwork net;
  AdamState state;
  double loss = 0.0;  // before the update
};

/// One optimizer step on a batch. Throws DivergenceError on a non-finite loss or gradient.
TrainStep mlp_train_step(MlpNetwork net, AdamState state, const Matrix& x, std::span<const double> y,
                         const MlpConfig& config);

struct MlpTrainResult {
  MlpNetwork net;
  std::vector<double> loss_trace;  // mean training loss per epoch
};

/// Mini-batch training, rows reshuffled every epoch from config.seed.
MlpTrainResult mlp_train(const MlpConfig& config, const Matrix& x, std::span<const double> y);

}  // namespace roughbattery::models
