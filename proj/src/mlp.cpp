#include <algorithm>
#include <cmath>
#include <numeric>

#include "roughbattery/errors.hpp"
#include "roughbattery/mlp.hpp"
#include "roughbattery/random.hpp"

namespace roughbattery::models {

namespace {

constexpr std::uint64_t kShuffleStream = 0x9E3779B97F4A7C15ULL;

void check_width(const MlpNetwork& net, std::size_t width) {
  if (net.layers.empty()) throw DataError("network has no layers");
  if (width != net.input_width()) {
    throw DataError("input has " + std::to_string(width) + " features, network expects " +
                    std::to_string(net.input_width()));
  }
}

// out = W in + b
void affine(const DenseLayer& layer, std::span<const double> in, std::span<double> out) {
  for (std::size_t o = 0; o < layer.out; ++o) {
    const double* w = layer.weights.data() + o * layer.in;
    double acc = layer.bias[o];
    for (std::size_t i = 0; i < layer.in; ++i) acc += w[i] * in[i];
    out[o] = acc;
  }
}

bool all_finite(const LayerBuffers& g) {
  auto finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double d) { return std::isfinite(d); });
  };
  return std::all_of(g.weights.begin(), g.weights.end(), finite) &&
         std::all_of(g.bias.begin(), g.bias.end(), finite);
}

double step_in_place(MlpNetwork& net, AdamState& state, const Matrix& x, std::span<const double> y,
                     const MlpConfig& config, LayerBuffers& grads) {
  const double loss = mlp_loss_and_gradients(net, x, y, grads);
  if (!std::isfinite(loss) || !all_finite(grads)) {
    throw DivergenceError("non-finite loss or gradient at step " + std::to_string(state.step + 1) +
                          "; lower the learning rate");
  }
  adam_update(net, state, grads, config);
  return loss;
}

}  // namespace

void MlpConfig::validate() const {
  if (std::any_of(hidden.begin(), hidden.end(), [](std::size_t w) { return w == 0; })) {
    throw DataError("layer widths must be >= 1");
  }
  if (!(learning_rate > 0.0)) throw DataError("learning rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw DataError("Adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw DataError("Adam epsilon must be > 0");
  if (batch_size == 0) throw DataError("batch size must be >= 1");
}

std::size_t MlpNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

LayerBuffers LayerBuffers::zeros_like(const MlpNetwork& net) {
  LayerBuffers b;
  for (const auto& l : net.layers) {
    b.weights.emplace_back(l.weights.size(), 0.0);
    b.bias.emplace_back(l.bias.size(), 0.0);
  }
  return b;
}

AdamState AdamState::zeros_like(const MlpNetwork& net) {
  return {LayerBuffers::zeros_like(net), LayerBuffers::zeros_like(net), 0};
}

MlpNetwork mlp_init(const MlpConfig& config, std::size_t input_width) {
  config.validate();
  if (input_width == 0) throw DataError("input width must be >= 1");
  Rng rng(config.seed);
  MlpNetwork net;
  std::vector<std::size_t> widths{input_width};
  widths.insert(widths.end(), config.hidden.begin(), config.hidden.end());
  widths.push_back(1);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    DenseLayer layer{widths[l], widths[l + 1], {}, {}};
    const double scale = std::sqrt(2.0 / static_cast<double>(layer.in));
    layer.weights.resize(layer.in * layer.out);
    for (auto& w : layer.weights) w = scale * rng.normal();
    layer.bias.assign(layer.out, 0.0);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

double mlp_forward(const MlpNetwork& net, std::span<const double> x) {
  check_width(net, x.size());
  std::vector<double> in(x.begin(), x.end());
  std::vector<double> out;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    out.resize(layer.out);
    affine(layer, in, out);
    if (l + 1 < net.layers.size()) {
      for (auto& v : out) v = std::max(v, 0.0);
    }
    std::swap(in, out);
  }
  return in.front();
}

double mlp_loss_and_gradients(const MlpNetwork& net, const Matrix& x, std::span<const double> y,
                              LayerBuffers& grads) {
  check_width(net, x.cols());
  if (x.rows() == 0 || x.rows() != y.size()) throw DataError("batch is empty or shapes disagree");
  grads = LayerBuffers::zeros_like(net);

  const std::size_t depth = net.layers.size();
  // acts[l] is the input to layer l; acts[depth] is the output
  std::vector<std::vector<double>> acts(depth + 1);
  std::vector<double> delta, prev_delta;
  const double batch = static_cast<double>(x.rows());
  double loss = 0.0;

  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto xr = x.row(r);
    acts[0].assign(xr.begin(), xr.end());
    for (std::size_t l = 0; l < depth; ++l) {
      const auto& layer = net.layers[l];
      acts[l + 1].resize(layer.out);
      affine(layer, acts[l], acts[l + 1]);
      if (l + 1 < depth) {
        for (auto& v : acts[l + 1]) v = std::max(v, 0.0);
      }
    }
    const double err = acts[depth][0] - y[r];
    loss += err * err;

    delta.assign(1, 2.0 * err / batch);
    for (std::size_t l = depth; l-- > 0;) {
      const auto& layer = net.layers[l];
      auto& gw = grads.weights[l];
      auto& gb = grads.bias[l];
      const auto& in = acts[l];
      for (std::size_t o = 0; o < layer.out; ++o) {
        const double d = delta[o];
        gb[o] += d;
        double* g = gw.data() + o * layer.in;
        for (std::size_t i = 0; i < layer.in; ++i) g[i] += d * in[i];
      }
      if (l == 0) break;
      prev_delta.assign(layer.in, 0.0);
      for (std::size_t o = 0; o < layer.out; ++o) {
        const double d = delta[o];
        const double* w = layer.weights.data() + o * layer.in;
        for (std::size_t i = 0; i < layer.in; ++i) prev_delta[i] += w[i] * d;
      }
      // ReLU derivative: acts[l] holds the activated input of this layer
      for (std::size_t i = 0; i < layer.in; ++i) {
        if (!(in[i] > 0.0)) prev_delta[i] = 0.0;
      }
      std::swap(delta, prev_delta);
    }
  }
  return loss / batch;
}

void adam_update(MlpNetwork& net, AdamState& state, const LayerBuffers& grads, const MlpConfig& config) {
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  auto update = [&](std::vector<double>& param, const std::vector<double>& g, std::vector<double>& m,
                    std::vector<double>& v) {
    for (std::size_t k = 0; k < param.size(); ++k) {
      m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * g[k];
      v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * g[k] * g[k];
      const double m_hat = m[k] / c1;
      const double v_hat = v[k] / c2;
      param[k] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  };
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    update(net.layers[l].weights, grads.weights[l], state.first.weights[l], state.second.weights[l]);
    update(net.layers[l].bias, grads.bias[l], state.first.bias[l], state.second.bias[l]);
  }
}

TrainStep mlp_train_step(MlpNetwork net, AdamState state, const Matrix& x, std::span<const double> y,
                         const MlpConfig& config) {
  LayerBuffers grads;
  const double loss = step_in_place(net, state, x, y, config, grads);
  return {std::move(net), std::move(state), loss};
}

MlpTrainResult mlp_train(const MlpConfig& config, const Matrix& x, std::span<const double> y) {
  if (x.rows() == 0 || x.rows() != y.size()) throw DataError("training set is empty or shapes disagree");
  MlpTrainResult result{mlp_init(config, x.cols()), {}};
  AdamState state = AdamState::zeros_like(result.net);
  LayerBuffers grads;
  Rng rng(config.seed ^ kShuffleStream);
  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const Matrix bx = x.select_rows(idx);
      std::vector<double> by;
      by.reserve(idx.size());
      for (auto i : idx) by.push_back(y[i]);
      const double loss = step_in_place(result.net, state, bx, by, config, grads);
      total += loss * static_cast<double>(idx.size());
    }
    result.loss_trace.push_back(total / static_cast<double>(order.size()));
  }
  return result;
}

}  // namespace roughbattery::models
