#pragma once

// Hand-rolled generators and brute-force oracles shared by unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "roughbattery/matrix.hpp"
#include "roughbattery/mlp.hpp"
#include "roughbattery/random.hpp"
#include "roughbattery/roughsets.hpp"

namespace testsupport {

using roughbattery::Rng;
using roughbattery::rough::InformationTable;
using roughbattery::rough::ObjectSet;

/// Raw codes of a small information table; the last column is the decision.
struct SmallTable {
  std::vector<std::string> names;
  std::vector<std::vector<std::uint32_t>> columns;
  std::size_t objects = 0;

  InformationTable build() const { return InformationTable::from_codes(names, "d", columns); }
};

/// Up to `max_objects` objects, 1..max_attrs attributes, 1..max_labels labels per column.
inline SmallTable random_small_table(Rng& rng, std::size_t max_objects = 8, std::size_t max_attrs = 4,
                                     std::uint32_t max_labels = 3) {
  SmallTable t;
  t.objects = 1 + rng.below(max_objects);
  const std::size_t attrs = 1 + rng.below(max_attrs);
  for (std::size_t a = 0; a <= attrs; ++a) {
    const auto labels = static_cast<std::uint32_t>(1 + rng.below(max_labels));
    std::vector<std::uint32_t> raw(t.objects);
    for (auto& v : raw) v = static_cast<std::uint32_t>(rng.below(labels));
    // codes must be dense in first-appearance order
    std::vector<std::int64_t> remap(labels, -1);
    std::uint32_t next = 0;
    for (auto& v : raw) {
      if (remap[v] < 0) remap[v] = next++;
      v = static_cast<std::uint32_t>(remap[v]);
    }
    t.columns.push_back(std::move(raw));
    if (a < attrs) t.names.push_back("a" + std::to_string(a));
  }
  return t;
}

/// Indices -> names helper.
inline std::vector<std::string> names_of(const InformationTable& it, const std::vector<std::size_t>& idx) {
  std::vector<std::string> out;
  for (auto i : idx) out.push_back(it.conditional()[i]);
  return out;
}

/// All subsets of the conditional attributes as index lists (bit order).
inline std::vector<std::vector<std::size_t>> all_subsets(std::size_t attrs) {
  std::vector<std::vector<std::size_t>> out;
  for (std::uint32_t mask = 0; mask < (1u << attrs); ++mask) {
    std::vector<std::size_t> s;
    for (std::size_t a = 0; a < attrs; ++a) {
      if (mask & (1u << a)) s.push_back(a);
    }
    out.push_back(std::move(s));
  }
  return out;
}

/// Naive oracle: materializes the object-pair indiscernibility relation.
class PairwiseOracle {
public:
  PairwiseOracle(const InformationTable& it, const std::vector<std::size_t>& attrs)
      : n_(it.num_objects()), rel_(n_ * n_, true), decision_(it.codes(it.decision_index()).begin(),
                                                             it.codes(it.decision_index()).end()) {
    for (std::size_t x = 0; x < n_; ++x) {
      for (std::size_t y = 0; y < n_; ++y) {
        for (auto a : attrs) {
          if (it.codes(a)[x] != it.codes(a)[y]) rel_[x * n_ + y] = false;
        }
      }
    }
  }

  bool related(std::size_t x, std::size_t y) const { return rel_[x * n_ + y]; }

  std::vector<ObjectSet> blocks() const {
    std::vector<ObjectSet> out;
    std::vector<bool> seen(n_, false);
    for (std::size_t x = 0; x < n_; ++x) {
      if (seen[x]) continue;
      ObjectSet b;
      for (std::size_t y = 0; y < n_; ++y) {
        if (related(x, y)) {
          b.push_back(y);
          seen[y] = true;
        }
      }
      out.push_back(b);
    }
    return out;
  }

  ObjectSet lower(const ObjectSet& target) const {
    ObjectSet out;
    for (std::size_t x = 0; x < n_; ++x) {
      bool all = true;
      for (std::size_t y = 0; y < n_; ++y) {
        if (related(x, y) && !std::binary_search(target.begin(), target.end(), y)) all = false;
      }
      if (all) out.push_back(x);
    }
    return out;
  }

  ObjectSet upper(const ObjectSet& target) const {
    ObjectSet out;
    for (std::size_t x = 0; x < n_; ++x) {
      for (std::size_t y = 0; y < n_; ++y) {
        if (related(x, y) && std::binary_search(target.begin(), target.end(), y)) {
          out.push_back(x);
          break;
        }
      }
    }
    return out;
  }

  /// Objects whose whole indiscernibility class shares their decision, over |U|.
  double gamma() const {
    std::size_t pos = 0;
    for (std::size_t x = 0; x < n_; ++x) {
      bool pure = true;
      for (std::size_t y = 0; y < n_; ++y) {
        if (related(x, y) && decision_[x] != decision_[y]) pure = false;
      }
      if (pure) ++pos;
    }
    return static_cast<double>(pos) / static_cast<double>(n_);
  }

private:
  std::size_t n_;
  std::vector<bool> rel_;
  std::vector<std::uint32_t> decision_;
};

inline bool is_subset(const ObjectSet& a, const ObjectSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

/// Random subset of 0..n-1, sorted.
inline ObjectSet random_target(Rng& rng, std::size_t n) {
  ObjectSet out;
  for (std::size_t i = 0; i < n; ++i) {
    if (rng.below(2) == 1) out.push_back(i);
  }
  return out;
}

inline roughbattery::Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  roughbattery::Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = rng.normal();
  }
  return m;
}

inline std::vector<double> random_vector(Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

/// Independent layer-by-layer evaluation. Returns the output and collects every
/// hidden pre-activation into `pre` when given.
inline double reference_forward(const roughbattery::models::MlpNetwork& net, std::span<const double> x,
                                std::vector<double>* pre = nullptr) {
  std::vector<double> a(x.begin(), x.end());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    std::vector<double> z(layer.out);
    for (std::size_t o = 0; o < layer.out; ++o) {
      double s = layer.bias[o];
      for (std::size_t i = 0; i < layer.in; ++i) s += layer.weights[o * layer.in + i] * a[i];
      z[o] = s;
    }
    const bool hidden = l + 1 < net.layers.size();
    if (hidden) {
      if (pre) pre->insert(pre->end(), z.begin(), z.end());
      for (auto& v : z) v = std::max(v, 0.0);
    }
    a = std::move(z);
  }
  return a[0];
}

/// Distance of the closest hidden pre-activation to the ReLU kink over a batch.
/// Central differences are only meaningful away from it.
inline double kink_margin(const roughbattery::models::MlpNetwork& net, const roughbattery::Matrix& x) {
  double margin = 1e300;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    std::vector<double> pre;
    reference_forward(net, x.row(r), &pre);
    for (double v : pre) margin = std::min(margin, std::abs(v));
  }
  return margin;
}

/// Largest relative error between backprop gradients and central differences, over
/// every weight and bias. Relative error is |a - n| / max(|a| + |n|, floor).
inline double max_gradient_error(const roughbattery::models::MlpNetwork& net, const roughbattery::Matrix& x,
                                 const std::vector<double>& y, double step = 1e-5) {
  using namespace roughbattery::models;
  auto grads = LayerBuffers::zeros_like(net);
  mlp_loss_and_gradients(net, x, y, grads);
  auto scratch = LayerBuffers::zeros_like(net);
  double worst = 0.0;
  auto check = [&](double analytic, const std::function<void(MlpNetwork&, double)>& nudge) {
    MlpNetwork plus = net, minus = net;
    nudge(plus, step);
    nudge(minus, -step);
    const double numeric = (mlp_loss_and_gradients(plus, x, y, scratch) -
                            mlp_loss_and_gradients(minus, x, y, scratch)) /
                           (2.0 * step);
    const double denom = std::max(std::abs(analytic) + std::abs(numeric), 1e-7);
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
  };
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    for (std::size_t i = 0; i < net.layers[l].weights.size(); ++i) {
      check(grads.weights[l][i], [&](MlpNetwork& m, double h) { m.layers[l].weights[i] += h; });
    }
    for (std::size_t i = 0; i < net.layers[l].bias.size(); ++i) {
      check(grads.bias[l][i], [&](MlpNetwork& m, double h) { m.layers[l].bias[i] += h; });
    }
  }
  return worst;
}

/// Random network of up to `max_hidden_layers` hidden layers of width 1..max_width,
/// with biases perturbed away from zero so the bias gradient path is exercised.
inline roughbattery::models::MlpNetwork random_network(Rng& rng, std::size_t input, std::size_t max_hidden_layers,
                                                       std::size_t max_width) {
  using namespace roughbattery::models;
  MlpConfig cfg;
  cfg.hidden.clear();
  const std::size_t depth = 1 + rng.below(max_hidden_layers);
  for (std::size_t i = 0; i < depth; ++i) cfg.hidden.push_back(1 + rng.below(max_width));
  cfg.seed = rng.below(1u << 30);
  auto net = mlp_init(cfg, input);
  for (auto& layer : net.layers) {
    for (auto& b : layer.bias) b = 0.1 * rng.normal();
  }
  return net;
}

}  // namespace testsupport
