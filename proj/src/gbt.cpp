#include <algorithm>
#include <cmath>
#include <numeric>

#include "roughbattery/errors.hpp"
#include "roughbattery/gbt.hpp"

namespace roughbattery::models {

namespace {

double leaf_score(double sum, double count, double lambda) { return sum * sum / (count + lambda); }

SplitCandidate best_split_for_feature(const Matrix& x, std::span<const double> residual,
                                      std::span<const std::size_t> rows, std::size_t feature,
                                      const GbtConfig& config, double total) {
  std::vector<std::size_t> order(rows.begin(), rows.end());
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x(a, feature) < x(b, feature); });
  const std::size_t n = order.size();
  const double parent = leaf_score(total, static_cast<double>(n), config.lambda);
  SplitCandidate best;
  double left_sum = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    left_sum += residual[order[i]];
    const std::size_t n_left = i + 1;
    const std::size_t n_right = n - n_left;
    if (n_left < config.min_samples_leaf) continue;
    if (n_right < config.min_samples_leaf) break;
    const double lo = x(order[i], feature);
    const double hi = x(order[i + 1], feature);
    if (!(lo < hi)) continue;
    const double gain = leaf_score(left_sum, static_cast<double>(n_left), config.lambda) +
                        leaf_score(total - left_sum, static_cast<double>(n_right), config.lambda) -
                        parent;
    if (best.feature < 0 || gain > best.gain) {
      double threshold = lo + (hi - lo) / 2.0;
      if (!(threshold < hi)) threshold = lo;
      best = {static_cast<int>(feature), threshold, gain};
    }
  }
  return best;
}

double residual_sum(std::span<const double> residual, std::span<const std::size_t> rows) {
  double s = 0.0;
  for (auto r : rows) s += residual[r];
  return s;
}

SplitCandidate pick_first_best(std::span<const SplitCandidate> per_feature) {
  SplitCandidate best;
  for (const auto& c : per_feature) {
    if (c.feature >= 0 && (best.feature < 0 || c.gain > best.gain)) best = c;
  }
  return best;
}

struct TreeBuilder {
  const Matrix& x;
  std::span<const double> residual;
  const GbtConfig& config;
  Exec exec;
  RegressionTree tree;
  std::vector<double>* update;  // per-row tree output, filled at the leaves

  int build(std::vector<std::size_t> rows, std::size_t depth) {
    const double sum = residual_sum(residual, rows);
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes[index].samples = rows.size();
    tree.nodes[index].weight = sum / (static_cast<double>(rows.size()) + config.lambda);

    if (depth < config.max_depth && rows.size() >= 2 * config.min_samples_leaf) {
      const auto split = exec == Exec::parallel ? best_split_parallel(x, residual, rows, config)
                                                : best_split_serial(x, residual, rows, config);
      if (split.feature >= 0 && split.gain > 0.0) {
        std::vector<std::size_t> left, right;
        for (auto r : rows) {
          (x(r, static_cast<std::size_t>(split.feature)) <= split.threshold ? left : right).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();
        const int l = build(std::move(left), depth + 1);
        const int r = build(std::move(right), depth + 1);
        auto& node = tree.nodes[index];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = l;
        node.right = r;
        return index;
      }
    }
    for (auto r : rows) (*update)[r] = tree.nodes[index].weight;
    return index;
  }
};

}  // namespace

void GbtConfig::validate() const {
  if (max_depth == 0) throw DataError("max_depth must be >= 1");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw DataError("learning rate must lie in (0, 1]");
  if (!(lambda >= 0.0)) throw DataError("lambda must be >= 0");
  if (min_samples_leaf == 0) throw DataError("min_samples_leaf must be >= 1");
}

double RegressionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes[i].weight;
}

std::size_t RegressionTree::depth() const {
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  std::size_t deepest = 0;
  while (!stack.empty()) {
    const auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes[i].is_leaf()) {
      stack.emplace_back(static_cast<std::size_t>(nodes[i].left), d + 1);
      stack.emplace_back(static_cast<std::size_t>(nodes[i].right), d + 1);
    }
  }
  return deepest;
}

double GbtEnsemble::predict(std::span<const double> x) const { return predict(x, trees.size()); }

double GbtEnsemble::predict(std::span<const double> x, std::size_t rounds) const {
  if (x.size() != input_width) {
    throw DataError("input has " + std::to_string(x.size()) + " features, model expects " +
                    std::to_string(input_width));
  }
  double acc = base_score;
  const std::size_t k = std::min(rounds, trees.size());
  for (std::size_t t = 0; t < k; ++t) acc += config.learning_rate * trees[t].predict(x);
  return acc;
}

SplitCandidate best_split_serial(const Matrix& x, std::span<const double> residual,
                                 std::span<const std::size_t> rows, const GbtConfig& config) {
  const double total = residual_sum(residual, rows);
  std::vector<SplitCandidate> per_feature(x.cols());
  for (std::size_t f = 0; f < x.cols(); ++f) {
    per_feature[f] = best_split_for_feature(x, residual, rows, f, config, total);
  }
  return pick_first_best(per_feature);
}

SplitCandidate best_split_parallel(const Matrix& x, std::span<const double> residual,
                                   std::span<const std::size_t> rows, const GbtConfig& config) {
  const double total = residual_sum(residual, rows);
  std::vector<SplitCandidate> per_feature(x.cols());
  const auto n = static_cast<std::ptrdiff_t>(x.cols());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t f = 0; f < n; ++f) {
    per_feature[static_cast<std::size_t>(f)] =
        best_split_for_feature(x, residual, rows, static_cast<std::size_t>(f), config, total);
  }
  return pick_first_best(per_feature);
}

GbtEnsemble gbt_fit(const Matrix& x, std::span<const double> y, const GbtConfig& config, Exec exec) {
  config.validate();
  if (x.rows() != y.size()) throw DataError("feature rows and target length differ");
  if (x.rows() == 0 || x.rows() < 2 * config.min_samples_leaf) {
    throw DataError("gradient boosting needs at least 2 * min_samples_leaf = " +
                    std::to_string(2 * config.min_samples_leaf) + " rows, got " + std::to_string(x.rows()));
  }
  GbtEnsemble model;
  model.config = config;
  model.input_width = x.cols();
  model.base_score = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());

  std::vector<double> prediction(y.size(), model.base_score);
  std::vector<double> residual(y.size());
  std::vector<double> update(y.size());
  std::vector<std::size_t> all(y.size());
  std::iota(all.begin(), all.end(), 0);

  for (std::size_t round = 0; round < config.rounds; ++round) {
    for (std::size_t i = 0; i < y.size(); ++i) residual[i] = y[i] - prediction[i];
    TreeBuilder builder{x, residual, config, exec, {}, &update};
    builder.build(all, 0);
    for (std::size_t i = 0; i < y.size(); ++i) prediction[i] += config.learning_rate * update[i];
    model.trees.push_back(std::move(builder.tree));
  }
  return model;
}

std::vector<double> staged_mse(const GbtEnsemble& model, const Matrix& x, std::span<const double> y) {
  if (x.rows() != y.size() || x.rows() == 0) throw DataError("feature rows and target length differ");
  std::vector<double> prediction(y.size(), model.base_score);
  auto mse = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - prediction[i]) * (y[i] - prediction[i]);
    return s / static_cast<double>(y.size());
  };
  std::vector<double> out{mse()};
  for (const auto& tree : model.trees) {
    for (std::size_t i = 0; i < y.size(); ++i) {
      prediction[i] += model.config.learning_rate * tree.predict(x.row(i));
    }
    out.push_back(mse());
  }
  return out;
}

}  // namespace roughbattery::models
