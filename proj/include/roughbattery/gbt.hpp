#pragma once

// Gradient-boosted regression trees on squared loss (Newton boosting with L2
// leaf regularization, exact greedy split search).

#include <cstdint>
#include <span>
#include <vector>

#include "roughbattery/exec.hpp"
#include "roughbattery/matrix.hpp"

namespace roughbattery::models {

struct GbtConfig {
  std::size_t rounds = 100;
  std::size_t max_depth = 3;
  double learning_rate = 0.1;  // shrinkage, in (0, 1]
  double lambda = 1.0;         // L2 on leaf weights
  std::size_t min_samples_leaf = 5;

  void validate() const;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  double weight = 0.0;
  std::size_t samples = 0;

  bool is_leaf() const noexcept { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(std::span<const double> x) const;
  std::size_t depth() const;
  bool operator==(const RegressionTree&) const = default;
};

struct GbtEnsemble {
  double base_score = 0.0;
  std::vector<RegressionTree> trees;
  GbtConfig config;
  std::size_t input_width = 0;

  double predict(std::span<const double> x) const;
  /// Prediction using only the first `rounds` trees.
  double predict(std::span<const double> x, std::size_t rounds) const;
  bool operator==(const GbtEnsemble& o) const {
    return base_score == o.base_score && trees == o.trees && input_width == o.input_width;
  }
};

/// Best split of one node: `rows` are the node's row indices, `residual` the full residual vector.
struct SplitCandidate {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

SplitCandidate best_split_serial(const Matrix& x, std::span<const double> residual,
                                 std::span<const std::size_t> rows, const GbtConfig& config);
SplitCandidate best_split_parallel(const Matrix& x, std::span<const double> residual,
                                   std::span<const std::size_t> rows, const GbtConfig& config);

/// Throws DataError when rows < 2 * min_samples_leaf.
GbtEnsemble gbt_fit(const Matrix& x, std::span<const double> y, const GbtConfig& config,
                    Exec exec = Exec::parallel);

/// Training MSE after 0, 1, ..., trees.size() rounds.
std::vector<double> staged_mse(const GbtEnsemble& model, const Matrix& x, std::span<const double> y);

}  // namespace roughbattery::models
