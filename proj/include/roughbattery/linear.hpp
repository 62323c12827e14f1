#pragma once

#include <span>
#include <vector>

#include "roughbattery/matrix.hpp"

namespace roughbattery::models {

struct LinearModel {
  std::vector<double> coefficients;
  double intercept = 0.0;
  double ridge = 0.0;
  /// Set when the unregularized system was singular and the fit fell back to ridge 1e-8.
  bool regularized = false;

  double predict(std::span<const double> x) const;
  bool operator==(const LinearModel&) const = default;
};

/// Least squares with an unpenalized intercept, minimizing
/// sum (y - X a - c)^2 + ridge * |a|^2 through the normal equations.
LinearModel linear_fit(const Matrix& x, std::span<const double> y, double ridge = 0.0);

}  // namespace roughbattery::models
