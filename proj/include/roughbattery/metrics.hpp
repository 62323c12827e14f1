#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "json.hpp"

namespace roughbattery::eval {

struct MetricsReport {
  double mae = 0.0;
  double mse = 0.0;
  double rmse = 0.0;  // sqrt(mse)
  /// Test variance score, 1 - Var(observed - predicted) / Var(observed).
  /// Empty when Var(observed) = 0.
  std::optional<double> tvs;
  /// Coefficient of determination, 1 - SS_res / SS_tot. Empty when SS_tot = 0.
  std::optional<double> r2;
  std::size_t n = 0;

  bool operator==(const MetricsReport&) const = default;
};

/// Throws DataError on empty input, a length mismatch or non-finite values.
MetricsReport compute_metrics(std::span<const double> observed, std::span<const double> predicted);

nlohmann::json to_json(const MetricsReport& m);

}  // namespace roughbattery::eval
