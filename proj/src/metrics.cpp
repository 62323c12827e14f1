#include <cmath>

#include "roughbattery/errors.hpp"
#include "roughbattery/metrics.hpp"

namespace roughbattery::eval {

namespace {

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// population variance, two-pass
double variance(std::span<const double> v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

}  // namespace

MetricsReport compute_metrics(std::span<const double> observed, std::span<const double> predicted) {
  if (observed.empty()) throw DataError("metrics need at least one pair");
  if (observed.size() != predicted.size()) {
    throw DataError("observed has " + std::to_string(observed.size()) + " values, predicted has " +
                    std::to_string(predicted.size()));
  }
  const std::size_t m = observed.size();
  std::vector<double> residual(m);
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (!std::isfinite(observed[i]) || !std::isfinite(predicted[i])) {
      throw DataError("non-finite value at index " + std::to_string(i));
    }
    residual[i] = observed[i] - predicted[i];
    abs_sum += std::abs(residual[i]);
    sq_sum += residual[i] * residual[i];
  }

  MetricsReport r;
  r.n = m;
  r.mae = abs_sum / static_cast<double>(m);
  r.mse = sq_sum / static_cast<double>(m);
  r.rmse = std::sqrt(r.mse);

  const double var_observed = variance(observed);
  if (var_observed > 0.0) {
    r.tvs = 1.0 - variance(residual) / var_observed;
    r.r2 = 1.0 - r.mse / var_observed;  // SS_res / SS_tot with both divided by m
  }
  return r;
}

nlohmann::json to_json(const MetricsReport& m) {
  nlohmann::json j{{"mae", m.mae}, {"mse", m.mse}, {"rmse", m.rmse}, {"n", m.n}};
  j["tvs"] = m.tvs ? nlohmann::json(*m.tvs) : nlohmann::json(nullptr);
  j["r2"] = m.r2 ? nlohmann::json(*m.r2) : nlohmann::json(nullptr);
  return j;
}

}  // namespace roughbattery::eval
