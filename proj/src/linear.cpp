#include <algorithm>
#include <cmath>

#include "roughbattery/errors.hpp"
#include "roughbattery/linear.hpp"

namespace roughbattery::models {

namespace {

constexpr double kSingularTolerance = 1e-12;
constexpr double kFallbackRidge = 1e-8;

// Solves G a = b for symmetric G by Cholesky. Returns false if a pivot is
// <= tolerance * max diagonal (treated as singular).
bool cholesky_solve(std::vector<double> g, std::vector<double> b, std::size_t n, double tolerance,
                    std::vector<double>& solution) {
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(g[i * n + i]));
  const double floor = tolerance * max_diag;
  for (std::size_t j = 0; j < n; ++j) {
    double d = g[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= g[j * n + k] * g[j * n + k];
    if (!(d > floor) || !(d > 0.0)) return false;
    const double ljj = std::sqrt(d);
    g[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = g[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= g[i * n + k] * g[j * n + k];
      g[i * n + j] = s / ljj;
    }
  }
  // L z = b
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= g[i * n + k] * b[k];
    b[i] = s / g[i * n + i];
  }
  // L^T a = z
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= g[k * n + i] * b[k];
    b[i] = s / g[i * n + i];
  }
  solution = std::move(b);
  return true;
}

}  // namespace

double LinearModel::predict(std::span<const double> x) const {
  if (x.size() != coefficients.size()) {
    throw DataError("input has " + std::to_string(x.size()) + " features, model expects " +
                    std::to_string(coefficients.size()));
  }
  double acc = intercept;
  for (std::size_t i = 0; i < x.size(); ++i) acc += coefficients[i] * x[i];
  return acc;
}

LinearModel linear_fit(const Matrix& x, std::span<const double> y, double ridge) {
  if (x.rows() == 0) throw DataError("linear fit needs at least one row");
  if (x.rows() != y.size()) throw DataError("feature rows and target length differ");
  if (!(ridge >= 0.0)) throw DataError("ridge strength must be >= 0");

  // Normal equations of the intercept-augmented design [X 1].
  const std::size_t p = x.cols();
  const std::size_t n = p + 1;
  std::vector<double> gram(n * n, 0.0);
  std::vector<double> rhs(n, 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    for (std::size_t i = 0; i < n; ++i) {
      const double ai = i < p ? row[i] : 1.0;
      rhs[i] += ai * y[r];
      for (std::size_t j = 0; j <= i; ++j) gram[i * n + j] += ai * (j < p ? row[j] : 1.0);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) gram[j * n + i] = gram[i * n + j];
  }

  auto solve = [&](double lambda, double tolerance, std::vector<double>& sol) {
    auto g = gram;
    for (std::size_t i = 0; i < p; ++i) g[i * n + i] += lambda;
    return cholesky_solve(std::move(g), rhs, n, tolerance, sol);
  };

  LinearModel model;
  model.ridge = ridge;
  std::vector<double> sol;
  // with ridge > 0 the system is positive definite; any positive pivot is accepted
  if (!solve(ridge, ridge > 0.0 ? 0.0 : kSingularTolerance, sol)) {
    if (ridge > 0.0 || !solve(kFallbackRidge, 0.0, sol)) {
      throw DataError("normal equations are singular");
    }
    model.ridge = kFallbackRidge;
    model.regularized = true;
  }
  model.coefficients.assign(sol.begin(), sol.begin() + static_cast<std::ptrdiff_t>(p));
  model.intercept = sol[p];
  return model;
}

}  // namespace roughbattery::models
