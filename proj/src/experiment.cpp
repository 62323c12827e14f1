#include <cmath>
#include <numeric>

#include "roughbattery/errors.hpp"
#include "roughbattery/experiment.hpp"
#include "roughbattery/linear.hpp"
#include "roughbattery/random.hpp"

namespace roughbattery::eval {

namespace {

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

std::vector<std::string> feature_names(const tabular::DataTable& table, const std::string& target) {
  std::vector<std::string> out;
  for (const auto& col : table.schema()) {
    if (col.name != target) out.push_back(col.name);
  }
  return out;
}

Matrix to_matrix(const tabular::DataTable& table) {
  Matrix m(table.num_rows(), table.num_cols());
  for (std::size_t c = 0; c < table.num_cols(); ++c) {
    const auto values = table.numeric_column(c);
    for (std::size_t r = 0; r < values.size(); ++r) m(r, c) = values[r];
  }
  return m;
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::mlp: return "mlp";
    case ModelKind::linear: return "linear";
    case ModelKind::gbt: return "gbt";
  }
  return "mlp";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "mlp") return ModelKind::mlp;
  if (text == "linear") return ModelKind::linear;
  if (text == "gbt") return ModelKind::gbt;
  throw SchemaError("unknown model kind '" + std::string(text) + "' (expected mlp, linear or gbt)");
}

Split train_test_split(std::size_t n_rows, double ratio, std::uint64_t seed) {
  if (n_rows < 2) throw DataError("split needs at least 2 rows");
  if (!(ratio > 0.0 && ratio < 1.0)) throw DataError("split ratio must lie in (0, 1)");
  const auto n_test = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n_rows)));
  if (n_test < 1 || n_test >= n_rows) {
    throw DataError("split of " + std::to_string(n_rows) + " rows at ratio " + std::to_string(ratio) +
                    " leaves an empty side");
  }
  std::vector<std::size_t> order(n_rows);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  Split s;
  s.ratio = ratio;
  s.seed = seed;
  s.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  return s;
}

void ExperimentConfig::validate() const {
  if (!(test_ratio > 0.0 && test_ratio < 1.0)) throw SchemaError("split ratio must lie in (0, 1)");
  if (!(threshold >= 0.0)) throw SchemaError("reduction threshold must be >= 0");
  if (target.empty()) throw SchemaError("target column is not set");
  discretization.validate();
  mlp.validate();
  gbt.validate();
  if (!(ridge >= 0.0)) throw SchemaError("ridge must be >= 0");
}

nlohmann::json to_json(const ExperimentConfig& c) {
  return {
      {"model", to_string(c.model)},
      {"use_roughsets", c.use_roughsets},
      {"threshold", c.threshold},
      {"bins_per_feature", c.discretization.bins_per_feature},
      {"decision_bins", c.discretization.decision_bins},
      {"test_ratio", c.test_ratio},
      {"seed", c.seed},
      {"target", c.target},
      {"treat_numeric_as_categorical", c.treat_numeric_as_categorical},
      {"mlp",
       {{"hidden", c.mlp.hidden},
        {"learning_rate", c.mlp.learning_rate},
        {"beta1", c.mlp.beta1},
        {"beta2", c.mlp.beta2},
        {"epsilon", c.mlp.epsilon},
        {"epochs", c.mlp.epochs},
        {"batch_size", c.mlp.batch_size}}},
      {"gbt",
       {{"rounds", c.gbt.rounds},
        {"max_depth", c.gbt.max_depth},
        {"learning_rate", c.gbt.learning_rate},
        {"lambda", c.gbt.lambda},
        {"min_samples_leaf", c.gbt.min_samples_leaf}}},
      {"ridge", c.ridge},
  };
}

tabular::DataTable prepare_table(const tabular::DataTable& table, const ExperimentConfig& config) {
  auto prepared = tabular::drop_timestamps(table);
  const auto target = prepared.find_column(config.target);
  if (!target) throw SchemaError("target column '" + config.target + "' not found");
  if (prepared.schema()[*target].kind != tabular::ColumnKind::numeric) {
    throw SchemaError("target column '" + config.target + "' is not numeric");
  }
  if (config.treat_numeric_as_categorical) {
    std::vector<std::string> names;
    for (const auto& col : prepared.schema()) {
      if (col.kind == tabular::ColumnKind::numeric && col.name != config.target) names.push_back(col.name);
    }
    prepared = tabular::numeric_as_categorical(prepared, names);
  }
  return prepared;
}

rough::InformationTable build_information_table(const tabular::DataTable& features,
                                                std::span<const double> target, const std::string& target_name,
                                                const tabular::DiscretizationSpec& spec) {
  spec.validate();
  if (features.num_rows() == 0) throw DataError("cannot build an information table from zero rows");
  std::vector<std::vector<std::uint32_t>> columns;
  for (std::size_t c = 0; c < features.num_cols(); ++c) {
    columns.push_back(tabular::equal_frequency_bins(features.numeric_column(c), spec.bins_per_feature));
  }
  columns.push_back(tabular::equal_frequency_bins(target, spec.decision_bins));
  return rough::InformationTable::from_codes(features.column_names(), target_name, std::move(columns));
}

FittedPipeline fit_pipeline(const tabular::DataTable& train, const ExperimentConfig& config) {
  FittedPipeline fitted;
  fitted.imputer = stage("impute", [&] { return tabular::fit_imputer(train); });
  const auto imputed = stage("impute", [&] { return tabular::apply_imputer(train, fitted.imputer); });
  fitted.encoder = stage("encode", [&] { return tabular::fit_encoder(imputed); });
  const auto encoded = stage("encode", [&] { return tabular::apply_encoder(imputed, fitted.encoder); });
  fitted.features = feature_names(encoded, config.target);
  if (fitted.features.empty()) throw StageError("encode", "no feature columns besides the target");

  const auto scaled = stage("scale", [&] {
    const auto features = encoded.select_columns(fitted.features);
    fitted.scaler = tabular::fit_scaler(features);
    return tabular::apply_scaler(features, fitted.scaler);
  });

  if (config.use_roughsets) {
    stage("reduce", [&] {
      const auto target = encoded.numeric_column(encoded.column_index(config.target));
      const auto it = build_information_table(scaled, target, config.target, config.discretization);
      fitted.reduct = rough::quick_reduct(it, config.exec);
      fitted.retained = rough::significance_filter(it, config.threshold, config.exec);
      return 0;
    });
  } else {
    fitted.retained = fitted.features;
  }
  return fitted;
}

std::pair<Matrix, std::vector<double>> transform(const tabular::DataTable& table, const FittedPipeline& fitted,
                                                 const ExperimentConfig& config) {
  const auto imputed = stage("impute", [&] { return tabular::apply_imputer(table, fitted.imputer); });
  const auto encoded = stage("encode", [&] { return tabular::apply_encoder(imputed, fitted.encoder); });
  return stage("scale", [&] {
    const auto scaled = tabular::apply_scaler(encoded.select_columns(fitted.features), fitted.scaler);
    auto x = to_matrix(scaled.select_columns(fitted.retained));
    auto y = encoded.numeric_column(encoded.column_index(config.target));
    return std::pair{std::move(x), std::move(y)};
  });
}

ExperimentResult run_experiment(const tabular::DataTable& table, const ExperimentConfig& config) {
  stage("config", [&] { config.validate(); return 0; });
  const auto split = stage("split", [&] { return train_test_split(table.num_rows(), config.test_ratio, config.seed); });
  return run_experiment(table, config, split);
}

ExperimentResult run_experiment(const tabular::DataTable& table, const ExperimentConfig& config,
                                const Split& split) {
  stage("config", [&] { config.validate(); return 0; });
  const auto prepared = stage("prepare", [&] { return prepare_table(table, config); });
  const auto train = stage("split", [&] { return prepared.select_rows(split.train); });
  const auto test = stage("split", [&] { return prepared.select_rows(split.test); });

  ExperimentResult result;
  result.pipeline = fit_pipeline(train, config);
  result.features_before = result.pipeline.features.size();
  result.features_after = result.pipeline.retained.size();
  const auto [x_train, y_train] = transform(train, result.pipeline, config);
  const auto [x_test, y_test] = transform(test, result.pipeline, config);

  result.model = stage("train", [&]() -> models::RegressorModel {
    switch (config.model) {
      case ModelKind::mlp: {
        auto mlp = config.mlp;
        mlp.seed = config.seed;
        auto trained = models::mlp_train(mlp, x_train, y_train);
        result.loss_trace = std::move(trained.loss_trace);
        return std::move(trained.net);
      }
      case ModelKind::linear: {
        auto model = models::linear_fit(x_train, y_train, config.ridge);
        const auto fitted = models::predict(model, x_train, config.exec);
        result.loss_trace = {compute_metrics(y_train, fitted).mse};
        return model;
      }
      case ModelKind::gbt: {
        auto model = models::gbt_fit(x_train, y_train, config.gbt, config.exec);
        result.loss_trace = models::staged_mse(model, x_train, y_train);
        return model;
      }
    }
    throw DataError("unknown model kind");
  });

  stage("evaluate", [&] {
    result.predicted = models::predict(result.model, x_test, config.exec);
    result.observed = y_test;
    result.metrics = compute_metrics(result.observed, result.predicted);
    return 0;
  });
  result.test_rows = split.test;
  return result;
}

std::string row_label(ModelKind model, bool roughsets) {
  std::string base;
  switch (model) {
    case ModelKind::mlp: base = "MLP"; break;
    case ModelKind::linear: base = "Linear Regression"; break;
    case ModelKind::gbt: base = "GBT"; break;
  }
  return roughsets ? base + " + Rough sets" : base;
}

ComparisonTable compare_models(const tabular::DataTable& table, const ExperimentConfig& base) {
  stage("config", [&] { base.validate(); return 0; });
  ComparisonTable out;
  out.split = stage("split", [&] { return train_test_split(table.num_rows(), base.test_ratio, base.seed); });

  for (auto model : {ModelKind::mlp, ModelKind::linear, ModelKind::gbt}) {
    for (bool rs : {true, false}) {
      ComparisonRow row;
      row.label = row_label(model, rs);
      row.model = model;
      row.roughsets = rs;
      out.rows.push_back(std::move(row));
    }
  }

  auto run_cell = [&](ComparisonRow& row) {
    ExperimentConfig config = base;
    config.model = row.model;
    config.use_roughsets = row.roughsets;
    try {
      auto result = run_experiment(table, config, out.split);
      row.metrics = result.metrics;
      row.features_before = result.features_before;
      row.features_after = result.features_after;
      row.observed = std::move(result.observed);
      row.predicted = std::move(result.predicted);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  };

  const auto n = static_cast<std::ptrdiff_t>(out.rows.size());
  if (base.exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t k = 0; k < n; ++k) run_cell(out.rows[static_cast<std::size_t>(k)]);
  } else {
    for (auto& row : out.rows) run_cell(row);
  }
  return out;
}

}  // namespace roughbattery::eval
