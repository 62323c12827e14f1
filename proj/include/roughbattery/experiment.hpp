#pragma once

// End-to-end experiment: split, preprocessing fitted on the training rows,
// optional rough-set feature reduction, model training and test metrics.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "roughbattery/exec.hpp"
#include "roughbattery/gbt.hpp"
#include "roughbattery/metrics.hpp"
#include "roughbattery/mlp.hpp"
#include "roughbattery/regressor.hpp"
#include "roughbattery/roughsets.hpp"
#include "roughbattery/table.hpp"

namespace roughbattery::eval {

enum class ModelKind { mlp, linear, gbt };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  double ratio = 0.2;
  std::uint64_t seed = 42;
};

/// Seeded shuffle of 0..n-1; the first round(ratio * n) indices are the test set.
Split train_test_split(std::size_t n_rows, double ratio, std::uint64_t seed);

struct ExperimentConfig {
  ModelKind model = ModelKind::mlp;
  bool use_roughsets = true;
  double threshold = 0.0;
  tabular::DiscretizationSpec discretization;
  double test_ratio = 0.2;
  std::uint64_t seed = 42;
  std::string target = "Battery Life";
  /// One-hot encode numeric feature columns as well (the target is never encoded).
  bool treat_numeric_as_categorical = false;
  models::MlpConfig mlp;
  models::GbtConfig gbt;
  double ridge = 0.0;
  Exec exec = Exec::parallel;

  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& c);

/// Everything fitted on the training rows.
struct FittedPipeline {
  tabular::ImputeParams imputer;
  tabular::EncoderMap encoder;
  tabular::ScalerParams scaler;
  std::vector<std::string> features;  // encoded feature names before reduction
  std::vector<std::string> retained;  // after reduction (== features without it)
  std::optional<rough::ReductResult> reduct;
};

struct ExperimentResult {
  MetricsReport metrics;
  std::size_t features_before = 0;
  std::size_t features_after = 0;
  FittedPipeline pipeline;
  models::RegressorModel model;
  std::vector<std::size_t> test_rows;
  std::vector<double> observed;
  std::vector<double> predicted;
  std::vector<double> loss_trace;  // MLP epochs, GBT rounds, single entry for linear
};

/// Stage errors are rethrown as StageError tagged with the stage name.
ExperimentResult run_experiment(const tabular::DataTable& table, const ExperimentConfig& config);
ExperimentResult run_experiment(const tabular::DataTable& table, const ExperimentConfig& config,
                                const Split& split);

/// Steps before the split: drop timestamps, optional numeric retyping.
tabular::DataTable prepare_table(const tabular::DataTable& table, const ExperimentConfig& config);

/// Fits imputer, encoder, scaler and (optionally) the rough-set reduction on `train`.
FittedPipeline fit_pipeline(const tabular::DataTable& train, const ExperimentConfig& config);

/// Applies a fitted pipeline; returns the feature matrix (retained columns) and the target.
std::pair<Matrix, std::vector<double>> transform(const tabular::DataTable& table, const FittedPipeline& fitted,
                                                 const ExperimentConfig& config);

/// Discretized information table built from a scaled feature table and the target.
rough::InformationTable build_information_table(const tabular::DataTable& features,
                                                std::span<const double> target, const std::string& target_name,
                                                const tabular::DiscretizationSpec& spec);

struct ComparisonRow {
  std::string label;
  ModelKind model = ModelKind::mlp;
  bool roughsets = false;
  std::optional<MetricsReport> metrics;
  std::string error;  // set when the cell failed
  std::size_t features_before = 0;
  std::size_t features_after = 0;
  std::vector<double> observed;
  std::vector<double> predicted;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
  Split split;
};

std::string row_label(ModelKind model, bool roughsets);

/// Runs {mlp, linear, gbt} x {with, without rough sets} on one shared split.
/// A failing cell records its error; the others still run.
ComparisonTable compare_models(const tabular::DataTable& table, const ExperimentConfig& base);

}  // namespace roughbattery::eval
