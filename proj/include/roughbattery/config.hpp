#pragma once

// Plain-text configuration files in INI layout.
//
// Run config:
//   [data]      path, schema, out, target
//   [pipeline]  roughsets (on|off), threshold, bins, decision_bins, ratio, seed,
//               numeric_as_categorical (on|off)
//   [model]     kind (mlp|linear|gbt), ridge
//   [mlp]       hidden (comma list), learning_rate, beta1, beta2, epsilon, epochs, batch_size
//   [gbt]       rounds, max_depth, learning_rate, lambda, min_samples_leaf
//
// Schema file, one section per column in file order:
//   [missing]          sentinels = NA, N/A
//   [column <name>]    kind = numeric|categorical|timestamp, unit = ..., range = lo, hi
//
// Unknown sections or keys are rejected.

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "roughbattery/experiment.hpp"
#include "roughbattery/table.hpp"

namespace roughbattery::config {

struct RunConfig {
  std::optional<std::filesystem::path> data;
  std::optional<std::filesystem::path> schema;
  std::optional<std::filesystem::path> out;
  eval::ExperimentConfig experiment;
  bool seed_from_file = false;
};

/// Overlays the file's values onto `base`. Throws ParseError or SchemaError.
void apply_run_config(std::istream& in, RunConfig& base);
/// Relative data and schema paths resolve against the file's directory.
void load_run_config(const std::filesystem::path& path, RunConfig& base);

struct SchemaFile {
  std::vector<tabular::ColumnSchema> columns;
  tabular::CsvOptions csv;
};

SchemaFile read_schema(std::istream& in);
SchemaFile load_schema(const std::filesystem::path& path);

/// "on"/"off" (also true/false, yes/no, 1/0).
bool parse_switch(std::string_view text);

}  // namespace roughbattery::config
