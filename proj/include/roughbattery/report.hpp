#pragma once

// Rendering of experiment outputs: JSON with sorted keys, Table 6 style
// markdown and plot-ready CSV. Every renderer takes the effective config so
// the artifact records what produced it.

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"
#include "roughbattery/experiment.hpp"
#include "roughbattery/metrics.hpp"

namespace roughbattery::eval {

enum class ReportFormat { json, markdown, csv };

ReportFormat parse_report_format(std::string_view text);

/// Markdown header shared by every comparison table.
std::string markdown_header();

/// One markdown row; reals use two decimals, an undefined TVS prints "n/a".
std::string markdown_row(std::string_view label, const MetricsReport& m, std::size_t features_before,
                         std::size_t features_after);

nlohmann::json to_json(const ComparisonRow& row);
nlohmann::json to_json(const ComparisonTable& table, const ExperimentConfig& config);
nlohmann::json to_json(const FittedPipeline& pipeline);

/// Fixed JSON text: two-space indent, keys sorted, trailing newline.
std::string dump(const nlohmann::json& j);

std::string render(const ComparisonTable& table, const ExperimentConfig& config, ReportFormat format);

/// observed,predicted pairs preceded by "# " lines carrying the config.
std::string render_predictions_csv(std::span<const double> observed, std::span<const double> predicted,
                                   const ExperimentConfig& config, std::string_view label);

/// Single-column CSV ("step,loss") of a training trace.
std::string render_loss_trace_csv(std::span<const double> trace, const ExperimentConfig& config);

/// "# config: {...}" comment lines for CSV artifacts.
std::vector<std::string> config_comments(const ExperimentConfig& config);

/// Writes bytes to `destination`, replacing it. Throws IoError.
void write_text(const std::filesystem::path& destination, std::string_view content);

void emit_report(const ComparisonTable& table, const ExperimentConfig& config, ReportFormat format,
                 const std::filesystem::path& destination);

}  // namespace roughbattery::eval
