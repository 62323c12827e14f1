#include <cstdio>
#include <fstream>
#include <sstream>

#include "roughbattery/errors.hpp"
#include "roughbattery/report.hpp"

namespace roughbattery::eval {

namespace {

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

ReportFormat parse_report_format(std::string_view text) {
  if (text == "json") return ReportFormat::json;
  if (text == "markdown" || text == "md") return ReportFormat::markdown;
  if (text == "csv") return ReportFormat::csv;
  throw SchemaError("unknown report format '" + std::string(text) + "'");
}

std::string markdown_header() {
  return "| Model Used | MAE | MSE | RMSE | TVS | Features before | Features after |\n"
         "|---|---:|---:|---:|---:|---:|---:|\n";
}

std::string markdown_row(std::string_view label, const MetricsReport& m, std::size_t features_before,
                         std::size_t features_after) {
  std::string out = "| ";
  out += label;
  out += " | " + fixed2(m.mae) + " | " + fixed2(m.mse) + " | " + fixed2(m.rmse) + " | ";
  out += m.tvs ? fixed2(*m.tvs) : std::string("n/a");
  out += " | " + std::to_string(features_before) + " | " + std::to_string(features_after) + " |\n";
  return out;
}

nlohmann::json to_json(const ComparisonRow& row) {
  nlohmann::json j{{"label", row.label},
                   {"model", to_string(row.model)},
                   {"roughsets", row.roughsets},
                   {"features_before", row.features_before},
                   {"features_after", row.features_after}};
  j["metrics"] = row.metrics ? to_json(*row.metrics) : nlohmann::json(nullptr);
  j["error"] = row.error.empty() ? nlohmann::json(nullptr) : nlohmann::json(row.error);
  return j;
}

nlohmann::json to_json(const ComparisonTable& table, const ExperimentConfig& config) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) rows.push_back(to_json(row));
  return {{"config", to_json(config)},
          {"seed", config.seed},
          {"split",
           {{"ratio", table.split.ratio},
            {"seed", table.split.seed},
            {"train_rows", table.split.train.size()},
            {"test_rows", table.split.test.size()}}},
          {"leakage_guard", "imputer, encoder, scaler and reduction fitted on training rows only"},
          {"rows", rows}};
}

nlohmann::json to_json(const FittedPipeline& p) {
  nlohmann::json imputer = nlohmann::json::object();
  for (std::size_t i = 0; i < p.imputer.columns.size(); ++i) {
    const auto& fill = p.imputer.fill[i];
    if (const auto* d = std::get_if<double>(&fill)) {
      imputer[p.imputer.columns[i]] = *d;
    } else if (const auto* s = std::get_if<std::string>(&fill)) {
      imputer[p.imputer.columns[i]] = *s;
    }
  }
  nlohmann::json encoder = nlohmann::json::array();
  for (const auto& col : p.encoder.columns) {
    encoder.push_back({{"source", col.source}, {"unit", col.unit}, {"labels", col.labels}, {"derived", col.derived}});
  }
  nlohmann::json scaler = nlohmann::json::array();
  for (std::size_t i = 0; i < p.scaler.columns.size(); ++i) {
    scaler.push_back({{"column", p.scaler.columns[i]}, {"mean", p.scaler.mean[i]}, {"stddev", p.scaler.stddev[i]}});
  }
  nlohmann::json j{{"imputer", imputer},
                   {"encoder", encoder},
                   {"scaler", scaler},
                   {"features", p.features},
                   {"retained", p.retained}};
  j["reduct"] = p.reduct ? rough::to_json(*p.reduct) : nlohmann::json(nullptr);
  return j;
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

std::vector<std::string> config_comments(const ExperimentConfig& config) {
  return {"config: " + to_json(config).dump(), "seed: " + std::to_string(config.seed)};
}

std::string render(const ComparisonTable& table, const ExperimentConfig& config, ReportFormat format) {
  switch (format) {
    case ReportFormat::json:
      return dump(to_json(table, config));
    case ReportFormat::markdown: {
      std::string out = "<!-- config: " + to_json(config).dump() + " -->\n";
      out += "<!-- seed: " + std::to_string(config.seed) + " -->\n\n";
      out += markdown_header();
      for (const auto& row : table.rows) {
        if (row.metrics) {
          out += markdown_row(row.label, *row.metrics, row.features_before, row.features_after);
        } else {
          out += "| " + row.label + " | failed | failed | failed | failed | - | - |\n";
        }
      }
      for (const auto& row : table.rows) {
        if (!row.error.empty()) out += "\n" + row.label + " failed: " + row.error + "\n";
      }
      return out;
    }
    case ReportFormat::csv: {
      std::ostringstream out;
      for (const auto& c : config_comments(config)) out << "# " << c << "\n";
      const std::vector<std::string> header{"model", "mae",  "mse",  "rmse", "tvs", "r2", "features_before",
                                            "features_after", "error"};
      tabular::write_csv_record(out, header);
      auto num = [](const std::optional<double>& v) { return v ? tabular::format_number(*v) : std::string(); };
      for (const auto& row : table.rows) {
        std::vector<std::string> fields{row.label};
        if (row.metrics) {
          const auto& m = *row.metrics;
          for (auto v : {m.mae, m.mse, m.rmse}) fields.push_back(tabular::format_number(v));
          fields.push_back(num(m.tvs));
          fields.push_back(num(m.r2));
        } else {
          fields.insert(fields.end(), 5, "");
        }
        fields.push_back(std::to_string(row.features_before));
        fields.push_back(std::to_string(row.features_after));
        fields.push_back(row.error);
        tabular::write_csv_record(out, fields);
      }
      return out.str();
    }
  }
  return {};
}

std::string render_predictions_csv(std::span<const double> observed, std::span<const double> predicted,
                                   const ExperimentConfig& config, std::string_view label) {
  if (observed.size() != predicted.size()) throw DataError("observed and predicted lengths differ");
  std::ostringstream out;
  for (const auto& c : config_comments(config)) out << "# " << c << "\n";
  out << "# model: " << label << "\n";
  out << "observed,predicted\n";
  for (std::size_t i = 0; i < observed.size(); ++i) {
    out << tabular::format_number(observed[i]) << ',' << tabular::format_number(predicted[i]) << '\n';
  }
  return out.str();
}

std::string render_loss_trace_csv(std::span<const double> trace, const ExperimentConfig& config) {
  std::ostringstream out;
  for (const auto& c : config_comments(config)) out << "# " << c << "\n";
  out << "step,loss\n";
  for (std::size_t i = 0; i < trace.size(); ++i) out << i << ',' << tabular::format_number(trace[i]) << '\n';
  return out.str();
}

void write_text(const std::filesystem::path& destination, std::string_view content) {
  std::ofstream out(destination, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + destination.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoError("failed writing '" + destination.string() + "'");
}

void emit_report(const ComparisonTable& table, const ExperimentConfig& config, ReportFormat format,
                 const std::filesystem::path& destination) {
  write_text(destination, render(table, config, format));
}

}  // namespace roughbattery::eval
