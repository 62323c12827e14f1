#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "roughbattery/cli.hpp"
#include "roughbattery/config.hpp"
#include "roughbattery/errors.hpp"
#include "roughbattery/experiment.hpp"
#include "roughbattery/report.hpp"

namespace roughbattery::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Flags {
  std::optional<std::string> config;
  std::optional<std::string> data;
  std::optional<std::string> schema;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> model;
  std::optional<std::string> roughsets;
  std::optional<double> threshold;
  std::optional<int> bins;
  std::optional<double> ratio;
  std::size_t rows = 1000;
  bool serial = false;
};

void add_common(CLI::App* cmd, Flags& f, bool pipeline) {
  cmd->add_option("--config", f.config, "INI config file");
  cmd->add_option("--data", f.data, "input CSV");
  cmd->add_option("--schema", f.schema, "schema file (default: built-in beach schema)");
  cmd->add_option("-o,--out", f.out, "output file or directory");
  cmd->add_option("--seed", f.seed, "global seed (fallback: ROUGHBATTERY_SEED)");
  if (!pipeline) return;
  cmd->add_option("--model", f.model, "mlp | linear | gbt")->check(CLI::IsMember({"mlp", "linear", "gbt"}));
  cmd->add_option("--roughsets", f.roughsets, "on | off")->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--threshold", f.threshold, "significance threshold for the reduction");
  cmd->add_option("--bins", f.bins, "equal-frequency bins per feature");
  cmd->add_option("--ratio", f.ratio, "test fraction in (0, 1)");
  cmd->add_flag("--serial", f.serial, "run kernels on one thread");
}

std::optional<std::uint64_t> env_seed() {
  const char* text = std::getenv("ROUGHBATTERY_SEED");
  if (text == nullptr || *text == '\0') return std::nullopt;
  std::uint64_t v = 0;
  const std::string_view s(text);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw SchemaError("ROUGHBATTERY_SEED is not an unsigned integer: '" + std::string(s) + "'");
  }
  return v;
}

/// defaults < config file < ROUGHBATTERY_SEED (seed only, when the file has none) < flags
config::RunConfig resolve(const Flags& f) {
  config::RunConfig rc;
  if (f.config) config::load_run_config(*f.config, rc);
  auto& e = rc.experiment;
  if (!rc.seed_from_file) {
    if (auto s = env_seed()) e.seed = *s;
  }
  if (f.data) rc.data = *f.data;
  if (f.schema) rc.schema = *f.schema;
  if (f.out) rc.out = *f.out;
  if (f.seed) e.seed = *f.seed;
  if (f.model) e.model = eval::parse_model_kind(*f.model);
  if (f.roughsets) e.use_roughsets = config::parse_switch(*f.roughsets);
  if (f.threshold) e.threshold = *f.threshold;
  if (f.bins) e.discretization.bins_per_feature = *f.bins;
  if (f.ratio) e.test_ratio = *f.ratio;
  if (f.serial) e.exec = Exec::serial;
  e.validate();
  return rc;
}

tabular::DataTable load_data(const config::RunConfig& rc) {
  if (!rc.data) throw UsageError("no dataset: pass --data or set [data] path");
  if (rc.schema) {
    const auto schema = config::load_schema(*rc.schema);
    return tabular::load_csv(*rc.data, schema.columns, schema.csv);
  }
  return tabular::load_csv(*rc.data, tabular::beach_schema());
}

fs::path require_out(const config::RunConfig& rc) {
  if (!rc.out) throw UsageError("this subcommand writes several files: pass --out <directory>");
  return *rc.out;
}

/// Artifacts are rendered in memory first, then written together.
using Artifacts = std::map<std::string, std::string>;

void write_all(const fs::path& dir, const Artifacts& files) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
  for (const auto& [name, content] : files) eval::write_text(dir / name, content);
}

void write_single(const config::RunConfig& rc, const std::string& content, std::ostream& out) {
  if (rc.out) {
    eval::write_text(*rc.out, content);
  } else {
    out << content;
  }
}

nlohmann::json stamped(nlohmann::json j, const eval::ExperimentConfig& e) {
  j["config"] = eval::to_json(e);
  j["seed"] = e.seed;
  return j;
}

std::string matrix_csv(const std::vector<std::string>& columns, const Matrix& x, std::span<const double> y,
                       const std::string& target, const eval::ExperimentConfig& e) {
  std::ostringstream s;
  for (const auto& c : eval::config_comments(e)) s << "# " << c << "\n";
  auto header = columns;
  header.push_back(target);
  tabular::write_csv_record(s, header);
  std::vector<std::string> fields(header.size());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) fields[c] = tabular::format_number(x(r, c));
    fields.back() = tabular::format_number(y[r]);
    tabular::write_csv_record(s, fields);
  }
  return s.str();
}

int cmd_validate(const config::RunConfig& rc, std::ostream& out, std::ostream& err) {
  const auto table = load_data(rc);
  const auto report = tabular::validate_ranges(table);
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : report.columns) {
    cols.push_back({{"column", c.column},
                    {"min", c.min},
                    {"max", c.max},
                    {"checked", c.checked},
                    {"violations", c.violations}});
    if (c.violations > 0) {
      err << "warning: " << c.column << ": " << c.violations << " of " << c.checked << " values outside ["
          << tabular::format_number(c.min) << ", " << tabular::format_number(c.max) << "]\n";
    }
  }
  nlohmann::json j{{"rows", table.num_rows()}, {"columns", cols}, {"total_violations", report.total_violations()}};
  write_single(rc, eval::dump(stamped(j, rc.experiment)), out);
  return kExitOk;
}

int cmd_preprocess(const config::RunConfig& rc, std::ostream& out) {
  const auto dir = require_out(rc);
  auto e = rc.experiment;
  e.use_roughsets = false;
  const auto table = eval::prepare_table(load_data(rc), e);
  const auto fitted = eval::fit_pipeline(table, e);
  const auto [x, y] = eval::transform(table, fitted, e);
  Artifacts files;
  files["preprocessed.csv"] = matrix_csv(fitted.retained, x, y, e.target, e);
  files["pipeline.json"] = eval::dump(stamped(eval::to_json(fitted), e));
  write_all(dir, files);
  out << "wrote " << x.rows() << " rows x " << x.cols() << " features to " << dir.string() << "\n";
  return kExitOk;
}

int cmd_reduce(const config::RunConfig& rc, std::ostream& out) {
  const auto dir = require_out(rc);
  auto e = rc.experiment;
  e.use_roughsets = true;
  const auto table = eval::prepare_table(load_data(rc), e);
  const auto fitted = eval::fit_pipeline(table, e);
  const auto [x, y] = eval::transform(table, fitted, e);
  nlohmann::json j = rough::to_json(*fitted.reduct);
  j["retained"] = fitted.retained;
  j["features_before"] = fitted.features.size();
  j["features_after"] = fitted.retained.size();
  Artifacts files;
  files["reduct.json"] = eval::dump(stamped(j, e));
  files["reduced.csv"] = matrix_csv(fitted.retained, x, y, e.target, e);
  write_all(dir, files);
  out << "retained " << fitted.retained.size() << " of " << fitted.features.size() << " features\n";
  return kExitOk;
}

int cmd_train(const config::RunConfig& rc, std::ostream& out) {
  const auto dir = require_out(rc);
  const auto& e = rc.experiment;
  const auto result = eval::run_experiment(load_data(rc), e);
  nlohmann::json j{{"model", models::model_to_json(result.model)},
                   {"pipeline", eval::to_json(result.pipeline)},
                   {"test_metrics", eval::to_json(result.metrics)}};
  Artifacts files;
  files["model.json"] = eval::dump(stamped(j, e));
  files["loss_trace.csv"] = eval::render_loss_trace_csv(result.loss_trace, e);
  write_all(dir, files);
  out << "trained " << eval::to_string(e.model) << " on " << result.pipeline.retained.size() << " features\n";
  return kExitOk;
}

int cmd_evaluate(const config::RunConfig& rc, std::ostream& out) {
  const auto& e = rc.experiment;
  const auto result = eval::run_experiment(load_data(rc), e);
  nlohmann::json j = eval::to_json(result.metrics);
  j["features_before"] = result.features_before;
  j["features_after"] = result.features_after;
  write_single(rc, eval::dump(stamped(j, e)), out);
  return kExitOk;
}

int cmd_compare(const config::RunConfig& rc, std::ostream& out, std::ostream& err) {
  const auto dir = require_out(rc);
  const auto& e = rc.experiment;
  const auto table = eval::compare_models(load_data(rc), e);
  Artifacts files;
  files["comparison.json"] = eval::render(table, e, eval::ReportFormat::json);
  files["comparison.md"] = eval::render(table, e, eval::ReportFormat::markdown);
  files["comparison.csv"] = eval::render(table, e, eval::ReportFormat::csv);
  for (const auto& row : table.rows) {
    if (!row.metrics) continue;
    const auto name = "predictions_" + std::string(eval::to_string(row.model)) + (row.roughsets ? "_roughsets" : "") + ".csv";
    files[name] = eval::render_predictions_csv(row.observed, row.predicted, e, row.label);
  }
  write_all(dir, files);
  out << files["comparison.md"];
  bool failed = false;
  for (const auto& row : table.rows) {
    if (!row.error.empty()) {
      err << "error: " << row.label << ": " << row.error << "\n";
      failed = true;
    }
  }
  return failed ? kExitData : kExitOk;
}

int cmd_synth(const config::RunConfig& rc, std::size_t rows, std::ostream& out) {
  const auto table = tabular::synth_generate(rows, rc.experiment.seed);
  nlohmann::json meta{{"rows", rows}, {"seed", rc.experiment.seed}};
  const std::vector<std::string> comments{"synth: " + meta.dump()};
  std::ostringstream s;
  tabular::write_csv(table, s, comments);
  write_single(rc, s.str(), out);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Battery-life prediction with rough-set feature reduction", "roughbattery"};
  app.require_subcommand(1);
  Flags flags;
  auto* validate = app.add_subcommand("validate", "report values outside each column's soft range");
  auto* preprocess = app.add_subcommand("preprocess", "impute, one-hot encode and scale; writes CSV + pipeline JSON");
  auto* reduce = app.add_subcommand("reduce", "rough-set feature reduction; writes reduct JSON + reduced CSV");
  auto* train = app.add_subcommand("train", "train one model; writes model JSON + loss-trace CSV");
  auto* evaluate = app.add_subcommand("evaluate", "train and report test metrics as JSON");
  auto* compare = app.add_subcommand("compare", "six-cell model x reduction comparison");
  auto* synth = app.add_subcommand("synth", "generate a synthetic beach dataset");
  for (auto* cmd : {validate, preprocess, reduce, train, evaluate, compare}) add_common(cmd, flags, true);
  add_common(synth, flags, false);
  synth->add_option("--rows", flags.rows, "rows to generate")->check(CLI::PositiveNumber);

  CLI::App* used = &app;
  try {
    app.parse(argc, argv);
    for (auto* cmd : app.get_subcommands()) used = cmd;
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    for (auto* cmd : app.get_subcommands()) used = cmd;
    err << "error: " << e.what() << "\n\n" << used->help();
    return kExitUsage;
  }

  try {
    const auto rc = resolve(flags);
    if (used == validate) return cmd_validate(rc, out, err);
    if (used == preprocess) return cmd_preprocess(rc, out);
    if (used == reduce) return cmd_reduce(rc, out);
    if (used == train) return cmd_train(rc, out);
    if (used == evaluate) return cmd_evaluate(rc, out);
    if (used == compare) return cmd_compare(rc, out, err);
    return cmd_synth(rc, flags.rows, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << used->help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace roughbattery::cli
