#pragma once

// Tabular core: column-typed tables, CSV ingestion, range validation and the
// preprocessing transforms (drop, impute, one-hot, z-score, discretize).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace roughbattery::tabular {

enum class ColumnKind { numeric, categorical, timestamp };

std::string_view to_string(ColumnKind kind);
ColumnKind parse_column_kind(std::string_view text);

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  std::string unit;
  std::optional<std::pair<double, double>> soft_range;

  bool operator==(const ColumnSchema&) const = default;
};

/// Throws SchemaError on duplicate names, a soft range on a non-numeric column, or min > max.
void validate_schema(std::span<const ColumnSchema> schema);

struct Missing {
  bool operator==(const Missing&) const = default;
};

/// A cell is missing, a number (numeric columns) or a label (categorical and timestamp columns).
using Cell = std::variant<Missing, double, std::string>;

inline bool is_missing(const Cell& c) { return std::holds_alternative<Missing>(c); }

/// Immutable table. Construction checks that every row has one cell per column
/// and that each cell's type agrees with its column kind.
class DataTable {
public:
  DataTable() = default;
  DataTable(std::vector<ColumnSchema> schema, std::vector<std::vector<Cell>> rows);

  const std::vector<ColumnSchema>& schema() const noexcept { return schema_; }
  const std::vector<std::vector<Cell>>& rows() const noexcept { return rows_; }
  std::size_t num_rows() const noexcept { return rows_.size(); }
  std::size_t num_cols() const noexcept { return schema_.size(); }
  const Cell& at(std::size_t row, std::size_t col) const { return rows_.at(row).at(col); }

  std::optional<std::size_t> find_column(std::string_view name) const;
  /// Throws SchemaError naming the column if absent.
  std::size_t column_index(std::string_view name) const;
  std::vector<std::string> column_names() const;

  /// Values of a numeric column; throws DataError if any cell is missing.
  std::vector<double> numeric_column(std::size_t col) const;
  std::size_t missing_count() const;

  /// Rows in the given order (indices may repeat).
  DataTable select_rows(std::span<const std::size_t> indices) const;
  /// Columns in the given order.
  DataTable select_columns(std::span<const std::string> names) const;

  bool operator==(const DataTable&) const = default;

private:
  std::vector<ColumnSchema> schema_;
  std::vector<std::vector<Cell>> rows_;
};

// ---------------------------------------------------------------------------
// CSV

struct CsvOptions {
  /// Cell values parsed as missing in addition to the empty string.
  std::vector<std::string> missing_sentinels{"NA"};
};

/// Parses CSV text. The header must name exactly the schema columns, in any
/// order; the resulting table uses schema order. Lines starting with '#' before
/// the header are skipped. Unparseable numbers and sentinels become missing.
DataTable read_csv(std::istream& in, std::span<const ColumnSchema> schema,
                   const CsvOptions& options = {});
DataTable load_csv(const std::filesystem::path& path, std::span<const ColumnSchema> schema,
                   const CsvOptions& options = {});

/// Writes header + rows, missing cells as empty fields. `comments` are emitted
/// first as "# ..." lines. Numbers use the shortest round-trip representation.
void write_csv(const DataTable& table, std::ostream& out,
               std::span<const std::string> comments = {});

std::string format_number(double v);

/// Raw CSV records (header included) with their starting line numbers; leading
/// '#' comment lines are skipped.
struct CsvRecord {
  std::vector<std::string> fields;
  std::size_t line = 0;
};
std::vector<CsvRecord> read_csv_records(std::istream& in);
void write_csv_record(std::ostream& out, std::span<const std::string> fields);

// ---------------------------------------------------------------------------
// Validation

struct ColumnRangeReport {
  std::string column;
  double min = 0.0;
  double max = 0.0;
  std::size_t checked = 0;
  std::size_t violations = 0;
};

struct ValidationReport {
  std::vector<ColumnRangeReport> columns;  // one entry per column with a soft range
  std::size_t total_violations() const;
};

/// Counts non-missing values outside each column's inclusive soft range.
ValidationReport validate_ranges(const DataTable& table);

// ---------------------------------------------------------------------------
// Transforms. All return new tables.

DataTable drop_columns(const DataTable& table, std::span<const std::string> names);
/// Drops every timestamp-kind column.
DataTable drop_timestamps(const DataTable& table);
/// Retypes the named numeric columns as categorical, labels being the number's text.
DataTable numeric_as_categorical(const DataTable& table, std::span<const std::string> names);

struct ImputeParams {
  std::vector<std::string> columns;
  std::vector<Cell> fill;  // mean for numeric, mode for label columns
};

ImputeParams fit_imputer(const DataTable& table);
DataTable apply_imputer(const DataTable& table, const ImputeParams& params);
/// Numeric: arithmetic mean of non-missing values. Labels: mode, ties lexicographic.
DataTable impute_mean(const DataTable& table);

struct EncodedColumn {
  std::string source;
  std::vector<std::string> labels;   // lexicographic
  std::vector<std::string> derived;  // "source=label", parallel to labels
  std::string unit;                  // source column unit, restored on decode
};

struct EncoderMap {
  std::vector<EncodedColumn> columns;
  const EncodedColumn* find_derived(std::string_view derived_name) const;
};

struct Encoded {
  DataTable table;
  EncoderMap map;
};

EncoderMap fit_encoder(const DataTable& table);
/// Throws DataError naming label and column for a label absent from the map.
DataTable apply_encoder(const DataTable& table, const EncoderMap& map);
/// Each categorical column with k labels becomes k adjacent 0/1 columns.
Encoded one_hot_encode(const DataTable& table);
/// Inverse of apply_encoder.
DataTable decode_one_hot(const DataTable& table, const EncoderMap& map);

struct ScalerParams {
  std::vector<std::string> columns;
  std::vector<double> mean;
  std::vector<double> stddev;  // population; 0 for constant columns

  bool operator==(const ScalerParams&) const = default;
};

struct Scaled {
  DataTable table;
  ScalerParams params;
};

ScalerParams fit_scaler(const DataTable& table);
DataTable apply_scaler(const DataTable& table, const ScalerParams& params);
/// z-score. Without params, fits them on `table`. Constant columns become 0.
Scaled standard_scale(const DataTable& table, const std::optional<ScalerParams>& params = std::nullopt);

/// Equal-frequency discretization settings for rough-set attributes.
struct DiscretizationSpec {
  int bins_per_feature = 10;
  int decision_bins = 5;

  void validate() const;
};

/// Bin labels 0..b'-1 (b' <= bins) from equal-frequency cut points. The k-th cut is
/// the order statistic at position ceil(k*n/bins); values equal to a cut go to the
/// lower bin. With at most `bins` distinct values each value gets its own bin.
std::vector<std::uint32_t> equal_frequency_bins(std::span<const double> values, int bins);

/// Discretizes every (numeric, non-missing) column with spec.bins_per_feature.
DataTable discretize(const DataTable& table, const DiscretizationSpec& spec);

// ---------------------------------------------------------------------------
// Synthetic data

/// The eight-column beach sensor schema with published soft ranges.
std::vector<ColumnSchema> beach_schema();
/// Ten-column layout of the full portal export (adds timestamp label and measurement id).
std::vector<ColumnSchema> beach_portal_schema();

const std::vector<std::string>& beach_names();
std::vector<std::string> planted_signal_columns();
std::vector<std::string> planted_noise_columns();

/// Deterministic synthetic table on beach_schema(). Battery Life is
///   5.5 + 3.0*t + 2.0*h + 0.4*beach_index + u,   u ~ U(-0.25, 0.25)
/// with t, h the water temperature and wave height rescaled to [0, 1] over their
/// soft ranges and beach_index the beach's position in beach_names(). Turbidity
/// (log-uniform), Transducer Depth and Wave Period (uniform) are independent noise.
DataTable synth_generate(std::size_t n_rows, std::uint64_t seed);

}  // namespace roughbattery::tabular
