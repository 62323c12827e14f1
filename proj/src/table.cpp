#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "roughbattery/errors.hpp"
#include "roughbattery/table.hpp"

namespace roughbattery::tabular {

std::string_view to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::numeric: return "numeric";
    case ColumnKind::categorical: return "categorical";
    case ColumnKind::timestamp: return "timestamp";
  }
  return "numeric";
}

ColumnKind parse_column_kind(std::string_view text) {
  if (text == "numeric") return ColumnKind::numeric;
  if (text == "categorical") return ColumnKind::categorical;
  if (text == "timestamp") return ColumnKind::timestamp;
  throw SchemaError("unknown column kind '" + std::string(text) + "'");
}

void validate_schema(std::span<const ColumnSchema> schema) {
  std::unordered_set<std::string_view> seen;
  for (const auto& col : schema) {
    if (col.name.empty()) throw SchemaError("column with empty name");
    if (!seen.insert(col.name).second) throw SchemaError("duplicate column '" + col.name + "'");
    if (col.soft_range) {
      if (col.kind != ColumnKind::numeric) {
        throw SchemaError("soft range on non-numeric column '" + col.name + "'");
      }
      if (!(col.soft_range->first <= col.soft_range->second)) {
        throw SchemaError("soft range min > max for column '" + col.name + "'");
      }
    }
  }
}

// ---------------------------------------------------------------------------

DataTable::DataTable(std::vector<ColumnSchema> schema, std::vector<std::vector<Cell>> rows)
    : schema_(std::move(schema)), rows_(std::move(rows)) {
  validate_schema(schema_);
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    if (rows_[r].size() != schema_.size()) {
      throw DataError("row " + std::to_string(r) + " has " + std::to_string(rows_[r].size()) +
                      " cells, schema has " + std::to_string(schema_.size()));
    }
    for (std::size_t c = 0; c < schema_.size(); ++c) {
      const Cell& cell = rows_[r][c];
      if (is_missing(cell)) continue;
      const bool numeric = schema_[c].kind == ColumnKind::numeric;
      if (numeric != std::holds_alternative<double>(cell)) {
        throw DataError("cell (" + std::to_string(r) + ", '" + schema_[c].name +
                        "') does not match column kind " + std::string(to_string(schema_[c].kind)));
      }
    }
  }
}

std::optional<std::size_t> DataTable::find_column(std::string_view name) const {
  for (std::size_t c = 0; c < schema_.size(); ++c) {
    if (schema_[c].name == name) return c;
  }
  return std::nullopt;
}

std::size_t DataTable::column_index(std::string_view name) const {
  if (auto c = find_column(name)) return *c;
  throw SchemaError("unknown column '" + std::string(name) + "'");
}

std::vector<std::string> DataTable::column_names() const {
  std::vector<std::string> names;
  names.reserve(schema_.size());
  for (const auto& c : schema_) names.push_back(c.name);
  return names;
}

std::vector<double> DataTable::numeric_column(std::size_t col) const {
  if (schema_.at(col).kind != ColumnKind::numeric) {
    throw DataError("column '" + schema_[col].name + "' is not numeric");
  }
  std::vector<double> out;
  out.reserve(rows_.size());
  for (const auto& row : rows_) {
    const auto* d = std::get_if<double>(&row[col]);
    if (!d) throw DataError("column '" + schema_[col].name + "' has missing values");
    out.push_back(*d);
  }
  return out;
}

std::size_t DataTable::missing_count() const {
  std::size_t n = 0;
  for (const auto& row : rows_) {
    n += static_cast<std::size_t>(std::count_if(row.begin(), row.end(), is_missing));
  }
  return n;
}

DataTable DataTable::select_rows(std::span<const std::size_t> indices) const {
  std::vector<std::vector<Cell>> rows;
  rows.reserve(indices.size());
  for (auto i : indices) rows.push_back(rows_.at(i));
  return DataTable(schema_, std::move(rows));
}

DataTable DataTable::select_columns(std::span<const std::string> names) const {
  std::vector<std::size_t> idx;
  std::vector<ColumnSchema> schema;
  for (const auto& n : names) {
    idx.push_back(column_index(n));
    schema.push_back(schema_[idx.back()]);
  }
  std::vector<std::vector<Cell>> rows;
  rows.reserve(rows_.size());
  for (const auto& row : rows_) {
    std::vector<Cell> out;
    out.reserve(idx.size());
    for (auto c : idx) out.push_back(row[c]);
    rows.push_back(std::move(out));
  }
  return DataTable(std::move(schema), std::move(rows));
}

// ---------------------------------------------------------------------------

std::size_t ValidationReport::total_violations() const {
  std::size_t n = 0;
  for (const auto& c : columns) n += c.violations;
  return n;
}

ValidationReport validate_ranges(const DataTable& table) {
  ValidationReport report;
  for (std::size_t c = 0; c < table.num_cols(); ++c) {
    const auto& col = table.schema()[c];
    if (!col.soft_range) continue;
    ColumnRangeReport entry{col.name, col.soft_range->first, col.soft_range->second, 0, 0};
    for (const auto& row : table.rows()) {
      if (const auto* d = std::get_if<double>(&row[c])) {
        ++entry.checked;
        if (*d < entry.min || *d > entry.max) ++entry.violations;
      }
    }
    report.columns.push_back(std::move(entry));
  }
  return report;
}

// ---------------------------------------------------------------------------

DataTable drop_columns(const DataTable& table, std::span<const std::string> names) {
  std::unordered_set<std::string> drop;
  for (const auto& n : names) {
    table.column_index(n);
    drop.insert(n);
  }
  std::vector<std::string> keep;
  for (const auto& col : table.schema()) {
    if (!drop.contains(col.name)) keep.push_back(col.name);
  }
  return table.select_columns(keep);
}

DataTable drop_timestamps(const DataTable& table) {
  std::vector<std::string> names;
  for (const auto& col : table.schema()) {
    if (col.kind == ColumnKind::timestamp) names.push_back(col.name);
  }
  return drop_columns(table, names);
}

DataTable numeric_as_categorical(const DataTable& table, std::span<const std::string> names) {
  auto schema = table.schema();
  std::vector<std::size_t> idx;
  for (const auto& n : names) {
    const auto c = table.column_index(n);
    if (schema[c].kind != ColumnKind::numeric) continue;
    schema[c].kind = ColumnKind::categorical;
    schema[c].soft_range.reset();
    idx.push_back(c);
  }
  auto rows = table.rows();
  for (auto& row : rows) {
    for (auto c : idx) {
      if (const auto* d = std::get_if<double>(&row[c])) row[c] = format_number(*d);
    }
  }
  return DataTable(std::move(schema), std::move(rows));
}

// ---------------------------------------------------------------------------

ImputeParams fit_imputer(const DataTable& table) {
  ImputeParams params;
  for (std::size_t c = 0; c < table.num_cols(); ++c) {
    const auto& col = table.schema()[c];
    params.columns.push_back(col.name);
    if (col.kind == ColumnKind::numeric) {
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& row : table.rows()) {
        if (const auto* d = std::get_if<double>(&row[c])) {
          sum += *d;
          ++n;
        }
      }
      if (n == 0) throw DataError("column '" + col.name + "' has no non-missing values");
      params.fill.emplace_back(sum / static_cast<double>(n));
    } else {
      std::map<std::string, std::size_t> counts;  // ordered: first max is lexicographically smallest
      for (const auto& row : table.rows()) {
        if (const auto* s = std::get_if<std::string>(&row[c])) ++counts[*s];
      }
      if (counts.empty()) throw DataError("column '" + col.name + "' has no non-missing values");
      auto best = counts.begin();
      for (auto it = counts.begin(); it != counts.end(); ++it) {
        if (it->second > best->second) best = it;
      }
      params.fill.emplace_back(best->first);
    }
  }
  return params;
}

DataTable apply_imputer(const DataTable& table, const ImputeParams& params) {
  std::vector<std::size_t> idx;
  for (const auto& name : params.columns) idx.push_back(table.column_index(name));
  auto rows = table.rows();
  for (auto& row : rows) {
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (is_missing(row[idx[k]])) row[idx[k]] = params.fill[k];
    }
  }
  return DataTable(table.schema(), std::move(rows));
}

DataTable impute_mean(const DataTable& table) { return apply_imputer(table, fit_imputer(table)); }

// ---------------------------------------------------------------------------

const EncodedColumn* EncoderMap::find_derived(std::string_view derived_name) const {
  for (const auto& col : columns) {
    if (std::find(col.derived.begin(), col.derived.end(), derived_name) != col.derived.end()) {
      return &col;
    }
  }
  return nullptr;
}

EncoderMap fit_encoder(const DataTable& table) {
  EncoderMap map;
  for (std::size_t c = 0; c < table.num_cols(); ++c) {
    const auto& col = table.schema()[c];
    if (col.kind != ColumnKind::categorical) continue;
    std::set<std::string> labels;
    for (const auto& row : table.rows()) {
      const auto* s = std::get_if<std::string>(&row[c]);
      if (!s) throw DataError("column '" + col.name + "' has missing values; impute before encoding");
      labels.insert(*s);
    }
    EncodedColumn enc{col.name, {labels.begin(), labels.end()}, {}, col.unit};
    for (const auto& l : enc.labels) enc.derived.push_back(col.name + "=" + l);
    map.columns.push_back(std::move(enc));
  }
  return map;
}

DataTable apply_encoder(const DataTable& table, const EncoderMap& map) {
  std::unordered_map<std::string, const EncodedColumn*> by_source;
  for (const auto& enc : map.columns) {
    table.column_index(enc.source);
    by_source.emplace(enc.source, &enc);
  }

  std::vector<ColumnSchema> schema;
  for (const auto& col : table.schema()) {
    const auto it = by_source.find(col.name);
    if (it == by_source.end()) {
      schema.push_back(col);
      continue;
    }
    if (col.kind != ColumnKind::categorical) {
      throw SchemaError("encoder expects categorical column '" + col.name + "'");
    }
    for (const auto& d : it->second->derived) {
      schema.push_back(ColumnSchema{d, ColumnKind::numeric, "indicator", std::nullopt});
    }
  }

  std::vector<std::vector<Cell>> rows;
  rows.reserve(table.num_rows());
  for (const auto& row : table.rows()) {
    std::vector<Cell> out;
    out.reserve(schema.size());
    for (std::size_t c = 0; c < table.num_cols(); ++c) {
      const auto it = by_source.find(table.schema()[c].name);
      if (it == by_source.end()) {
        out.push_back(row[c]);
        continue;
      }
      const auto* label = std::get_if<std::string>(&row[c]);
      if (!label) {
        throw DataError("column '" + it->first + "' has missing values; impute before encoding");
      }
      const auto& labels = it->second->labels;
      const auto pos = std::lower_bound(labels.begin(), labels.end(), *label);
      if (pos == labels.end() || *pos != *label) {
        throw DataError("label '" + *label + "' in column '" + it->first + "' is not in the encoder map");
      }
      const auto hot = static_cast<std::size_t>(pos - labels.begin());
      for (std::size_t k = 0; k < labels.size(); ++k) out.emplace_back(k == hot ? 1.0 : 0.0);
    }
    rows.push_back(std::move(out));
  }
  return DataTable(std::move(schema), std::move(rows));
}

Encoded one_hot_encode(const DataTable& table) {
  auto map = fit_encoder(table);
  auto encoded = apply_encoder(table, map);
  return {std::move(encoded), std::move(map)};
}

DataTable decode_one_hot(const DataTable& table, const EncoderMap& map) {
  std::vector<ColumnSchema> schema;
  // per output column: either a passthrough source index or an encoded group
  struct Out {
    std::size_t passthrough = 0;
    const EncodedColumn* group = nullptr;
    std::vector<std::size_t> indicator_cols;
  };
  std::vector<Out> plan;
  std::unordered_set<const EncodedColumn*> emitted;
  for (std::size_t c = 0; c < table.num_cols(); ++c) {
    const auto& col = table.schema()[c];
    const auto* group = map.find_derived(col.name);
    if (!group) {
      schema.push_back(col);
      plan.push_back({c, nullptr, {}});
      continue;
    }
    if (!emitted.insert(group).second) continue;
    Out o{0, group, {}};
    for (const auto& d : group->derived) o.indicator_cols.push_back(table.column_index(d));
    schema.push_back(ColumnSchema{group->source, ColumnKind::categorical, group->unit, std::nullopt});
    plan.push_back(std::move(o));
  }

  std::vector<std::vector<Cell>> rows;
  rows.reserve(table.num_rows());
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    const auto& row = table.rows()[r];
    std::vector<Cell> out;
    for (const auto& p : plan) {
      if (!p.group) {
        out.push_back(row[p.passthrough]);
        continue;
      }
      std::optional<std::size_t> hot;
      for (std::size_t k = 0; k < p.indicator_cols.size(); ++k) {
        const auto* d = std::get_if<double>(&row[p.indicator_cols[k]]);
        if (d && *d == 1.0) {
          if (hot) throw DataError("row " + std::to_string(r) + " is not one-hot for '" + p.group->source + "'");
          hot = k;
        }
      }
      if (!hot) throw DataError("row " + std::to_string(r) + " is not one-hot for '" + p.group->source + "'");
      out.emplace_back(p.group->labels[*hot]);
    }
    rows.push_back(std::move(out));
  }
  return DataTable(std::move(schema), std::move(rows));
}

// ---------------------------------------------------------------------------

ScalerParams fit_scaler(const DataTable& table) {
  ScalerParams params;
  for (std::size_t c = 0; c < table.num_cols(); ++c) {
    const auto values = table.numeric_column(c);
    params.columns.push_back(table.schema()[c].name);
    if (values.empty()) {
      params.mean.push_back(0.0);
      params.stddev.push_back(0.0);
      continue;
    }
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    double sd = 0.0;
    if (*lo != *hi) {
      double ss = 0.0;
      for (double v : values) ss += (v - mean) * (v - mean);
      sd = std::sqrt(ss / n);
    }
    params.mean.push_back(mean);
    params.stddev.push_back(sd);
  }
  return params;
}

DataTable apply_scaler(const DataTable& table, const ScalerParams& params) {
  if (table.column_names() != params.columns) {
    throw SchemaError("scaler columns do not match table columns");
  }
  auto schema = table.schema();
  for (auto& col : schema) {
    col.soft_range.reset();
    col.unit = "z-score";
  }
  std::vector<std::vector<Cell>> rows;
  rows.reserve(table.num_rows());
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    std::vector<Cell> out;
    out.reserve(table.num_cols());
    for (std::size_t c = 0; c < table.num_cols(); ++c) {
      const auto* d = std::get_if<double>(&table.rows()[r][c]);
      if (!d) throw DataError("column '" + params.columns[c] + "' is not numeric or has missing values");
      out.emplace_back(params.stddev[c] > 0.0 ? (*d - params.mean[c]) / params.stddev[c] : 0.0);
    }
    rows.push_back(std::move(out));
  }
  return DataTable(std::move(schema), std::move(rows));
}

Scaled standard_scale(const DataTable& table, const std::optional<ScalerParams>& params) {
  ScalerParams p = params ? *params : fit_scaler(table);
  auto scaled = apply_scaler(table, p);
  return {std::move(scaled), std::move(p)};
}

// ---------------------------------------------------------------------------

void DiscretizationSpec::validate() const {
  if (bins_per_feature < 2) throw SchemaError("bins_per_feature must be >= 2");
  if (decision_bins < 2) throw SchemaError("decision_bins must be >= 2");
}

std::vector<std::uint32_t> equal_frequency_bins(std::span<const double> values, int bins) {
  if (bins < 2) throw DataError("discretization needs at least 2 bins");
  if (values.empty()) throw DataError("cannot discretize an empty column");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> distinct = sorted;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  std::vector<double> cuts;
  const auto b = static_cast<std::size_t>(bins);
  if (distinct.size() <= b) {
    cuts.assign(distinct.begin(), distinct.end() - 1);
  } else {
    const std::size_t n = sorted.size();
    for (std::size_t k = 1; k < b; ++k) {
      const std::size_t pos = (k * n + b - 1) / b;  // ceil(k n / b), 1-based
      cuts.push_back(sorted[pos - 1]);
    }
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    // a cut equal to the maximum would leave its upper bin empty
    if (!cuts.empty() && cuts.back() == sorted.back()) cuts.pop_back();
  }

  std::vector<std::uint32_t> labels;
  labels.reserve(values.size());
  for (double v : values) {
    // number of cuts strictly below v: values equal to a cut stay in the lower bin
    labels.push_back(
        static_cast<std::uint32_t>(std::lower_bound(cuts.begin(), cuts.end(), v) - cuts.begin()));
  }
  return labels;
}

DataTable discretize(const DataTable& table, const DiscretizationSpec& spec) {
  spec.validate();
  if (table.num_rows() == 0) throw DataError("cannot discretize an empty table");
  std::vector<std::vector<std::uint32_t>> cols;
  for (std::size_t c = 0; c < table.num_cols(); ++c) {
    const auto values = table.numeric_column(c);
    cols.push_back(equal_frequency_bins(values, spec.bins_per_feature));
  }
  auto schema = table.schema();
  for (auto& col : schema) {
    col.soft_range.reset();
    col.unit = "bin";
  }
  std::vector<std::vector<Cell>> rows(table.num_rows());
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    rows[r].reserve(cols.size());
    for (const auto& col : cols) rows[r].emplace_back(static_cast<double>(col[r]));
  }
  return DataTable(std::move(schema), std::move(rows));
}

}  // namespace roughbattery::tabular
