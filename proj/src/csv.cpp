#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "roughbattery/errors.hpp"
#include "roughbattery/table.hpp"

namespace roughbattery::tabular {

namespace {

struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

// RFC 4180 style reader: quoted fields may contain commas, doubled quotes and newlines.
class CsvReader {
public:
  explicit CsvReader(std::string text) : text_(std::move(text)) {}

  bool next(Record& rec) {
    while (pos_ < text_.size()) {
      rec.fields.clear();
      rec.line = line_;
      if (text_[pos_] == '\n' || text_[pos_] == '\r') {
        skip_newline();
        continue;
      }
      read_record(rec);
      return true;
    }
    return false;
  }

  /// Skips a whole physical line (used for '#' comments).
  void skip_line() {
    while (pos_ < text_.size() && text_[pos_] != '\n' && text_[pos_] != '\r') ++pos_;
    skip_newline();
  }

  bool at_comment() const { return pos_ < text_.size() && text_[pos_] == '#'; }

  void skip_blank() {
    while (pos_ < text_.size() && (text_[pos_] == '\n' || text_[pos_] == '\r')) skip_newline();
  }

private:
  void skip_newline() {
    if (pos_ < text_.size() && text_[pos_] == '\r') ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '\n') ++pos_;
    ++line_;
  }

  void read_record(Record& rec) {
    std::string field;
    for (;;) {
      field.clear();
      if (pos_ < text_.size() && text_[pos_] == '"') {
        ++pos_;
        for (;;) {
          if (pos_ >= text_.size()) throw ParseError("unterminated quoted field", rec.line);
          const char c = text_[pos_++];
          if (c == '"') {
            if (pos_ < text_.size() && text_[pos_] == '"') {
              field.push_back('"');
              ++pos_;
            } else {
              break;
            }
          } else {
            if (c == '\n') ++line_;
            field.push_back(c);
          }
        }
        while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != '\n' &&
               text_[pos_] != '\r') {
          field.push_back(text_[pos_++]);
        }
      } else {
        while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != '\n' &&
               text_[pos_] != '\r') {
          field.push_back(text_[pos_++]);
        }
      }
      rec.fields.push_back(field);
      if (pos_ < text_.size() && text_[pos_] == ',') {
        ++pos_;
        continue;
      }
      skip_newline();
      return;
    }
  }

  std::string text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

bool needs_quotes(std::string_view s) {
  return s.find_first_of(",\"\n\r") != std::string_view::npos ||
         (!s.empty() && (s.front() == ' ' || s.back() == ' ' || s.front() == '#'));
}

void write_field(std::ostream& out, std::string_view s) {
  if (!needs_quotes(s)) {
    out << s;
    return;
  }
  out << '"';
  for (char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

namespace {

CsvReader open_reader(std::istream& in) {
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) text.erase(0, 3);
  CsvReader reader(std::move(text));
  reader.skip_blank();
  while (reader.at_comment()) {
    reader.skip_line();
    reader.skip_blank();
  }
  return reader;
}

}  // namespace

std::vector<CsvRecord> read_csv_records(std::istream& in) {
  CsvReader reader = open_reader(in);
  std::vector<CsvRecord> out;
  Record rec;
  while (reader.next(rec)) out.push_back({rec.fields, rec.line});
  return out;
}

void write_csv_record(std::ostream& out, std::span<const std::string> fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    write_field(out, fields[i]);
  }
  out << '\n';
}

DataTable read_csv(std::istream& in, std::span<const ColumnSchema> schema,
                   const CsvOptions& options) {
  validate_schema(schema);
  CsvReader reader = open_reader(in);
  Record header;
  if (!reader.next(header)) throw SchemaError("CSV has no header row");

  std::unordered_map<std::string, std::size_t> by_name;
  for (std::size_t i = 0; i < schema.size(); ++i) by_name.emplace(schema[i].name, i);

  // source field index for each schema column
  std::vector<std::size_t> source(schema.size(), header.fields.size());
  for (std::size_t f = 0; f < header.fields.size(); ++f) {
    const std::string name{trim(header.fields[f])};
    const auto it = by_name.find(name);
    if (it == by_name.end()) throw SchemaError("column '" + name + "' is not in the schema");
    if (source[it->second] != header.fields.size()) {
      throw SchemaError("column '" + name + "' appears twice in the header");
    }
    source[it->second] = f;
  }
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (source[c] == header.fields.size()) {
      throw SchemaError("schema column '" + schema[c].name + "' is missing from the header");
    }
  }

  auto is_sentinel = [&](std::string_view v) {
    return v.empty() || std::find(options.missing_sentinels.begin(), options.missing_sentinels.end(),
                                  v) != options.missing_sentinels.end();
  };

  std::vector<std::vector<Cell>> rows;
  Record rec;
  while (reader.next(rec)) {
    if (rec.fields.size() != header.fields.size()) {
      throw ParseError("expected " + std::to_string(header.fields.size()) + " fields, found " +
                           std::to_string(rec.fields.size()),
                       rec.line);
    }
    std::vector<Cell> row;
    row.reserve(schema.size());
    for (std::size_t c = 0; c < schema.size(); ++c) {
      const std::string_view raw = trim(rec.fields[source[c]]);
      if (is_sentinel(raw)) {
        row.emplace_back(Missing{});
      } else if (schema[c].kind == ColumnKind::numeric) {
        if (auto v = parse_double(raw)) {
          row.emplace_back(*v);
        } else {
          row.emplace_back(Missing{});
        }
      } else {
        row.emplace_back(std::string(raw));
      }
    }
    rows.push_back(std::move(row));
  }
  return DataTable({schema.begin(), schema.end()}, std::move(rows));
}

DataTable load_csv(const std::filesystem::path& path, std::span<const ColumnSchema> schema,
                   const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_csv(in, schema, options);
}

void write_csv(const DataTable& table, std::ostream& out, std::span<const std::string> comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  for (std::size_t c = 0; c < table.num_cols(); ++c) {
    if (c) out << ',';
    write_field(out, table.schema()[c].name);
  }
  out << '\n';
  for (const auto& row : table.rows()) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      if (const auto* d = std::get_if<double>(&row[c])) {
        out << format_number(*d);
      } else if (const auto* s = std::get_if<std::string>(&row[c])) {
        write_field(out, *s);
      }
    }
    out << '\n';
  }
}

}  // namespace roughbattery::tabular
