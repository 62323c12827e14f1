#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>

#include "roughbattery/config.hpp"
#include "roughbattery/errors.hpp"

namespace roughbattery::config {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    auto item = trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_value(const std::string& section, const std::string& key, const std::string& text) {
  T value{};
  const auto s = trim(text);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw SchemaError("[" + section + "] " + key + ": cannot parse '" + s + "'");
  }
  return value;
}

pt::ptree parse_ini(std::istream& in) {
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(e.message(), e.line());
  }
  return tree;
}

[[noreturn]] void unknown_key(const std::string& section, const std::string& key) {
  throw SchemaError("unknown key '" + key + "' in section [" + section + "]");
}

}  // namespace

bool parse_switch(std::string_view text) {
  const auto s = trim(text);
  if (s == "on" || s == "true" || s == "yes" || s == "1") return true;
  if (s == "off" || s == "false" || s == "no" || s == "0") return false;
  throw SchemaError("expected on or off, got '" + s + "'");
}

void apply_run_config(std::istream& in, RunConfig& base) {
  const auto tree = parse_ini(in);
  auto& e = base.experiment;
  for (const auto& [section, body] : tree) {
    if (!body.data().empty()) throw SchemaError("key '" + section + "' outside any section");
    for (const auto& [key, node] : body) {
      const auto& v = node.data();
      if (section == "data") {
        if (key == "path") base.data = trim(v);
        else if (key == "schema") base.schema = trim(v);
        else if (key == "out") base.out = trim(v);
        else if (key == "target") e.target = trim(v);
        else unknown_key(section, key);
      } else if (section == "pipeline") {
        if (key == "roughsets") e.use_roughsets = parse_switch(v);
        else if (key == "threshold") e.threshold = parse_value<double>(section, key, v);
        else if (key == "bins") e.discretization.bins_per_feature = parse_value<int>(section, key, v);
        else if (key == "decision_bins") e.discretization.decision_bins = parse_value<int>(section, key, v);
        else if (key == "ratio") e.test_ratio = parse_value<double>(section, key, v);
        else if (key == "seed") {
          e.seed = parse_value<std::uint64_t>(section, key, v);
          base.seed_from_file = true;
        }
        else if (key == "numeric_as_categorical") e.treat_numeric_as_categorical = parse_switch(v);
        else unknown_key(section, key);
      } else if (section == "model") {
        if (key == "kind") e.model = eval::parse_model_kind(trim(v));
        else if (key == "ridge") e.ridge = parse_value<double>(section, key, v);
        else unknown_key(section, key);
      } else if (section == "mlp") {
        if (key == "hidden") {
          e.mlp.hidden.clear();
          for (const auto& item : split_list(v)) e.mlp.hidden.push_back(parse_value<std::size_t>(section, key, item));
        } else if (key == "learning_rate") e.mlp.learning_rate = parse_value<double>(section, key, v);
        else if (key == "beta1") e.mlp.beta1 = parse_value<double>(section, key, v);
        else if (key == "beta2") e.mlp.beta2 = parse_value<double>(section, key, v);
        else if (key == "epsilon") e.mlp.epsilon = parse_value<double>(section, key, v);
        else if (key == "epochs") e.mlp.epochs = parse_value<std::size_t>(section, key, v);
        else if (key == "batch_size") e.mlp.batch_size = parse_value<std::size_t>(section, key, v);
        else unknown_key(section, key);
      } else if (section == "gbt") {
        if (key == "rounds") e.gbt.rounds = parse_value<std::size_t>(section, key, v);
        else if (key == "max_depth") e.gbt.max_depth = parse_value<std::size_t>(section, key, v);
        else if (key == "learning_rate") e.gbt.learning_rate = parse_value<double>(section, key, v);
        else if (key == "lambda") e.gbt.lambda = parse_value<double>(section, key, v);
        else if (key == "min_samples_leaf") e.gbt.min_samples_leaf = parse_value<std::size_t>(section, key, v);
        else unknown_key(section, key);
      } else {
        throw SchemaError("unknown section [" + section + "]");
      }
    }
  }
}

void load_run_config(const std::filesystem::path& path, RunConfig& base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  apply_run_config(in, base);
  const auto dir = path.parent_path();
  for (auto* p : {&base.data, &base.schema}) {
    if (*p && p->value().is_relative()) *p = dir / p->value();
  }
}

SchemaFile read_schema(std::istream& in) {
  const auto tree = parse_ini(in);
  SchemaFile out;
  constexpr std::string_view prefix = "column ";
  for (const auto& [section, body] : tree) {
    if (section == "missing") {
      for (const auto& [key, node] : body) {
        if (key != "sentinels") unknown_key(section, key);
        out.csv.missing_sentinels = split_list(node.data());
      }
      continue;
    }
    if (!section.starts_with(prefix)) throw SchemaError("unknown section [" + section + "]");
    tabular::ColumnSchema col;
    col.name = trim(std::string_view(section).substr(prefix.size()));
    bool has_kind = false;
    for (const auto& [key, node] : body) {
      if (key == "kind") {
        col.kind = tabular::parse_column_kind(trim(node.data()));
        has_kind = true;
      } else if (key == "unit") {
        col.unit = trim(node.data());
      } else if (key == "range") {
        const auto parts = split_list(node.data());
        if (parts.size() != 2) throw SchemaError("[" + section + "] range needs two values: lo, hi");
        col.soft_range = std::pair{parse_value<double>(section, key, parts[0]),
                                   parse_value<double>(section, key, parts[1])};
      } else {
        unknown_key(section, key);
      }
    }
    if (!has_kind) throw SchemaError("[" + section + "] has no kind");
    out.columns.push_back(std::move(col));
  }
  tabular::validate_schema(out.columns);
  return out;
}

SchemaFile load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open schema '" + path.string() + "'");
  return read_schema(in);
}

}  // namespace roughbattery::config
