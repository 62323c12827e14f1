#include <algorithm>
#include <numeric>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "roughbattery/errors.hpp"
#include "roughbattery/roughsets.hpp"
#include "roughbattery/table.hpp"

namespace roughbattery::rough {

namespace {

void check_names(const std::vector<std::string>& conditional, const std::string& decision) {
  std::unordered_set<std::string_view> seen;
  for (const auto& a : conditional) {
    if (!seen.insert(a).second) throw DataError("duplicate attribute '" + a + "'");
  }
  if (seen.contains(decision)) {
    throw DataError("decision attribute '" + decision + "' is also a conditional attribute");
  }
}

std::vector<std::size_t> resolve(const InformationTable& it, std::span<const std::string> attrs,
                                 bool allow_decision) {
  std::vector<std::size_t> idx;
  idx.reserve(attrs.size());
  for (const auto& a : attrs) {
    const auto i = it.attribute_index(a);
    if (!allow_decision && i == it.decision_index()) {
      throw DataError("'" + a + "' is the decision attribute, not a conditional one");
    }
    if (std::find(idx.begin(), idx.end(), i) == idx.end()) idx.push_back(i);
  }
  return idx;
}

std::size_t positive_region(const InformationTable& it, std::span<const std::size_t> attrs) {
  return kernels::positive_region_size(kernels::block_labels(it, attrs), it.codes(it.decision_index()));
}

double ratio(std::size_t count, std::size_t n) {
  return static_cast<double>(count) / static_cast<double>(n);
}

}  // namespace

// ---------------------------------------------------------------------------

InformationTable::InformationTable(std::vector<std::string> conditional, std::string decision,
                                   const std::vector<std::vector<std::string>>& rows)
    : conditional_(std::move(conditional)), decision_(std::move(decision)), num_objects_(rows.size()) {
  check_names(conditional_, decision_);
  const std::size_t width = conditional_.size() + 1;
  codes_.assign(width, std::vector<std::uint32_t>(num_objects_));
  cardinality_.assign(width, 0);
  labels_.assign(width, {});
  std::vector<std::unordered_map<std::string, std::uint32_t>> dict(width);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != width) {
      throw DataError("object " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                      " labels, expected " + std::to_string(width));
    }
    for (std::size_t a = 0; a < width; ++a) {
      const auto [pos, inserted] = dict[a].try_emplace(rows[i][a], cardinality_[a]);
      if (inserted) {
        ++cardinality_[a];
        labels_[a].push_back(rows[i][a]);
      }
      codes_[a][i] = pos->second;
    }
  }
}

InformationTable InformationTable::from_codes(std::vector<std::string> conditional, std::string decision,
                                              std::vector<std::vector<std::uint32_t>> columns) {
  check_names(conditional, decision);
  if (columns.size() != conditional.size() + 1) {
    throw DataError("expected " + std::to_string(conditional.size() + 1) + " code columns");
  }
  InformationTable it;
  it.conditional_ = std::move(conditional);
  it.decision_ = std::move(decision);
  it.num_objects_ = columns.front().size();
  for (const auto& col : columns) {
    if (col.size() != it.num_objects_) throw DataError("code columns differ in length");
    const std::uint32_t card = col.empty() ? 0 : *std::max_element(col.begin(), col.end()) + 1;
    it.cardinality_.push_back(card);
    std::vector<std::string> labels;
    for (std::uint32_t c = 0; c < card; ++c) labels.push_back(std::to_string(c));
    it.labels_.push_back(std::move(labels));
  }
  it.codes_ = std::move(columns);
  return it;
}

std::size_t InformationTable::attribute_index(std::string_view name) const {
  for (std::size_t a = 0; a < conditional_.size(); ++a) {
    if (conditional_[a] == name) return a;
  }
  if (name == decision_) return decision_index();
  throw DataError("unknown attribute '" + std::string(name) + "'");
}

const std::string& InformationTable::label(std::size_t attribute, std::uint32_t code) const {
  return labels_.at(attribute).at(code);
}

InformationTable InformationTable::permuted(std::span<const std::size_t> order) const {
  if (order.size() != num_objects_) throw DataError("permutation size mismatch");
  InformationTable out = *this;
  for (std::size_t a = 0; a < codes_.size(); ++a) {
    for (std::size_t i = 0; i < order.size(); ++i) out.codes_[a][i] = codes_[a].at(order[i]);
  }
  return out;
}

std::string_view to_string(Definability d) {
  switch (d) {
    case Definability::roughly_definable: return "roughly-definable";
    case Definability::internally_undefinable: return "internally-undefinable";
    case Definability::externally_undefinable: return "externally-undefinable";
    case Definability::totally_undefinable: return "totally-undefinable";
  }
  return "";
}

// ---------------------------------------------------------------------------

Partition indiscernibility_partition(const InformationTable& it, std::span<const std::string> attrs) {
  const auto idx = resolve(it, attrs, /*allow_decision=*/true);
  const auto blocks = kernels::block_labels(it, idx);
  Partition p;
  p.blocks.resize(blocks.count);
  for (std::size_t i = 0; i < blocks.id.size(); ++i) p.blocks[blocks.id[i]].push_back(i);
  return p;
}

Approximation approximations(const InformationTable& it, std::span<const std::string> attrs,
                             const ObjectSet& target) {
  const std::size_t n = it.num_objects();
  std::vector<char> in_target(n, 0);
  for (auto o : target) {
    if (o >= n) throw DataError("target contains unknown object " + std::to_string(o));
    in_target[o] = 1;
  }
  const auto partition = indiscernibility_partition(it, attrs);
  Approximation a;
  for (const auto& block : partition.blocks) {
    const auto hits = static_cast<std::size_t>(
        std::count_if(block.begin(), block.end(), [&](ObjectId o) { return in_target[o] != 0; }));
    if (hits == 0) continue;
    a.upper.insert(a.upper.end(), block.begin(), block.end());
    if (hits == block.size()) a.lower.insert(a.lower.end(), block.begin(), block.end());
  }
  std::sort(a.lower.begin(), a.lower.end());
  std::sort(a.upper.begin(), a.upper.end());
  a.accuracy = a.upper.empty() ? 1.0 : ratio(a.lower.size(), a.upper.size());
  const bool lower_empty = a.lower.empty();
  const bool upper_full = a.upper.size() == n;
  if (!lower_empty && !upper_full) {
    a.definability = Definability::roughly_definable;
  } else if (lower_empty && !upper_full) {
    a.definability = Definability::internally_undefinable;
  } else if (!lower_empty && upper_full) {
    a.definability = Definability::externally_undefinable;
  } else {
    a.definability = Definability::totally_undefinable;
  }
  return a;
}

double dependency_degree(const InformationTable& it, std::span<const std::string> attrs) {
  if (it.num_objects() == 0) throw DataError("dependency degree of an empty universe");
  const auto idx = resolve(it, attrs, /*allow_decision=*/false);
  return ratio(positive_region(it, idx), it.num_objects());
}

double attribute_significance(const InformationTable& it, std::span<const std::string> base,
                              std::string_view attribute) {
  if (it.num_objects() == 0) throw DataError("significance over an empty universe");
  auto idx = resolve(it, base, /*allow_decision=*/false);
  const auto a = it.attribute_index(attribute);
  if (a == it.decision_index()) throw DataError("significance of the decision attribute");
  if (std::find(idx.begin(), idx.end(), a) != idx.end()) {
    throw DataError("attribute '" + std::string(attribute) + "' is already in the base set");
  }
  const auto before = positive_region(it, idx);
  idx.push_back(a);
  const auto after = positive_region(it, idx);
  return ratio(after, it.num_objects()) - ratio(before, it.num_objects());
}

ReductResult quick_reduct(const InformationTable& it, Exec exec) {
  const std::size_t n = it.num_objects();
  if (it.num_conditional() == 0) throw DataError("reduct needs at least one conditional attribute");
  if (n == 0) throw DataError("reduct over an empty universe");
  const auto decision = it.codes(it.decision_index());

  std::vector<std::size_t> all(it.num_conditional());
  std::iota(all.begin(), all.end(), 0);
  const std::size_t full_pos = positive_region(it, all);

  // candidates in lexicographic name order: the first strict maximum wins ties
  std::vector<std::size_t> remaining = all;
  std::sort(remaining.begin(), remaining.end(), [&](std::size_t a, std::size_t b) {
    return it.conditional()[a] < it.conditional()[b];
  });

  ReductResult result;
  std::vector<std::size_t> selected;
  auto blocks = kernels::single_block(n);
  std::size_t selected_pos = kernels::positive_region_size(blocks, decision);

  // Forward phase. On a plateau (no candidate raises gamma) the best candidate
  // is still added; the loop ends once gamma(selected) = gamma(full).
  while (selected_pos < full_pos) {
    const auto scores = exec == Exec::parallel
                            ? kernels::candidate_positive_regions_parallel(it, blocks, remaining)
                            : kernels::candidate_positive_regions_serial(it, blocks, remaining);
    const auto best = static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
    const auto a = remaining[best];
    selected.push_back(a);
    blocks = kernels::refine(blocks, it.codes(a), it.cardinality(a));
    selected_pos = scores[best];
    result.gamma_trace.push_back({it.conditional()[a], ratio(selected_pos, n)});
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
  }

  // Backward phase, reverse insertion order.
  for (std::size_t k = selected.size(); k-- > 0;) {
    std::vector<std::size_t> trial = selected;
    trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(k));
    if (positive_region(it, trial) == selected_pos) selected = std::move(trial);
  }

  for (auto a : selected) result.selected.push_back(it.conditional()[a]);
  result.gamma_full = ratio(full_pos, n);
  result.gamma_selected = ratio(selected_pos, n);
  return result;
}

std::vector<std::string> significance_filter(const InformationTable& it, double threshold, Exec exec) {
  if (!(threshold >= 0.0)) throw DataError("significance threshold must be >= 0");
  const std::size_t n = it.num_objects();
  std::vector<std::size_t> all(it.num_conditional());
  std::iota(all.begin(), all.end(), 0);
  const auto full_pos = positive_region(it, all);
  const auto loo = exec == Exec::parallel ? kernels::leave_one_out_positive_regions_parallel(it, all)
                                          : kernels::leave_one_out_positive_regions_serial(it, all);

  std::vector<char> keep(all.size(), 0);
  for (std::size_t k = 0; k < all.size(); ++k) {
    const double sigma = ratio(full_pos, n) - ratio(loo[k], n);
    if (sigma > threshold) keep[k] = 1;
  }
  for (const auto& name : quick_reduct(it, exec).selected) keep[it.attribute_index(name)] = 1;

  std::vector<std::string> out;
  for (std::size_t k = 0; k < all.size(); ++k) {
    if (keep[k]) out.push_back(it.conditional()[k]);
  }
  return out;
}

// ---------------------------------------------------------------------------

InformationTable read_information_table(std::istream& in) {
  const auto records = tabular::read_csv_records(in);
  if (records.empty()) throw SchemaError("information table CSV has no header");
  const auto& header = records.front().fields;
  if (header.size() < 2) throw SchemaError("information table needs a conditional and a decision column");
  std::vector<std::string> conditional(header.begin(), header.end() - 1);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(records[r].fields.size()),
                       records[r].line);
    }
    rows.push_back(records[r].fields);
  }
  return InformationTable(std::move(conditional), header.back(), rows);
}

void write_information_table(const InformationTable& it, std::ostream& out) {
  std::vector<std::string> fields = it.conditional();
  fields.push_back(it.decision());
  tabular::write_csv_record(out, fields);
  for (std::size_t i = 0; i < it.num_objects(); ++i) {
    for (std::size_t a = 0; a <= it.num_conditional(); ++a) fields[a] = it.label(a, it.codes(a)[i]);
    tabular::write_csv_record(out, fields);
  }
}

nlohmann::json to_json(const ReductResult& r) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& s : r.gamma_trace) trace.push_back({{"attribute", s.attribute}, {"gamma", s.gamma}});
  return {{"selected", r.selected},
          {"gamma_trace", trace},
          {"gamma_full", r.gamma_full},
          {"gamma_selected", r.gamma_selected}};
}

ReductResult reduct_from_json(const nlohmann::json& j) {
  ReductResult r;
  r.selected = j.at("selected").get<std::vector<std::string>>();
  for (const auto& s : j.at("gamma_trace")) {
    r.gamma_trace.push_back({s.at("attribute").get<std::string>(), s.at("gamma").get<double>()});
  }
  r.gamma_full = j.at("gamma_full").get<double>();
  r.gamma_selected = j.at("gamma_selected").get<double>();
  return r;
}

}  // namespace roughbattery::rough
