#pragma once

// Rough-set core: indiscernibility partitions, lower/upper approximations,
// approximation accuracy, dependency degree, attribute significance and
// reduct search over a discrete information table.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "roughbattery/exec.hpp"

namespace roughbattery::rough {

using ObjectId = std::size_t;
/// Sorted, duplicate-free object ids.
using ObjectSet = std::vector<ObjectId>;

/// Universe of objects described by discrete conditional attributes and one
/// decision attribute. Labels are stored as dense codes per attribute; the
/// original label text is kept for serialization.
class InformationTable {
public:
  InformationTable() = default;

  /// `rows[i]` holds the conditional labels followed by the decision label of object i.
  InformationTable(std::vector<std::string> conditional, std::string decision,
                   const std::vector<std::vector<std::string>>& rows);

  /// Columns of codes: one per conditional attribute, then the decision column.
  static InformationTable from_codes(std::vector<std::string> conditional, std::string decision,
                                     std::vector<std::vector<std::uint32_t>> columns);

  std::size_t num_objects() const noexcept { return num_objects_; }
  std::size_t num_conditional() const noexcept { return conditional_.size(); }
  const std::vector<std::string>& conditional() const noexcept { return conditional_; }
  const std::string& decision() const noexcept { return decision_; }

  /// Attribute index: 0..num_conditional()-1 for conditional attributes,
  /// num_conditional() for the decision. Throws DataError for unknown names.
  std::size_t attribute_index(std::string_view name) const;
  std::size_t decision_index() const noexcept { return conditional_.size(); }

  std::span<const std::uint32_t> codes(std::size_t attribute) const { return codes_.at(attribute); }
  /// Number of distinct codes of an attribute (codes are 0..cardinality-1).
  std::uint32_t cardinality(std::size_t attribute) const { return cardinality_.at(attribute); }
  const std::string& label(std::size_t attribute, std::uint32_t code) const;

  /// Same table with objects reordered: new object i is old object order[i].
  InformationTable permuted(std::span<const std::size_t> order) const;

private:
  std::vector<std::string> conditional_;
  std::string decision_;
  std::size_t num_objects_ = 0;
  std::vector<std::vector<std::uint32_t>> codes_;
  std::vector<std::uint32_t> cardinality_;
  std::vector<std::vector<std::string>> labels_;
};

/// Equivalence classes, each sorted, ordered by smallest member.
struct Partition {
  std::vector<ObjectSet> blocks;
  bool operator==(const Partition&) const = default;
};

enum class Definability {
  roughly_definable,       // lower nonempty, upper != U
  internally_undefinable,  // lower empty,    upper != U
  externally_undefinable,  // lower nonempty, upper == U
  totally_undefinable,     // lower empty,    upper == U
};

std::string_view to_string(Definability d);

struct Approximation {
  ObjectSet lower;
  ObjectSet upper;
  double accuracy = 1.0;  // |lower| / |upper|; 1 for the empty target
  Definability definability = Definability::internally_undefinable;
};

struct ReductStep {
  std::string attribute;
  double gamma = 0.0;
};

struct ReductResult {
  std::vector<std::string> selected;     // after backward pruning, insertion order
  std::vector<ReductStep> gamma_trace;   // forward phase
  double gamma_full = 0.0;
  double gamma_selected = 0.0;
};

Partition indiscernibility_partition(const InformationTable& it, std::span<const std::string> attrs);

Approximation approximations(const InformationTable& it, std::span<const std::string> attrs,
                             const ObjectSet& target);

/// gamma(attrs) = sum over decision classes Y_i of |lower_attrs(Y_i)| / |U|.
double dependency_degree(const InformationTable& it, std::span<const std::string> attrs);

/// gamma(base + a) - gamma(base). Throws DataError if a is already in base.
double attribute_significance(const InformationTable& it, std::span<const std::string> base,
                              std::string_view attribute);

/// Greedy forward selection on gamma followed by backward pruning. Candidates
/// are scored in parallel under Exec::parallel; ties go to the lexicographically
/// smallest attribute name, so both policies return the same reduct.
ReductResult quick_reduct(const InformationTable& it, Exec exec = Exec::parallel);

/// Attributes whose removal from the full set lowers gamma by more than
/// `threshold`, united with the quick_reduct selection. Returned in table order.
std::vector<std::string> significance_filter(const InformationTable& it, double threshold,
                                             Exec exec = Exec::parallel);

/// CSV with one object per row, header = attribute names, last column = decision.
InformationTable read_information_table(std::istream& in);
void write_information_table(const InformationTable& it, std::ostream& out);

nlohmann::json to_json(const ReductResult& r);
ReductResult reduct_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Kernels. Index-based building blocks shared by the operations above.

namespace kernels {

/// Block id of every object under some attribute set; ids are assigned in order
/// of first appearance, so block k's smallest object precedes block k+1's.
struct BlockLabels {
  std::vector<std::uint32_t> id;
  std::uint32_t count = 0;
};

BlockLabels single_block(std::size_t num_objects);
BlockLabels refine(const BlockLabels& base, std::span<const std::uint32_t> codes,
                   std::uint32_t cardinality);
BlockLabels block_labels(const InformationTable& it, std::span<const std::size_t> attrs);

/// Number of objects in decision-pure blocks (the positive region).
std::size_t positive_region_size(const BlockLabels& blocks, std::span<const std::uint32_t> decision);

/// Positive region size of base+candidate for each candidate attribute.
std::vector<std::size_t> candidate_positive_regions_serial(const InformationTable& it,
                                                           const BlockLabels& base,
                                                           std::span<const std::size_t> candidates);
std::vector<std::size_t> candidate_positive_regions_parallel(const InformationTable& it,
                                                             const BlockLabels& base,
                                                             std::span<const std::size_t> candidates);

/// Positive region size of attrs minus attrs[k], for each k.
std::vector<std::size_t> leave_one_out_positive_regions_serial(const InformationTable& it,
                                                               std::span<const std::size_t> attrs);
std::vector<std::size_t> leave_one_out_positive_regions_parallel(const InformationTable& it,
                                                                 std::span<const std::size_t> attrs);

}  // namespace kernels

}  // namespace roughbattery::rough
