#include <limits>
#include <unordered_map>

#include "roughbattery/roughsets.hpp"

namespace roughbattery::rough::kernels {

namespace {

constexpr std::uint32_t kUnassigned = std::numeric_limits<std::uint32_t>::max();
constexpr std::size_t kFlatTableLimit = std::size_t{1} << 24;

std::vector<std::size_t> without(std::span<const std::size_t> attrs, std::size_t k) {
  std::vector<std::size_t> out;
  out.reserve(attrs.size());
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    if (i != k) out.push_back(attrs[i]);
  }
  return out;
}

}  // namespace

BlockLabels single_block(std::size_t num_objects) {
  return {std::vector<std::uint32_t>(num_objects, 0), num_objects ? 1u : 0u};
}

BlockLabels refine(const BlockLabels& base, std::span<const std::uint32_t> codes,
                   std::uint32_t cardinality) {
  BlockLabels out;
  out.id.resize(base.id.size());
  const std::size_t slots = static_cast<std::size_t>(base.count) * cardinality;
  if (slots <= kFlatTableLimit) {
    std::vector<std::uint32_t> table(slots, kUnassigned);
    for (std::size_t i = 0; i < base.id.size(); ++i) {
      auto& slot = table[static_cast<std::size_t>(base.id[i]) * cardinality + codes[i]];
      if (slot == kUnassigned) slot = out.count++;
      out.id[i] = slot;
    }
  } else {
    std::unordered_map<std::uint64_t, std::uint32_t> table;
    table.reserve(base.id.size());
    for (std::size_t i = 0; i < base.id.size(); ++i) {
      const std::uint64_t key = (std::uint64_t{base.id[i]} << 32) | codes[i];
      const auto [it, inserted] = table.try_emplace(key, out.count);
      if (inserted) ++out.count;
      out.id[i] = it->second;
    }
  }
  return out;
}

BlockLabels block_labels(const InformationTable& it, std::span<const std::size_t> attrs) {
  BlockLabels blocks = single_block(it.num_objects());
  for (auto a : attrs) blocks = refine(blocks, it.codes(a), it.cardinality(a));
  return blocks;
}

std::size_t positive_region_size(const BlockLabels& blocks, std::span<const std::uint32_t> decision) {
  std::vector<std::uint32_t> first(blocks.count, kUnassigned);
  std::vector<std::uint32_t> size(blocks.count, 0);
  std::vector<char> pure(blocks.count, 1);
  for (std::size_t i = 0; i < blocks.id.size(); ++i) {
    const auto b = blocks.id[i];
    ++size[b];
    if (first[b] == kUnassigned) {
      first[b] = decision[i];
    } else if (first[b] != decision[i]) {
      pure[b] = 0;
    }
  }
  std::size_t total = 0;
  for (std::uint32_t b = 0; b < blocks.count; ++b) {
    if (pure[b]) total += size[b];
  }
  return total;
}

std::vector<std::size_t> candidate_positive_regions_serial(const InformationTable& it,
                                                           const BlockLabels& base,
                                                           std::span<const std::size_t> candidates) {
  const auto decision = it.codes(it.decision_index());
  std::vector<std::size_t> out(candidates.size());
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const auto a = candidates[k];
    out[k] = positive_region_size(refine(base, it.codes(a), it.cardinality(a)), decision);
  }
  return out;
}

std::vector<std::size_t> candidate_positive_regions_parallel(const InformationTable& it,
                                                             const BlockLabels& base,
                                                             std::span<const std::size_t> candidates) {
  const auto decision = it.codes(it.decision_index());
  std::vector<std::size_t> out(candidates.size());
  const auto n = static_cast<std::ptrdiff_t>(candidates.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const auto a = candidates[static_cast<std::size_t>(k)];
    out[static_cast<std::size_t>(k)] =
        positive_region_size(refine(base, it.codes(a), it.cardinality(a)), decision);
  }
  return out;
}

std::vector<std::size_t> leave_one_out_positive_regions_serial(const InformationTable& it,
                                                               std::span<const std::size_t> attrs) {
  const auto decision = it.codes(it.decision_index());
  std::vector<std::size_t> out(attrs.size());
  for (std::size_t k = 0; k < attrs.size(); ++k) {
    out[k] = positive_region_size(block_labels(it, without(attrs, k)), decision);
  }
  return out;
}

std::vector<std::size_t> leave_one_out_positive_regions_parallel(const InformationTable& it,
                                                                 std::span<const std::size_t> attrs) {
  const auto decision = it.codes(it.decision_index());
  std::vector<std::size_t> out(attrs.size());
  const auto n = static_cast<std::ptrdiff_t>(attrs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    out[static_cast<std::size_t>(k)] =
        positive_region_size(block_labels(it, without(attrs, static_cast<std::size_t>(k))), decision);
  }
  return out;
}

}  // namespace roughbattery::rough::kernels
