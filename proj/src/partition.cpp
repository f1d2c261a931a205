#include "submarket/partition.hpp"

#include <unordered_map>

#include "submarket/errors.hpp"

namespace submarket {

Partition Partition::compact(std::span<const std::uint32_t> raw) {
  Partition p;
  p.labels.reserve(raw.size());
  std::unordered_map<std::uint32_t, std::uint32_t> remap;
  for (auto l : raw) {
    auto [it, inserted] = remap.try_emplace(l, p.k);
    if (inserted) ++p.k;
    p.labels.push_back(it->second);
  }
  return p;
}

Partition Partition::with_groups(std::vector<std::uint32_t> labels, std::uint32_t k) {
  for (auto l : labels) {
    if (l >= k) throw DataError("label " + std::to_string(l) + " out of range for k=" + std::to_string(k));
  }
  return Partition{std::move(labels), k};
}

std::vector<std::size_t> Partition::sizes() const {
  std::vector<std::size_t> s(k, 0);
  for (auto l : labels) ++s[l];
  return s;
}

}  // namespace submarket
