#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace submarket {

/// Hard community assignment in compacted form: every label in [0, k) and
/// every community non-empty.
struct Partition {
  std::vector<std::uint32_t> labels;
  std::uint32_t k = 0;

  std::size_t size() const noexcept { return labels.size(); }

  /// Relabels arbitrary labels densely in first-seen order.
  static Partition compact(std::span<const std::uint32_t> raw);
  /// Validates labels against k without relabeling. Empty communities are
  /// allowed here so fitted assignments keep their group indices.
  static Partition with_groups(std::vector<std::uint32_t> labels, std::uint32_t k);

  std::vector<std::size_t> sizes() const;
};

}  // namespace submarket
