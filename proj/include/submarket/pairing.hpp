#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "submarket/attributes.hpp"
#include "submarket/dcsbm.hpp"
#include "submarket/partition.hpp"

namespace submarket {

struct FitResult;

inline constexpr std::uint32_t kNoSubmarket = std::numeric_limits<std::uint32_t>::max();

/// Submarket of every node.
struct NodeSubmarkets {
  std::vector<std::uint32_t> of_node;
  std::uint32_t count = 0;
};

struct SubmarketMap {
  /// community -> submarket; kNoSubmarket for empty communities
  std::vector<std::uint32_t> of_community;
  std::uint32_t count = 0;
  std::vector<std::string> warnings;

  NodeSubmarkets for_nodes(const Partition& assignment) const;
};

/// Pairs majority-male with majority-female communities into submarkets.
///
/// Candidate (male, female) pairs are taken greedily by decreasing omega,
/// ties to the lowest male then lowest female index. Communities left over
/// (unmatched, or with an exact 50/50 sex split) join the submarket of the
/// already-assigned community they have the largest omega with. Submarkets
/// are numbered by ascending median member age, ties by lowest community.
SubmarketMap pair_submarkets(const BlockModelParams& params, const Partition& assignment,
                             const AttributeTable& attrs);
SubmarketMap pair_submarkets(const FitResult& result, const AttributeTable& attrs);

}  // namespace submarket
