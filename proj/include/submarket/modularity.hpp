#pragma once

#include <cstdint>
#include <vector>

#include "submarket/graph.hpp"
#include "submarket/partition.hpp"

namespace submarket {

/// Q = sum_r [ e_rr - resolution * a_r^2 ], with e_rr the within-community
/// share of total weight (internal weight included) and a_r the community's
/// share of total strength. Throws DataError when total weight is zero.
double modularity(const Graph& g, const Partition& p, double resolution = 1.0);

struct LouvainOptions {
  double resolution = 1.0;
  std::uint64_t seed = 0;
  /// A move must improve Q by more than this.
  double min_gain = 1e-12;
  int max_sweeps_per_level = 1000;
};

struct LouvainResult {
  Partition partition;
  double modularity = 0.0;
  /// Q after each completed level.
  std::vector<double> level_modularity;
};

/// Multi-level greedy modularity maximization: seeded-shuffle single-node
/// moves to a local optimum, aggregate communities, repeat until a level makes
/// no move. Gain ties go to the lowest community index.
LouvainResult louvain(const Graph& g, const LouvainOptions& options);
Partition louvain(const Graph& g, double resolution, std::uint64_t seed);

struct ExhaustiveModularity {
  Partition best;
  double modularity = 0.0;
  std::size_t partitions_checked = 0;
};

/// Brute-force maximum over all set partitions (restricted growth strings).
/// Reference oracle for small graphs; refuses node_count > max_nodes.
ExhaustiveModularity exhaustive_max_modularity(const Graph& g, double resolution = 1.0,
                                               std::size_t max_nodes = 11);

}  // namespace submarket
