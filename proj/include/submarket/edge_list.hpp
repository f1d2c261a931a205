#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "submarket/graph.hpp"

namespace submarket {

enum class DuplicatePolicy { sum, error };
enum class SelfLoopPolicy {
  drop,      ///< discard and count (default for interaction networks)
  internal,  ///< fold into the node's internal weight
};

struct EdgeListOptions {
  bool weighted = false;  ///< accept an optional third weight column
  DuplicatePolicy dedup = DuplicatePolicy::sum;
  SelfLoopPolicy self_loops = SelfLoopPolicy::drop;
};

struct LoadedGraph {
  Graph graph;
  std::size_t self_loops_dropped = 0;
  std::size_t duplicates_merged = 0;
  std::vector<std::string> warnings;
};

/// Reads `src<TAB>dst[<TAB>weight]` lines. Blank lines and lines starting with
/// '#' are skipped. Node tokens get dense indices in first-seen order.
LoadedGraph load_edge_list(std::istream& in, const EdgeListOptions& options = {});
LoadedGraph load_edge_list_file(const std::string& path, const EdgeListOptions& options = {});

/// Canonical serialization: one line per edge, u < v ascending, using node ids.
/// Internal weights are written as `id<TAB>id<TAB>w` lines; the weight column
/// is omitted when the graph is simple.
void write_edge_list(std::ostream& out, const Graph& g);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

/// Region-pair interaction records, stored as unordered pairs with a <= b.
struct RegionInteractionLog {
  std::vector<std::pair<std::string, std::string>> records;

  void add(std::string a, std::string b);
};

RegionInteractionLog load_region_log(std::istream& in);

/// One node per distinct region code (ids sorted lexicographically so the
/// result does not depend on record order). Cross-region counts become edge
/// weights and same-region counts become internal weight.
Graph aggregate_by_region(const RegionInteractionLog& log);

}  // namespace submarket
