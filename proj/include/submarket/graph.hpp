#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace submarket {

using NodeId = std::uint32_t;

/// Undirected edge in canonical form (u < v).
struct Edge {
  NodeId u;
  NodeId v;
  double weight;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Immutable undirected weighted graph.
///
/// Adjacency is stored in CSR form. Every undirected edge {u, v} owns two
/// directed slots, u->v and v->u; message-passing code indexes its state by
/// slot and uses reverse_slot() to find the opposite direction.
///
/// Node-internal weight models interactions inside an aggregated node (e.g.
/// two users from the same region). It is kept apart from the edge list, so
/// degree() only counts incident edges, and strength() adds 2x the internal
/// weight the way a self-loop would.
class Graph {
 public:
  Graph() = default;

  /// Builds a graph from an edge list. Endpoints are put in canonical order
  /// and duplicate pairs merged by summing weights. Throws DataError on
  /// self-loops, out-of-range endpoints and negative or non-finite weights.
  static Graph from_edges(std::size_t node_count, std::vector<Edge> edges,
                          std::vector<double> internal_weights = {},
                          std::vector<std::string> ids = {});

  std::size_t node_count() const noexcept { return degrees_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  bool empty() const noexcept { return degrees_.empty(); }

  /// Canonical edges, sorted by (u, v).
  std::span<const Edge> edges() const noexcept { return edges_; }

  /// Sum of incident edge weights.
  double degree(NodeId i) const { return degrees_[i]; }
  std::span<const double> degrees() const noexcept { return degrees_; }

  double internal_weight(NodeId i) const { return internal_[i]; }
  std::span<const double> internal_weights() const noexcept { return internal_; }
  bool has_internal_weight() const noexcept { return has_internal_; }

  /// degree(i) + 2 * internal_weight(i); the node weight used by modularity.
  double strength(NodeId i) const { return degrees_[i] + 2.0 * internal_[i]; }

  /// Sum of edge weights plus internal weights.
  double total_weight() const noexcept { return total_weight_; }

  /// True when every edge has weight exactly 1 and there is no internal weight.
  bool is_simple() const noexcept;

  // CSR access. Slots of node i are [slot_begin(i), slot_end(i)).
  std::size_t slot_begin(NodeId i) const { return offsets_[i]; }
  std::size_t slot_end(NodeId i) const { return offsets_[i + 1]; }
  std::size_t slot_count() const noexcept { return targets_.size(); }
  NodeId slot_target(std::size_t slot) const { return targets_[slot]; }
  double slot_weight(std::size_t slot) const { return slot_weights_[slot]; }
  std::size_t reverse_slot(std::size_t slot) const { return reverse_[slot]; }
  std::size_t slot_edge(std::size_t slot) const { return slot_edge_[slot]; }
  /// Slot of the u->v direction of canonical edge e.
  std::size_t edge_slot(std::size_t e) const { return edge_slot_[e]; }

  std::span<const NodeId> neighbors(NodeId i) const {
    return {targets_.data() + offsets_[i], targets_.data() + offsets_[i + 1]};
  }
  std::size_t neighbor_count(NodeId i) const { return offsets_[i + 1] - offsets_[i]; }

  /// External node identifiers; defaults to the decimal index.
  const std::string& id(NodeId i) const { return ids_[i]; }
  std::span<const std::string> ids() const noexcept { return ids_; }

 private:
  std::vector<Edge> edges_;
  std::vector<double> degrees_;
  std::vector<double> internal_;
  std::vector<std::string> ids_;
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> targets_;
  std::vector<double> slot_weights_;
  std::vector<std::size_t> reverse_;
  std::vector<std::size_t> slot_edge_;
  std::vector<std::size_t> edge_slot_;
  double total_weight_ = 0.0;
  bool has_internal_ = false;
};

struct Subgraph {
  Graph graph;
  /// new index -> index in the parent graph
  std::vector<NodeId> to_parent;
};

/// Subgraph induced by `nodes` (parent indices, kept in the given order).
Subgraph induced_subgraph(const Graph& g, std::span<const NodeId> nodes);

/// Connected component labels in [0, count), numbered by smallest member.
std::vector<std::uint32_t> connected_components(const Graph& g, std::size_t* count = nullptr);

/// Largest connected component; ties go to the component holding the smallest
/// original index. Node order is preserved.
Subgraph largest_connected_component(const Graph& g);

}  // namespace submarket
