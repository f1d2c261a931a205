#include "submarket/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "submarket/errors.hpp"

namespace submarket {

Graph Graph::from_edges(std::size_t node_count, std::vector<Edge> edges,
                        std::vector<double> internal_weights,
                        std::vector<std::string> ids) {
  Graph g;
  for (Edge& e : edges) {
    if (e.u >= node_count || e.v >= node_count) {
      throw DataError("edge endpoint out of range");
    }
    if (e.u == e.v) throw DataError("self-loop on node " + std::to_string(e.u));
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
      throw DataError("edge weight must be finite and non-negative");
    }
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  });
  // merge duplicates
  std::size_t out = 0;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (out > 0 && edges[out - 1].u == edges[i].u && edges[out - 1].v == edges[i].v) {
      edges[out - 1].weight += edges[i].weight;
    } else {
      edges[out++] = edges[i];
    }
  }
  edges.resize(out);
  g.edges_ = std::move(edges);

  if (internal_weights.empty()) internal_weights.assign(node_count, 0.0);
  if (internal_weights.size() != node_count) {
    throw DataError("internal weight vector does not match node count");
  }
  for (double w : internal_weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DataError("internal weight must be non-negative");
    if (w != 0.0) g.has_internal_ = true;
  }
  g.internal_ = std::move(internal_weights);

  if (ids.empty()) {
    ids.reserve(node_count);
    for (std::size_t i = 0; i < node_count; ++i) ids.push_back(std::to_string(i));
  }
  if (ids.size() != node_count) throw DataError("id vector does not match node count");
  g.ids_ = std::move(ids);

  // CSR with both directions per edge
  g.degrees_.assign(node_count, 0.0);
  g.offsets_.assign(node_count + 1, 0);
  for (const Edge& e : g.edges_) {
    ++g.offsets_[e.u + 1];
    ++g.offsets_[e.v + 1];
    g.degrees_[e.u] += e.weight;
    g.degrees_[e.v] += e.weight;
  }
  std::partial_sum(g.offsets_.begin(), g.offsets_.end(), g.offsets_.begin());
  const std::size_t slots = 2 * g.edges_.size();
  g.targets_.resize(slots);
  g.slot_weights_.resize(slots);
  g.reverse_.resize(slots);
  g.slot_edge_.resize(slots);
  g.edge_slot_.resize(g.edges_.size());
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (std::size_t e = 0; e < g.edges_.size(); ++e) {
    const Edge& ed = g.edges_[e];
    const std::size_t fwd = cursor[ed.u]++;
    const std::size_t bwd = cursor[ed.v]++;
    g.targets_[fwd] = ed.v;
    g.targets_[bwd] = ed.u;
    g.slot_weights_[fwd] = g.slot_weights_[bwd] = ed.weight;
    g.reverse_[fwd] = bwd;
    g.reverse_[bwd] = fwd;
    g.slot_edge_[fwd] = g.slot_edge_[bwd] = e;
    g.edge_slot_[e] = fwd;
  }

  double total = 0.0;
  for (const Edge& e : g.edges_) total += e.weight;
  for (double w : g.internal_) total += w;
  g.total_weight_ = total;
  return g;
}

bool Graph::is_simple() const noexcept {
  if (has_internal_) return false;
  return std::all_of(edges_.begin(), edges_.end(), [](const Edge& e) { return e.weight == 1.0; });
}

Subgraph induced_subgraph(const Graph& g, std::span<const NodeId> nodes) {
  constexpr NodeId kAbsent = ~NodeId{0};
  std::vector<NodeId> to_new(g.node_count(), kAbsent);
  for (std::size_t i = 0; i < nodes.size(); ++i) to_new[nodes[i]] = static_cast<NodeId>(i);

  std::vector<Edge> edges;
  for (const Edge& e : g.edges()) {
    if (to_new[e.u] != kAbsent && to_new[e.v] != kAbsent) {
      edges.push_back({to_new[e.u], to_new[e.v], e.weight});
    }
  }
  std::vector<double> internal;
  std::vector<std::string> ids;
  internal.reserve(nodes.size());
  ids.reserve(nodes.size());
  for (NodeId old : nodes) {
    internal.push_back(g.internal_weight(old));
    ids.push_back(g.id(old));
  }
  Subgraph sub;
  sub.graph = Graph::from_edges(nodes.size(), std::move(edges), std::move(internal), std::move(ids));
  sub.to_parent.assign(nodes.begin(), nodes.end());
  return sub;
}

std::vector<std::uint32_t> connected_components(const Graph& g, std::size_t* count) {
  constexpr std::uint32_t kUnseen = ~std::uint32_t{0};
  std::vector<std::uint32_t> label(g.node_count(), kUnseen);
  std::vector<NodeId> stack;
  std::uint32_t next = 0;
  for (NodeId seed = 0; seed < g.node_count(); ++seed) {
    if (label[seed] != kUnseen) continue;
    label[seed] = next;
    stack.push_back(seed);
    while (!stack.empty()) {
      const NodeId i = stack.back();
      stack.pop_back();
      for (NodeId j : g.neighbors(i)) {
        if (label[j] == kUnseen) {
          label[j] = next;
          stack.push_back(j);
        }
      }
    }
    ++next;
  }
  if (count) *count = next;
  return label;
}

Subgraph largest_connected_component(const Graph& g) {
  if (g.empty()) return {};
  std::size_t count = 0;
  const auto label = connected_components(g, &count);
  std::vector<std::size_t> size(count, 0);
  for (auto l : label) ++size[l];
  // components are numbered by their smallest member, so the first maximum wins ties
  const auto best = static_cast<std::uint32_t>(
      std::max_element(size.begin(), size.end()) - size.begin());
  std::vector<NodeId> keep;
  keep.reserve(size[best]);
  for (NodeId i = 0; i < g.node_count(); ++i) {
    if (label[i] == best) keep.push_back(i);
  }
  return induced_subgraph(g, keep);
}

}  // namespace submarket
