#include "submarket/modularity.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "submarket/errors.hpp"

namespace submarket {
namespace {

// Working graph for one Louvain level. Self weight is the within-node weight
// (internal weight at level 0, collapsed community weight later).
struct LevelGraph {
  std::size_t n = 0;
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> targets;
  std::vector<double> weights;
  std::vector<double> self;
  std::vector<double> strength;
  double total = 0.0;  // W: edge weight + self weight
};

LevelGraph from_graph(const Graph& g) {
  LevelGraph lg;
  lg.n = g.node_count();
  lg.offsets.resize(lg.n + 1);
  lg.targets.resize(g.slot_count());
  lg.weights.resize(g.slot_count());
  for (NodeId i = 0; i < lg.n; ++i) lg.offsets[i] = g.slot_begin(i);
  lg.offsets[lg.n] = g.slot_count();
  for (std::size_t s = 0; s < g.slot_count(); ++s) {
    lg.targets[s] = g.slot_target(s);
    lg.weights[s] = g.slot_weight(s);
  }
  lg.self.assign(g.internal_weights().begin(), g.internal_weights().end());
  lg.strength.resize(lg.n);
  for (NodeId i = 0; i < lg.n; ++i) lg.strength[i] = g.strength(i);
  lg.total = g.total_weight();
  return lg;
}

double level_modularity(const LevelGraph& lg, const std::vector<std::uint32_t>& comm,
                        std::size_t k, double resolution) {
  std::vector<double> within(k, 0.0), tot(k, 0.0);
  for (std::size_t i = 0; i < lg.n; ++i) {
    within[comm[i]] += lg.self[i];
    tot[comm[i]] += lg.strength[i];
    for (std::size_t s = lg.offsets[i]; s < lg.offsets[i + 1]; ++s) {
      const auto j = lg.targets[s];
      if (j > i && comm[j] == comm[i]) within[comm[i]] += lg.weights[s];
    }
  }
  const double w = lg.total;
  double q = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    const double a = tot[c] / (2.0 * w);
    q += within[c] / w - resolution * a * a;
  }
  return q;
}

// Local moving phase. Returns true if any node moved.
bool move_nodes(const LevelGraph& lg, std::vector<std::uint32_t>& comm, double resolution,
                const LouvainOptions& opt, std::mt19937_64& rng) {
  const double w = lg.total;
  const double m2 = 2.0 * w;
  std::vector<double> tot(lg.n, 0.0);
  for (std::size_t i = 0; i < lg.n; ++i) tot[comm[i]] += lg.strength[i];

  std::vector<std::uint32_t> order(lg.n);
  std::iota(order.begin(), order.end(), 0u);
  std::vector<double> link(lg.n, 0.0);
  std::vector<std::uint32_t> touched;

  bool any_move = false;
  double q = level_modularity(lg, comm, lg.n, resolution);
  for (int sweep = 0; sweep < opt.max_sweeps_per_level; ++sweep) {
    std::shuffle(order.begin(), order.end(), rng);
    bool moved = false;
    for (const auto i : order) {
      const auto home = comm[i];
      const double ki = lg.strength[i];
      touched.clear();
      for (std::size_t s = lg.offsets[i]; s < lg.offsets[i + 1]; ++s) {
        const auto c = comm[lg.targets[s]];
        if (link[c] == 0.0) touched.push_back(c);
        link[c] += lg.weights[s];
      }
      tot[home] -= ki;
      // gain of joining c, in units of W * deltaQ
      auto gain = [&](std::uint32_t c) { return link[c] - resolution * tot[c] * ki / m2; };
      const double stay = gain(home);
      std::uint32_t best = home;
      double best_gain = stay;
      for (const auto c : touched) {
        const double gc = gain(c);
        if (gc > best_gain || (gc == best_gain && c < best)) {
          best = c;
          best_gain = gc;
        }
      }
      if (best != home && (best_gain - stay) / w > opt.min_gain) {
        comm[i] = best;
        moved = true;
      }
      tot[comm[i]] += ki;
      for (const auto c : touched) link[c] = 0.0;
      link[home] = 0.0;
    }
    if (!moved) break;
    any_move = true;
    const double q_next = level_modularity(lg, comm, lg.n, resolution);
    if (q_next < q - 1e-12) {
      throw std::logic_error("louvain: modularity decreased during local moving");
    }
    q = q_next;
  }
  return any_move;
}

// Compacts comm in place and returns the community graph.
LevelGraph aggregate(const LevelGraph& lg, std::vector<std::uint32_t>& comm) {
  const Partition p = Partition::compact(comm);
  comm = p.labels;
  LevelGraph out;
  out.n = p.k;
  out.self.assign(out.n, 0.0);
  out.strength.assign(out.n, 0.0);
  out.total = lg.total;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(out.n);
  for (std::size_t i = 0; i < lg.n; ++i) {
    const auto ci = comm[i];
    out.self[ci] += lg.self[i];
    out.strength[ci] += lg.strength[i];
    for (std::size_t s = lg.offsets[i]; s < lg.offsets[i + 1]; ++s) {
      const auto j = lg.targets[s];
      const auto cj = comm[j];
      if (ci == cj) {
        if (j > i) out.self[ci] += lg.weights[s];
      } else {
        rows[ci].push_back({cj, lg.weights[s]});
      }
    }
  }
  out.offsets.assign(out.n + 1, 0);
  for (std::size_t c = 0; c < out.n; ++c) {
    auto& row = rows[c];
    std::sort(row.begin(), row.end());
    std::size_t kept = 0;
    for (std::size_t t = 0; t < row.size(); ++t) {
      if (kept > 0 && row[kept - 1].first == row[t].first) {
        row[kept - 1].second += row[t].second;
      } else {
        row[kept++] = row[t];
      }
    }
    row.resize(kept);
    out.offsets[c + 1] = out.offsets[c] + kept;
  }
  out.targets.reserve(out.offsets[out.n]);
  out.weights.reserve(out.offsets[out.n]);
  for (const auto& row : rows) {
    for (const auto& [t, w] : row) {
      out.targets.push_back(t);
      out.weights.push_back(w);
    }
  }
  return out;
}

}  // namespace

double modularity(const Graph& g, const Partition& p, double resolution) {
  if (p.labels.size() != g.node_count()) {
    throw DataError("partition covers " + std::to_string(p.labels.size()) + " nodes, graph has " +
                    std::to_string(g.node_count()));
  }
  const double w = g.total_weight();
  if (g.empty() || !(w > 0.0)) throw DataError("modularity undefined: graph has zero total weight");
  std::uint32_t k = 0;
  for (auto l : p.labels) k = std::max(k, l + 1);
  std::vector<double> within(k, 0.0), tot(k, 0.0);
  for (NodeId i = 0; i < g.node_count(); ++i) {
    within[p.labels[i]] += g.internal_weight(i);
    tot[p.labels[i]] += g.strength(i);
  }
  for (const Edge& e : g.edges()) {
    if (p.labels[e.u] == p.labels[e.v]) within[p.labels[e.u]] += e.weight;
  }
  double q = 0.0;
  for (std::uint32_t c = 0; c < k; ++c) {
    const double a = tot[c] / (2.0 * w);
    q += within[c] / w - resolution * a * a;
  }
  return q;
}

LouvainResult louvain(const Graph& g, const LouvainOptions& options) {
  if (g.empty()) throw DataError("louvain: empty graph");
  if (!(options.resolution > 0.0)) throw DataError("louvain: resolution must be positive");
  LouvainResult result;
  std::vector<std::uint32_t> labels(g.node_count());
  std::iota(labels.begin(), labels.end(), 0u);
  if (!(g.total_weight() > 0.0)) {
    result.partition = Partition::compact(labels);
    return result;
  }

  std::mt19937_64 rng(options.seed);
  LevelGraph level = from_graph(g);
  while (true) {
    std::vector<std::uint32_t> comm(level.n);
    std::iota(comm.begin(), comm.end(), 0u);
    const bool moved = move_nodes(level, comm, options.resolution, options, rng);
    if (!moved) break;
    LevelGraph next = aggregate(level, comm);
    for (auto& l : labels) l = comm[l];
    result.level_modularity.push_back(modularity(g, Partition::compact(labels), options.resolution));
    level = std::move(next);
  }
  result.partition = Partition::compact(labels);
  result.modularity = modularity(g, result.partition, options.resolution);
  return result;
}

Partition louvain(const Graph& g, double resolution, std::uint64_t seed) {
  LouvainOptions opt;
  opt.resolution = resolution;
  opt.seed = seed;
  return louvain(g, opt).partition;
}

ExhaustiveModularity exhaustive_max_modularity(const Graph& g, double resolution, std::size_t max_nodes) {
  const std::size_t n = g.node_count();
  if (n == 0) throw DataError("exhaustive modularity: empty graph");
  if (n > max_nodes) {
    throw DataError("exhaustive modularity: " + std::to_string(n) + " nodes exceeds limit " +
                    std::to_string(max_nodes));
  }
  ExhaustiveModularity best;
  best.modularity = -std::numeric_limits<double>::infinity();
  // restricted growth strings: a[0] = 0, a[i] <= 1 + max(a[0..i-1])
  std::vector<std::uint32_t> a(n, 0), prefix_max(n, 0);
  Partition p;
  p.labels.resize(n);
  while (true) {
    p.labels = a;
    const double q = modularity(g, p, resolution);
    ++best.partitions_checked;
    if (q > best.modularity) {
      best.modularity = q;
      best.best = Partition::compact(a);
    }
    // next string
    std::size_t i = n - 1;
    while (i > 0 && a[i] == prefix_max[i - 1] + 1) --i;
    if (i == 0) break;
    ++a[i];
    prefix_max[i] = std::max(prefix_max[i - 1], a[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      a[j] = 0;
      prefix_max[j] = prefix_max[i];
    }
  }
  return best;
}

}  // namespace submarket
