#include "submarket/edge_list.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string_view>
#include <unordered_map>

#include "submarket/errors.hpp"

namespace submarket {
namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

bool skippable(std::string_view line) {
  return line.empty() || line.front() == '#';
}

double parse_weight(std::string_view text, std::size_t line_no) {
  double w = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), w);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(w)) {
    throw ParseError(line_no, "non-numeric weight '" + std::string(text) + "'");
  }
  if (w < 0.0) throw ParseError(line_no, "negative weight");
  return w;
}

struct PairHash {
  std::size_t operator()(std::uint64_t key) const noexcept { return std::hash<std::uint64_t>{}(key); }
};

}  // namespace

LoadedGraph load_edge_list(std::istream& in, const EdgeListOptions& options) {
  LoadedGraph result;
  std::unordered_map<std::string, NodeId> index;
  std::vector<std::string> ids;
  std::vector<Edge> edges;
  std::unordered_map<std::uint64_t, std::size_t, PairHash> seen;
  std::vector<double> internal;

  auto intern = [&](std::string_view token) {
    auto [it, inserted] = index.try_emplace(std::string(token), static_cast<NodeId>(ids.size()));
    if (inserted) {
      ids.emplace_back(token);
      internal.push_back(0.0);
    }
    return it->second;
  };

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = strip_cr(raw);
    if (skippable(line)) continue;
    const auto fields = split_tabs(line);
    const std::size_t max_fields = options.weighted ? 3 : 2;
    if (fields.size() < 2 || fields.size() > max_fields) {
      throw ParseError(line_no, "expected " + std::string(options.weighted ? "2 or 3" : "2") +
                                    " tab-separated fields, got " + std::to_string(fields.size()));
    }
    if (fields[0].empty() || fields[1].empty()) throw ParseError(line_no, "empty node identifier");
    const double w = fields.size() == 3 ? parse_weight(fields[2], line_no) : 1.0;
    NodeId a = intern(fields[0]);
    NodeId b = intern(fields[1]);
    if (a == b) {
      if (options.self_loops == SelfLoopPolicy::internal) {
        internal[a] += w;
      } else {
        ++result.self_loops_dropped;
      }
      continue;
    }
    if (a > b) std::swap(a, b);
    const std::uint64_t key = (std::uint64_t{a} << 32) | b;
    auto [it, inserted] = seen.try_emplace(key, edges.size());
    if (inserted) {
      edges.push_back({a, b, w});
    } else if (options.dedup == DuplicatePolicy::error) {
      throw DuplicateEdgeError(line_no, "duplicate edge " + std::string(fields[0]) + " - " +
                                            std::string(fields[1]));
    } else {
      edges[it->second].weight += w;
      ++result.duplicates_merged;
    }
  }
  if (result.self_loops_dropped > 0) {
    result.warnings.push_back("dropped " + std::to_string(result.self_loops_dropped) + " self-loop(s)");
  }
  const std::size_t n = ids.size();
  result.graph = Graph::from_edges(n, std::move(edges), std::move(internal), std::move(ids));
  return result;
}

LoadedGraph load_edge_list_file(const std::string& path, const EdgeListOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return load_edge_list(in, options);
}

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

void write_edge_list(std::ostream& out, const Graph& g) {
  const bool weighted = !g.is_simple();
  auto emit = [&](NodeId a, NodeId b, double w) {
    out << g.id(a) << '\t' << g.id(b);
    if (weighted) out << '\t' << format_double(w);
    out << '\n';
  };
  // merge internal (i,i) lines into the canonical (u, v) order
  const auto edges = g.edges();
  std::size_t e = 0;
  for (NodeId i = 0; i < g.node_count(); ++i) {
    if (g.internal_weight(i) != 0.0) emit(i, i, g.internal_weight(i));
    for (; e < edges.size() && edges[e].u == i; ++e) emit(edges[e].u, edges[e].v, edges[e].weight);
  }
}

void RegionInteractionLog::add(std::string a, std::string b) {
  if (a.empty() || b.empty()) throw DataError("empty region code");
  if (b < a) std::swap(a, b);
  records.emplace_back(std::move(a), std::move(b));
}

RegionInteractionLog load_region_log(std::istream& in) {
  RegionInteractionLog log;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = strip_cr(raw);
    if (skippable(line)) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 2) {
      throw ParseError(line_no, "expected 2 tab-separated region codes, got " + std::to_string(fields.size()));
    }
    if (fields[0].empty() || fields[1].empty()) throw ParseError(line_no, "empty region code");
    log.add(std::string(fields[0]), std::string(fields[1]));
  }
  return log;
}

Graph aggregate_by_region(const RegionInteractionLog& log) {
  std::map<std::string, NodeId> index;
  for (const auto& [a, b] : log.records) {
    index.emplace(a, 0);
    index.emplace(b, 0);
  }
  std::vector<std::string> ids;
  ids.reserve(index.size());
  for (auto& [code, idx] : index) {
    idx = static_cast<NodeId>(ids.size());
    ids.push_back(code);
  }
  std::vector<double> internal(ids.size(), 0.0);
  std::map<std::pair<NodeId, NodeId>, double> counts;
  for (const auto& [a, b] : log.records) {
    const NodeId ia = index.at(a);
    const NodeId ib = index.at(b);
    if (ia == ib) {
      internal[ia] += 1.0;
    } else {
      counts[{std::min(ia, ib), std::max(ia, ib)}] += 1.0;
    }
  }
  std::vector<Edge> edges;
  edges.reserve(counts.size());
  for (const auto& [key, w] : counts) edges.push_back({key.first, key.second, w});
  const std::size_t n = ids.size();
  return Graph::from_edges(n, std::move(edges), std::move(internal), std::move(ids));
}

}  // namespace submarket
