#include "submarket/dcsbm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include <nlohmann/json.hpp>

#include "submarket/errors.hpp"

namespace submarket {

void BlockModelParams::validate() const {
  const std::size_t n = k();
  if (n == 0) throw DataError("block model needs k >= 1");
  if (omega.rows() != n || omega.cols() != n) throw DataError("omega must be k x k");
  double sum = 0.0;
  for (double g : gamma) {
    if (!(g >= 0.0) || !std::isfinite(g)) throw DataError("gamma entries must be non-negative");
    sum += g;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw DataError("gamma must sum to 1");
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t s = 0; s < n; ++s) {
      const double w = omega(r, s);
      if (!(w >= 0.0) || !std::isfinite(w)) throw DataError("omega entries must be non-negative");
      if (w != omega(s, r)) throw DataError("omega must be symmetric");
    }
  }
}

nlohmann::json to_json(const BlockModelParams& p) {
  nlohmann::json omega = nlohmann::json::array();
  for (std::size_t r = 0; r < p.k(); ++r) {
    const auto row = p.omega.row(r);
    omega.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return {{"k", p.k()}, {"gamma", p.gamma}, {"omega", omega}};
}

BlockModelParams params_from_json(const nlohmann::json& j) {
  BlockModelParams p;
  try {
    p.gamma = j.at("gamma").get<std::vector<double>>();
    const auto rows = j.at("omega").get<std::vector<std::vector<double>>>();
    const std::size_t k = p.gamma.size();
    if (j.contains("k") && j.at("k").get<std::size_t>() != k) {
      throw DataError("params: k does not match gamma length");
    }
    if (rows.size() != k) throw DataError("params: omega must have k rows");
    p.omega = Matrix(k, k);
    for (std::size_t r = 0; r < k; ++r) {
      if (rows[r].size() != k) throw DataError("params: omega must have k columns");
      for (std::size_t s = 0; s < k; ++s) p.omega(r, s) = rows[r][s];
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("params: ") + e.what());
  }
  p.validate();
  return p;
}

BlockModelParams load_params_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  return params_from_json(j);
}

GeneratedGraph generate(std::size_t n, const BlockModelParams& params,
                        std::span<const double> target_degrees, std::uint64_t seed,
                        const GenerateOptions& options) {
  params.validate();
  if (target_degrees.size() != n) throw DataError("generate: need one target degree per node");
  for (double d : target_degrees) {
    if (!(d > 0.0) || !std::isfinite(d)) throw DataError("generate: target degrees must be positive");
  }
  const std::size_t k = params.k();
  std::mt19937_64 rng(seed);

  std::discrete_distribution<std::uint32_t> pick_group(params.gamma.begin(), params.gamma.end());
  std::vector<std::uint32_t> labels(n);
  std::vector<std::vector<NodeId>> members(k);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = pick_group(rng);
    members[labels[i]].push_back(static_cast<NodeId>(i));
  }

  std::vector<double> degree_sum(k, 0.0), square_sum(k, 0.0), top1(k, 0.0), top2(k, 0.0);
  for (std::size_t r = 0; r < k; ++r) {
    for (NodeId i : members[r]) {
      const double d = target_degrees[i];
      degree_sum[r] += d;
      square_sum[r] += d * d;
      if (d > top1[r]) {
        top2[r] = top1[r];
        top1[r] = d;
      } else if (d > top2[r]) {
        top2[r] = d;
      }
    }
  }
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t s = r; s < k; ++s) {
      const double peak = (r == s ? top1[r] * top2[r] : top1[r] * top1[s]) * params.omega(r, s);
      if (peak > options.dense_cap) {
        throw DataError("generate: pair mean " + std::to_string(peak) + " exceeds dense cap " +
                        std::to_string(options.dense_cap) + " (parameters outside the sparse regime)");
      }
    }
  }

  std::vector<std::discrete_distribution<std::size_t>> pick_member(k);
  for (std::size_t r = 0; r < k; ++r) {
    std::vector<double> w;
    w.reserve(members[r].size());
    for (NodeId i : members[r]) w.push_back(target_degrees[i]);
    if (!w.empty()) pick_member[r] = std::discrete_distribution<std::size_t>(w.begin(), w.end());
  }

  std::vector<Edge> edges;
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t s = r; s < k; ++s) {
      const double w = params.omega(r, s);
      if (w == 0.0 || members[r].empty() || members[s].empty()) continue;
      // mean over unordered pairs i<j with c_i=r, c_j=s
      const double mean = r == s ? 0.5 * w * (degree_sum[r] * degree_sum[r] - square_sum[r])
                                 : w * degree_sum[r] * degree_sum[s];
      if (!(mean > 0.0)) continue;
      std::poisson_distribution<long long> count_dist(mean);
      const long long count = count_dist(rng);
      for (long long t = 0; t < count; ++t) {
        NodeId a = members[r][pick_member[r](rng)];
        NodeId b = members[s][pick_member[s](rng)];
        while (a == b) b = members[s][pick_member[s](rng)];
        edges.push_back({std::min(a, b), std::max(a, b), 1.0});
      }
    }
  }
  if (options.mode == GenerateMode::simple) {
    std::sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) {
      return x.u != y.u ? x.u < y.u : x.v < y.v;
    });
    edges.erase(std::unique(edges.begin(), edges.end(),
                            [](const Edge& x, const Edge& y) { return x.u == y.u && x.v == y.v; }),
                edges.end());
  }

  GeneratedGraph out;
  out.graph = Graph::from_edges(n, std::move(edges));
  out.planted = Partition::with_groups(std::move(labels), static_cast<std::uint32_t>(k));
  return out;
}

LogLikelihood log_likelihood(const Graph& g, const Partition& c, const BlockModelParams& params) {
  const std::size_t k = params.k();
  if (c.labels.size() != g.node_count()) throw DataError("log_likelihood: partition size mismatch");
  for (auto l : c.labels) {
    if (l >= k) throw DataError("log_likelihood: label out of range");
  }
  LogLikelihood result;
  double edge_term = 0.0;
  for (const Edge& e : g.edges()) {
    const double w = params.omega(c.labels[e.u], c.labels[e.v]);
    if (w == 0.0) {
      ++result.impossible_edges;
    } else {
      edge_term += 2.0 * e.weight * std::log(w);
    }
  }
  std::vector<double> degree_sum(k, 0.0);
  for (NodeId i = 0; i < g.node_count(); ++i) degree_sum[c.labels[i]] += g.degree(i);
  double penalty = 0.0;
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t s = 0; s < k; ++s) penalty += params.omega(r, s) * degree_sum[r] * degree_sum[s];
  }
  result.value = result.impossible_edges > 0 ? -std::numeric_limits<double>::infinity()
                                             : edge_term - penalty;
  return result;
}

}  // namespace submarket
