#include "submarket/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "submarket/errors.hpp"

namespace submarket {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

// Enumerates every assignment with an odometer and accumulates marginals of
// exp(log_weight(c)). node_log(i, r) and edge_log(e, r, s) give the factorized
// part; `penalty` (if set) adds -sum_{rs} omega_rs D_r D_s with D_r the group
// degree sums of c.
struct Enumerator {
  const Graph& g;
  std::size_t k;
  const Matrix& node_log;          // n x k
  const std::vector<double>& edge_log;  // (e * k + r) * k + s
  const Matrix* penalty_omega;     // null for factorized models

  void run(ExactPosterior& out) const {
    const std::size_t n = g.node_count();
    const auto edges = g.edges();
    out.q1 = Matrix(n, k);
    out.q2.k = k;
    out.q2.data.assign(edges.size() * k * k, 0.0);

    std::vector<std::uint32_t> c(n, 0);
    std::vector<double> group_degree(k, 0.0);
    for (NodeId i = 0; i < n; ++i) group_degree[0] += g.degree(i);

    // running scale: accumulators hold sum exp(lw - scale)
    double scale = kNegInf;
    double total = 0.0;
    auto log_weight = [&]() {
      double lw = 0.0;
      for (NodeId i = 0; i < n; ++i) lw += node_log(i, c[i]);
      for (std::size_t e = 0; e < edges.size(); ++e) {
        lw += edge_log[(e * k + c[edges[e].u]) * k + c[edges[e].v]];
      }
      if (penalty_omega) {
        for (std::size_t r = 0; r < k; ++r) {
          for (std::size_t s = 0; s < k; ++s) lw -= (*penalty_omega)(r, s) * group_degree[r] * group_degree[s];
        }
      }
      return lw;
    };

    while (true) {
      const double lw = log_weight();
      if (lw > kNegInf) {
        if (lw > scale) {
          const double factor = scale == kNegInf ? 0.0 : std::exp(scale - lw);
          total *= factor;
          for (double& x : out.q1.data()) x *= factor;
          for (double& x : out.q2.data) x *= factor;
          scale = lw;
        }
        const double w = std::exp(lw - scale);
        total += w;
        for (NodeId i = 0; i < n; ++i) out.q1(i, c[i]) += w;
        for (std::size_t e = 0; e < edges.size(); ++e) {
          out.q2.data[(e * k + c[edges[e].u]) * k + c[edges[e].v]] += w;
        }
      }
      // advance odometer
      std::size_t i = 0;
      while (i < n) {
        group_degree[c[i]] -= g.degree(static_cast<NodeId>(i));
        if (++c[i] < k) {
          group_degree[c[i]] += g.degree(static_cast<NodeId>(i));
          break;
        }
        c[i] = 0;
        group_degree[0] += g.degree(static_cast<NodeId>(i));
        ++i;
      }
      if (i == n) break;
    }
    if (!(total > 0.0)) throw NumericalError("exact posterior: every assignment has zero weight");
    for (double& x : out.q1.data()) x /= total;
    for (double& x : out.q2.data) x /= total;
  }
};

}  // namespace

ExactPosterior exact_posterior(const Graph& g, const BlockModelParams& params,
                               const ExactPosteriorOptions& options) {
  params.validate();
  const std::size_t k = params.k();
  const std::size_t n = g.node_count();
  const double states = std::pow(static_cast<double>(k), static_cast<double>(n));
  if (states > options.max_states) {
    throw DataError("exact posterior: " + std::to_string(k) + "^" + std::to_string(n) +
                    " assignments exceeds the limit of " + std::to_string(options.max_states));
  }
  const auto edges = g.edges();

  Matrix node_log(n, k);
  std::vector<double> edge_log(edges.size() * k * k);
  ExactPosterior out;
  out.states = states;

  if (options.model == PosteriorModel::joint) {
    for (NodeId i = 0; i < n; ++i) {
      for (std::size_t r = 0; r < k; ++r) node_log(i, r) = safe_log(params.gamma[r]);
    }
    // each undirected edge appears twice in the ordered-pair sum
    for (std::size_t e = 0; e < edges.size(); ++e) {
      for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t s = 0; s < k; ++s) {
          const double lw = safe_log(params.omega(r, s));
          edge_log[(e * k + r) * k + s] = lw == kNegInf ? kNegInf : 2.0 * edges[e].weight * lw;
        }
      }
    }
    Enumerator{g, k, node_log, edge_log, &params.omega}.run(out);
    return out;
  }

  for (std::size_t e = 0; e < edges.size(); ++e) {
    for (std::size_t r = 0; r < k; ++r) {
      for (std::size_t s = 0; s < k; ++s) {
        const double lw = safe_log(params.omega(r, s));
        edge_log[(e * k + r) * k + s] = lw == kNegInf ? kNegInf : edges[e].weight * lw;
      }
    }
  }
  // self-consistent field, starting from the prior
  Matrix q(n, k);
  for (NodeId i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < k; ++r) q(i, r) = params.gamma[r];
  }
  out.field_converged = false;
  for (int it = 0; it < options.max_field_iterations; ++it) {
    std::vector<double> mass(k, 0.0), field(k, 0.0);
    for (NodeId i = 0; i < n; ++i) {
      for (std::size_t s = 0; s < k; ++s) mass[s] += g.degree(i) * q(i, s);
    }
    for (std::size_t r = 0; r < k; ++r) {
      for (std::size_t s = 0; s < k; ++s) field[r] += params.omega(r, s) * mass[s];
    }
    for (NodeId i = 0; i < n; ++i) {
      for (std::size_t r = 0; r < k; ++r) node_log(i, r) = safe_log(params.gamma[r]) - g.degree(i) * field[r];
    }
    Enumerator{g, k, node_log, edge_log, nullptr}.run(out);
    out.field_iterations = it + 1;
    double change = 0.0;
    for (std::size_t t = 0; t < q.data().size(); ++t) change = std::max(change, std::abs(q.data()[t] - out.q1.data()[t]));
    if (change < options.field_tol) {
      q = out.q1;
      out.field_converged = true;
      break;
    }
    const double keep = options.field_damping;
    for (std::size_t t = 0; t < q.data().size(); ++t) {
      q.data()[t] = keep * q.data()[t] + (1.0 - keep) * out.q1.data()[t];
    }
  }
  return out;
}

}  // namespace submarket
