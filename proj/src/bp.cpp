#include "submarket/bp.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "bp_kernel.hpp"
#include "submarket/errors.hpp"

namespace submarket {
namespace {

void normalize(std::span<double> v) {
  double total = 0.0;
  for (double x : v) total += x;
  for (double& x : v) x /= total;
}

void check_shapes(const Graph& g, const BlockModelParams& params, const BpState& state) {
  const std::size_t k = params.k();
  if (state.beliefs.k != k || state.beliefs.mu.size() != g.slot_count() * k) {
    throw DataError("belief state does not match graph and k");
  }
  if (state.q1.rows() != g.node_count() || state.q1.cols() != k) {
    throw DataError("marginal matrix does not match graph and k");
  }
}

}  // namespace

BpState random_bp_state(const Graph& g, std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  BpState state;
  state.beliefs.k = k;
  state.beliefs.mu.resize(g.slot_count() * k);
  state.q1 = Matrix(g.node_count(), k);
  auto fill = [&](std::span<double> v) {
    // a zero draw is possible in principle; keep every entry positive
    for (double& x : v) x = std::max(unit(rng), 1e-12);
    normalize(v);
  };
  for (std::size_t s = 0; s < g.slot_count(); ++s) fill(state.beliefs.at(s));
  for (std::size_t i = 0; i < g.node_count(); ++i) fill(state.q1.row(i));
  return state;
}

std::vector<double> external_field(const Graph& g, const BlockModelParams& params, const Matrix& q1) {
  const std::size_t k = params.k();
  std::vector<double> mass(k, 0.0);
  for (NodeId i = 0; i < g.node_count(); ++i) {
    const auto row = q1.row(i);
    for (std::size_t s = 0; s < k; ++s) mass[s] += g.degree(i) * row[s];
  }
  std::vector<double> h(k, 0.0);
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t s = 0; s < k; ++s) h[r] += params.omega(r, s) * mass[s];
  }
  return h;
}

double bp_sweep(const Graph& g, const BlockModelParams& params, BpState& state, double damping,
                BpSchedule schedule) {
  check_shapes(g, params, state);
  if (!(damping >= 0.0 && damping < 1.0)) throw DataError("damping must lie in [0, 1)");
  auto field = external_field(g, params, state.q1);
  return schedule == BpSchedule::parallel ? detail::sweep_parallel(g, params, state, field, damping)
                                          : detail::sweep_sequential(g, params, state, field, damping);
}

BpRunResult run_bp(const Graph& g, const BlockModelParams& params, BpState& state, const BpOptions& options) {
  if (!(options.tol > 0.0)) throw DataError("bp tolerance must be positive");
  BpRunResult result;
  while (result.sweeps < options.max_sweeps) {
    result.last_change = bp_sweep(g, params, state, options.damping, options.schedule);
    ++result.sweeps;
    if (options.track_normalization) {
      result.max_norm_error = std::max({result.max_norm_error, belief_norm_error(state.beliefs),
                                        marginal_norm_error(state.q1)});
    }
    if (result.last_change < options.tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

PairMarginals two_node_marginals(const Graph& g, const BlockModelParams& params, const Beliefs& beliefs,
                                 bool strict) {
  const std::size_t k = params.k();
  PairMarginals q2;
  q2.k = k;
  q2.data.resize(g.edge_count() * k * k);
  const auto edges = g.edges();
  const auto m = static_cast<std::int64_t>(edges.size());
  bool failed = false;

#pragma omp parallel for schedule(static)
  for (std::int64_t e = 0; e < m; ++e) {
    const std::size_t fwd = g.edge_slot(static_cast<std::size_t>(e));
    const auto mu_uv = beliefs.at(fwd);
    const auto mu_vu = beliefs.at(g.reverse_slot(fwd));
    const double dd = g.degree(edges[e].u) * g.degree(edges[e].v);
    auto block = q2.block(static_cast<std::size_t>(e));
    double total = 0.0;
    for (std::size_t r = 0; r < k; ++r) {
      for (std::size_t s = 0; s < k; ++s) {
        double x = params.omega(r, s) * mu_uv[r] * mu_vu[s];
        if (strict) x *= std::exp(-dd * params.omega(r, s));
        block[r * k + s] = x;
        total += x;
      }
    }
    if (total > 0.0) {
      for (double& x : block) x /= total;
    } else {
#pragma omp atomic write
      failed = true;
    }
  }
  if (failed) {
    for (std::size_t e = 0; e < edges.size(); ++e) {
      double total = 0.0;
      for (double x : q2.block(e)) total += x;
      if (!(total > 0.0)) {
        throw NumericalError("two-node marginal has zero normalizer on edge " + g.id(edges[e].u) + " - " +
                             g.id(edges[e].v));
      }
    }
  }
  return q2;
}

MStepResult m_step(const Graph& g, const Matrix& q1, const PairMarginals& q2) {
  const std::size_t k = q1.cols();
  const std::size_t n = g.node_count();
  if (q1.rows() != n || q2.k != k || q2.edge_count() != g.edge_count()) {
    throw DataError("m_step: marginal shapes do not match the graph");
  }
  MStepResult out;
  auto& p = out.params;
  p.gamma.assign(k, 0.0);
  std::vector<double> degree_mass(k, 0.0);
  for (NodeId i = 0; i < n; ++i) {
    const auto row = q1.row(i);
    for (std::size_t r = 0; r < k; ++r) {
      p.gamma[r] += row[r];
      degree_mass[r] += g.degree(i) * row[r];
    }
  }
  for (double& x : p.gamma) x /= static_cast<double>(n);

  Matrix counts(k, k);
  const auto edges = g.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double a = edges[e].weight;
    const auto block = q2.block(e);
    for (std::size_t r = 0; r < k; ++r) {
      for (std::size_t s = 0; s < k; ++s) {
        // ordered pairs: (u, v) contributes block, (v, u) its transpose
        counts(r, s) += a * block[r * k + s];
        counts(s, r) += a * block[r * k + s];
      }
    }
  }

  const double mass_floor = 1e-8;
  for (std::size_t r = 0; r < k; ++r) {
    if (p.gamma[r] < mass_floor || !(degree_mass[r] > 0.0)) out.collapsed.push_back(static_cast<std::uint32_t>(r));
  }
  p.omega = Matrix(k, k);
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t s = r; s < k; ++s) {
      const double denom = degree_mass[r] * degree_mass[s];
      const double w = denom > 0.0 ? 0.5 * (counts(r, s) + counts(s, r)) / denom : 0.0;
      p.omega(r, s) = p.omega(s, r) = w;
    }
  }
  return out;
}

std::vector<double> expected_degrees(const Graph& g, const Matrix& q1, const BlockModelParams& params) {
  const std::size_t k = params.k();
  std::vector<double> mass(k, 0.0);
  for (NodeId i = 0; i < g.node_count(); ++i) {
    for (std::size_t s = 0; s < k; ++s) mass[s] += g.degree(i) * q1(i, s);
  }
  std::vector<double> per_group(k, 0.0);  // sum_s omega_rs D_s
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t s = 0; s < k; ++s) per_group[r] += params.omega(r, s) * mass[s];
  }
  std::vector<double> out(g.node_count(), 0.0);
  for (NodeId i = 0; i < g.node_count(); ++i) {
    double acc = 0.0;
    for (std::size_t r = 0; r < k; ++r) acc += q1(i, r) * per_group[r];
    out[i] = g.degree(i) * acc;
  }
  return out;
}

double objective_proxy(const Graph& g, const BlockModelParams& params, const Matrix& q1,
                       const PairMarginals& q2) {
  const std::size_t k = params.k();
  double edge_term = 0.0;
  const auto edges = g.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto block = q2.block(e);
    for (std::size_t r = 0; r < k; ++r) {
      for (std::size_t s = 0; s < k; ++s) {
        const double q = block[r * k + s];
        if (q == 0.0) continue;
        const double w = params.omega(r, s);
        edge_term += 2.0 * edges[e].weight * q *
                     (w > 0.0 ? std::log(w) : -std::numeric_limits<double>::infinity());
      }
    }
  }
  std::vector<double> mass(k, 0.0);
  double prior_term = 0.0;
  for (NodeId i = 0; i < g.node_count(); ++i) {
    for (std::size_t r = 0; r < k; ++r) {
      const double q = q1(i, r);
      mass[r] += g.degree(i) * q;
      if (q > 0.0) {
        prior_term += q * (params.gamma[r] > 0.0 ? std::log(params.gamma[r])
                                                  : -std::numeric_limits<double>::infinity());
      }
    }
  }
  double penalty = 0.0;
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t s = 0; s < k; ++s) penalty += params.omega(r, s) * mass[r] * mass[s];
  }
  return edge_term - penalty + prior_term;
}

double belief_norm_error(const Beliefs& b) {
  double worst = 0.0;
  for (std::size_t s = 0; b.k > 0 && s < b.mu.size() / b.k; ++s) {
    double total = 0.0;
    for (double x : b.at(s)) {
      if (x < 0.0) return std::numeric_limits<double>::infinity();
      total += x;
    }
    worst = std::max(worst, std::abs(total - 1.0));
  }
  return worst;
}

double marginal_norm_error(const Matrix& q1) {
  double worst = 0.0;
  for (std::size_t i = 0; i < q1.rows(); ++i) {
    double total = 0.0;
    for (double x : q1.row(i)) {
      if (x < 0.0) return std::numeric_limits<double>::infinity();
      total += x;
    }
    worst = std::max(worst, std::abs(total - 1.0));
  }
  return worst;
}

double pair_norm_error(const PairMarginals& q2) {
  double worst = 0.0;
  for (std::size_t e = 0; e < q2.edge_count(); ++e) {
    double total = 0.0;
    for (double x : q2.block(e)) {
      if (x < 0.0) return std::numeric_limits<double>::infinity();
      total += x;
    }
    worst = std::max(worst, std::abs(total - 1.0));
  }
  return worst;
}

}  // namespace submarket
