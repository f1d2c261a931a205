#include "submarket/em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "submarket/errors.hpp"

namespace submarket {
namespace {

std::uint64_t restart_seed(std::uint64_t seed, int restart) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(restart), 0x5eedu};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (std::uint64_t{out[0]} << 32) | out[1];
}

double total_degree(const Graph& g) {
  double sum = 0.0;
  for (double d : g.degrees()) sum += d;
  return sum;
}

// Puts collapsed groups back near the average of the others.
void reseed_groups(BlockModelParams& p, const std::vector<std::uint32_t>& groups, double jitter,
                   std::mt19937_64& rng) {
  const std::size_t k = p.k();
  std::vector<bool> dead(k, false);
  for (auto r : groups) dead[r] = true;
  double omega_sum = 0.0;
  std::size_t omega_n = 0;
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t s = 0; s < k; ++s) {
      if (!dead[r] && !dead[s]) {
        omega_sum += p.omega(r, s);
        ++omega_n;
      }
    }
  }
  const double base = omega_n > 0 ? omega_sum / static_cast<double>(omega_n) : 0.0;
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  for (auto r : groups) {
    p.gamma[r] = 1.0 / static_cast<double>(k);
    for (std::size_t s = 0; s < k; ++s) {
      const double w = base * (1.0 + jitter * unit(rng));
      p.omega(r, s) = p.omega(s, r) = w;
    }
  }
  double total = 0.0;
  for (double x : p.gamma) total += x;
  for (double& x : p.gamma) x /= total;
}

struct RestartOutcome {
  RestartSummary summary;
  BlockModelParams params;
  BpState state;
  PairMarginals q2;
  std::vector<EmIteration> history;
  InvariantReport invariants;
};

RestartOutcome run_restart(const Graph& g, const FitOptions& opt, int restart) {
  const std::uint64_t seed = restart_seed(opt.seed, restart);
  std::mt19937_64 rng(seed);
  RestartOutcome out;
  out.params = initial_params(g, opt.k, opt.init_jitter, rng(), opt.partner_contrast);
  out.state = random_bp_state(g, opt.k, rng());

  BpOptions bp;
  bp.tol = opt.bp_tol;
  bp.max_sweeps = opt.max_sweeps;
  bp.damping = opt.damping;
  bp.schedule = opt.schedule;
  bp.track_normalization = opt.track_invariants;

  bool reseeded = false;
  int stalled = 0;
  for (int iter = 0; iter < opt.max_em_iters; ++iter) {
    const BpRunResult run = run_bp(g, out.params, out.state, bp);
    stalled = run.converged ? 0 : stalled + 1;
    if (!run.converged) bp.damping = std::min(std::max(opt.max_damping, opt.damping), bp.damping + opt.damping_step);
    out.q2 = two_node_marginals(g, out.params, out.state.beliefs, opt.strict_pair_marginals);
    MStepResult next = m_step(g, out.state.q1, out.q2);

    EmIteration record;
    record.bp_sweeps = run.sweeps;
    record.bp_converged = run.converged;
    if (opt.track_invariants) {
      double gsum = 0.0;
      for (double x : next.params.gamma) gsum += x;
      out.invariants.belief_norm = std::max(out.invariants.belief_norm, run.max_norm_error);
      out.invariants.marginal_norm = std::max(out.invariants.marginal_norm, marginal_norm_error(out.state.q1));
      out.invariants.pair_norm = std::max(out.invariants.pair_norm, pair_norm_error(out.q2));
      out.invariants.gamma_norm = std::max(out.invariants.gamma_norm, std::abs(gsum - 1.0));
      out.invariants.sweeps_checked += static_cast<std::size_t>(run.sweeps);
      ++out.invariants.m_steps_checked;
    }

    if (!next.collapsed.empty()) {
      if (reseeded) {
        out.summary.degenerate = true;
        out.history.push_back(record);
        break;
      }
      reseeded = true;
      reseed_groups(next.params, next.collapsed, opt.init_jitter, rng);
      record.reseeded = true;
      record.param_change = parameter_change(out.params, next.params);
      out.params = std::move(next.params);
      record.objective = objective_proxy(g, out.params, out.state.q1, out.q2);
      out.history.push_back(record);
      continue;
    }

    record.param_change = parameter_change(out.params, next.params);
    out.params = std::move(next.params);
    record.objective = objective_proxy(g, out.params, out.state.q1, out.q2);
    out.history.push_back(record);
    if (record.param_change < opt.em_tol && run.converged) {
      out.summary.converged = true;
      break;
    }
    if (opt.max_stalled_e_steps > 0 && stalled >= opt.max_stalled_e_steps) {
      out.summary.stalled = true;
      break;
    }
  }
  out.summary.em_iterations = static_cast<int>(out.history.size());
  out.summary.objective = out.history.empty() ? -std::numeric_limits<double>::infinity()
                                              : out.history.back().objective;
  return out;
}

}  // namespace

void InvariantReport::merge(const InvariantReport& other) {
  belief_norm = std::max(belief_norm, other.belief_norm);
  marginal_norm = std::max(marginal_norm, other.marginal_norm);
  pair_norm = std::max(pair_norm, other.pair_norm);
  gamma_norm = std::max(gamma_norm, other.gamma_norm);
  sweeps_checked += other.sweeps_checked;
  m_steps_checked += other.m_steps_checked;
}

BlockModelParams initial_params(const Graph& g, std::size_t k, double jitter, std::uint64_t seed,
                                double partner_contrast) {
  if (k == 0) throw DataError("k must be at least 1");
  std::mt19937_64 rng(seed);
  BlockModelParams p;
  p.gamma.assign(k, 1.0 / static_cast<double>(k));
  p.omega = Matrix(k, k);
  const double two_m = total_degree(g);
  const double base = two_m > 0.0 ? two_m / (two_m * two_m) : 1.0;
  if (k == 1) {
    p.gamma[0] = 1.0;
    p.omega(0, 0) = base;
    return p;
  }
  std::gamma_distribution<double> dirichlet_part(10.0, 1.0);
  double total = 0.0;
  for (double& x : p.gamma) {
    x = dirichlet_part(rng);
    total += x;
  }
  for (double& x : p.gamma) x /= total;
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t s = r; s < k; ++s) {
      p.omega(r, s) = p.omega(s, r) = base * (1.0 + jitter * unit(rng));
    }
  }
  if (partner_contrast != 1.0) {
    // random involution: a uniform number of swapped pairs, the rest fixed
    std::vector<std::size_t> order(k);
    for (std::size_t r = 0; r < k; ++r) order[r] = r;
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t pairs = std::uniform_int_distribution<std::size_t>(0, k / 2)(rng);
    std::vector<std::size_t> partner(k);
    for (std::size_t r = 0; r < k; ++r) partner[r] = r;
    for (std::size_t c = 0; c < pairs; ++c) {
      partner[order[2 * c]] = order[2 * c + 1];
      partner[order[2 * c + 1]] = order[2 * c];
    }
    for (std::size_t r = 0; r < k; ++r) {
      if (partner[r] >= r) p.omega(r, partner[r]) = p.omega(partner[r], r) = partner_contrast * p.omega(r, partner[r]);
    }
    // keep the expected edge count of the flat start
    double mass = 0.0;
    for (std::size_t r = 0; r < k; ++r) {
      for (std::size_t s = 0; s < k; ++s) mass += p.gamma[r] * p.gamma[s] * p.omega(r, s);
    }
    for (double& w : p.omega.data()) w *= base / mass;
  }
  return p;
}

double parameter_change(const BlockModelParams& a, const BlockModelParams& b) {
  double change = 0.0;
  double scale = 0.0;
  for (std::size_t r = 0; r < a.k(); ++r) change = std::max(change, std::abs(a.gamma[r] - b.gamma[r]));
  for (double w : b.omega.data()) scale = std::max(scale, w);
  if (scale > 0.0) {
    for (std::size_t t = 0; t < a.omega.data().size(); ++t) {
      change = std::max(change, std::abs(a.omega.data()[t] - b.omega.data()[t]) / scale);
    }
  }
  return change;
}

Partition hard_assignment(const Matrix& q1) {
  std::vector<std::uint32_t> labels(q1.rows(), 0);
  for (std::size_t i = 0; i < q1.rows(); ++i) {
    const auto row = q1.row(i);
    labels[i] = static_cast<std::uint32_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return Partition::with_groups(std::move(labels), static_cast<std::uint32_t>(q1.cols()));
}

FitResult fit(const Graph& g, const FitOptions& options) {
  if (options.k == 0) throw DataError("fit: k must be at least 1");
  if (options.restarts < 1) throw DataError("fit: need at least one restart");
  if (g.empty()) throw DataError("fit: empty graph");
  if (!g.is_simple()) throw DataError("fit: graph must be simple (unit weights, no internal weight)");
  if (g.edge_count() == 0) throw DataError("fit: graph has no edges");

  FitResult best;
  bool have_best = false;
  bool best_stalled = false;
  for (int restart = 0; restart < options.restarts; ++restart) {
    RestartOutcome outcome = run_restart(g, options, restart);
    best.restarts.push_back(outcome.summary);
    best.invariants.merge(outcome.invariants);
    if (outcome.summary.degenerate) continue;
    // a stalled restart ends away from a BP fixed point, so its objective is
    // only compared against other stalled restarts
    const bool stalled = outcome.summary.stalled;
    const bool better = !have_best || (best_stalled && !stalled) ||
                        (best_stalled == stalled && outcome.summary.objective > best.objective);
    if (better) {
      have_best = true;
      best_stalled = stalled;
      best.objective = outcome.summary.objective;
      best.best_restart = restart;
      best.converged = outcome.summary.converged;
      best.params = std::move(outcome.params);
      best.q2 = std::move(outcome.q2);
      best.bp_state = std::move(outcome.state);
      best.history = std::move(outcome.history);
    }
  }
  if (!have_best) {
    throw DegenerateFitError("every restart collapsed a group; try a smaller k than " +
                             std::to_string(options.k));
  }
  best.q1 = best.bp_state.q1;
  best.assignment = hard_assignment(best.q1);
  return best;
}

}  // namespace submarket
