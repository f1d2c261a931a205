#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "submarket/dcsbm.hpp"
#include "submarket/graph.hpp"
#include "submarket/matrix.hpp"

namespace submarket {

/// Cavity messages mu^{i->j}_r, one k-vector per directed slot of the graph
/// (slot s of node i carries the message from i to graph.slot_target(s)).
struct Beliefs {
  std::size_t k = 0;
  std::vector<double> mu;

  std::span<double> at(std::size_t slot) { return {mu.data() + slot * k, k}; }
  std::span<const double> at(std::size_t slot) const { return {mu.data() + slot * k, k}; }
};

/// Messages plus one-node marginals q^i_r (n x k).
struct BpState {
  Beliefs beliefs;
  Matrix q1;
};

/// Two-node marginals q^{ij}_{rs}, one k x k block per canonical edge (u < v),
/// rows indexed by u's group.
struct PairMarginals {
  std::size_t k = 0;
  std::vector<double> data;

  std::size_t edge_count() const noexcept { return k == 0 ? 0 : data.size() / (k * k); }
  std::span<double> block(std::size_t e) { return {data.data() + e * k * k, k * k}; }
  std::span<const double> block(std::size_t e) const { return {data.data() + e * k * k, k * k}; }
  double operator()(std::size_t e, std::size_t r, std::size_t s) const { return data[(e * k + r) * k + s]; }
};

enum class BpSchedule {
  /// In-place node-order updates, single thread. Deterministic reference.
  sequential,
  /// Every message computed from the previous sweep's values, OpenMP-parallel
  /// over nodes. Bit-identical for any thread count.
  parallel,
};

/// Uniform random beliefs and marginals (entries drawn from [0, 1], normalized).
BpState random_bp_state(const Graph& g, std::size_t k, std::uint64_t seed);

/// h_r = sum_s omega_rs sum_i d_i q^i_s.
std::vector<double> external_field(const Graph& g, const BlockModelParams& params, const Matrix& q1);

/// One BP sweep: recompute the field from state.q1, update every message as
///   mu^{i->j}_r ∝ gamma_r exp(-d_i h_r) prod_{k in N(i), k != j} sum_s omega_rs mu^{k->i}_s
/// (accumulated in log space), damp with new = (1 - damping) * computed +
/// damping * old, then recompute q1 with the product over all neighbours.
/// Returns the largest absolute change of any message entry. Throws
/// NumericalError naming the edge if a message has no admissible group.
double bp_sweep(const Graph& g, const BlockModelParams& params, BpState& state, double damping,
                BpSchedule schedule = BpSchedule::sequential);

struct BpOptions {
  double tol = 1e-6;
  int max_sweeps = 500;
  double damping = 0.1;
  BpSchedule schedule = BpSchedule::sequential;
  /// Track the worst deviation of sum_r mu and sum_r q from one after each sweep.
  bool track_normalization = false;
};

struct BpRunResult {
  int sweeps = 0;
  bool converged = false;
  double last_change = 0.0;
  double max_norm_error = 0.0;
};

/// Sweeps until the largest message change drops below tol or max_sweeps is
/// reached. `state` is the starting point (random or warm) and is updated.
BpRunResult run_bp(const Graph& g, const BlockModelParams& params, BpState& state, const BpOptions& options);

/// q^{ij}_{rs} ∝ omega_rs mu^{i->j}_r mu^{j->i}_s per edge. The d_i d_j factor
/// cancels; the Poisson factor exp(-d_i d_j omega_rs) is included only when
/// `strict` is set. Throws NumericalError on a zero normalizer.
PairMarginals two_node_marginals(const Graph& g, const BlockModelParams& params, const Beliefs& beliefs,
                                 bool strict = false);

struct MStepResult {
  BlockModelParams params;
  /// Groups whose responsibility mass or degree mass vanished. Their omega
  /// rows are left at zero.
  std::vector<std::uint32_t> collapsed;
};

/// gamma_r = mean_i q^i_r,
/// omega_rs = sum_{ordered edges} q^{ij}_{rs} / (sum_i d_i q^i_r * sum_j d_j q^j_s).
MStepResult m_step(const Graph& g, const Matrix& q1, const PairMarginals& q2);

/// Model expected degree d_i sum_{r,s} q^i_r omega_rs sum_j d_j q^j_s, using the
/// uncorrelated-pair approximation.
std::vector<double> expected_degrees(const Graph& g, const Matrix& q1, const BlockModelParams& params);

/// Expected complete-data log-likelihood
///   sum_{ij,rs} q^{ij}_{rs} [a_ij log omega_rs - d_i d_j omega_rs] + sum_{i,r} q^i_r log gamma_r,
/// with edge pairs taken from q2 and non-edge pairs from q1 x q1.
double objective_proxy(const Graph& g, const BlockModelParams& params, const Matrix& q1,
                       const PairMarginals& q2);

/// Worst |sum - 1| over belief vectors / rows of q1 / q2 blocks.
double belief_norm_error(const Beliefs& b);
double marginal_norm_error(const Matrix& q1);
double pair_norm_error(const PairMarginals& q2);

}  // namespace submarket
