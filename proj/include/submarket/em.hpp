#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "submarket/bp.hpp"
#include "submarket/dcsbm.hpp"
#include "submarket/graph.hpp"
#include "submarket/partition.hpp"

namespace submarket {

struct FitOptions {
  std::size_t k = 2;
  int restarts = 10;
  std::uint64_t seed = 0;
  double bp_tol = 1e-6;
  double em_tol = 1e-6;
  int max_sweeps = 500;
  int max_em_iters = 100;
  /// A restart stops once this many consecutive E-steps end without BP
  /// convergence. Zero disables the limit.
  int max_stalled_e_steps = 3;
  double damping = 0.1;
  /// Added to the damping after each E-step that ends without BP convergence,
  /// up to max_damping. Zero keeps the damping fixed.
  double damping_step = 0.1;
  double max_damping = 0.3;
  BpSchedule schedule = BpSchedule::sequential;
  /// Include exp(-d_i d_j omega_rs) in the two-node marginals.
  bool strict_pair_marginals = false;
  /// Relative amplitude of the random perturbation of the initial omega.
  double init_jitter = 0.5;
  /// Factor applied to the initial omega between each group and a randomly
  /// drawn partner group (possibly itself). 1 gives a flat start.
  double partner_contrast = 3.0;
  /// Record normalization errors after every sweep and M-step.
  bool track_invariants = false;
};

struct EmIteration {
  double param_change = 0.0;
  int bp_sweeps = 0;
  bool bp_converged = false;
  double objective = 0.0;
  bool reseeded = false;
};

struct InvariantReport {
  double belief_norm = 0.0;
  double marginal_norm = 0.0;
  double pair_norm = 0.0;
  double gamma_norm = 0.0;
  std::size_t sweeps_checked = 0;
  std::size_t m_steps_checked = 0;

  void merge(const InvariantReport& other);
};

struct RestartSummary {
  bool degenerate = false;
  bool stalled = false;
  bool converged = false;
  int em_iterations = 0;
  double objective = 0.0;
};

struct FitResult {
  BlockModelParams params;
  Matrix q1;
  PairMarginals q2;
  BpState bp_state;
  /// argmax_r q^i_r, ties to the lowest r.
  Partition assignment;
  std::vector<EmIteration> history;
  bool converged = false;
  double objective = 0.0;
  int best_restart = 0;
  std::vector<RestartSummary> restarts;
  InvariantReport invariants;
};

/// Random starting parameters: gamma near uniform with Dirichlet jitter,
/// omega = (2m / (sum d)^2) (1 + jitter * R) with R uniform in [-0.5, 0.5],
/// symmetrized. Each group is then paired with a random partner (a random
/// involution of the groups), that entry is multiplied by partner_contrast and
/// omega is rescaled so the expected edge count matches the flat start.
/// With k = 1 there is no symmetry to break and the start is exactly flat.
BlockModelParams initial_params(const Graph& g, std::size_t k, double jitter, std::uint64_t seed,
                                double partner_contrast = 1.0);

/// Relative parameter change: max(|d gamma|, |d omega| / max omega).
double parameter_change(const BlockModelParams& a, const BlockModelParams& b);

/// Argmax of each row, ties to the lowest column.
Partition hard_assignment(const Matrix& q1);

/// EM fit of the degree-corrected block model with a BP E-step. Each restart
/// alternates run_bp (warm started), two_node_marginals and m_step until the
/// parameter change drops below em_tol; the restart with the highest
/// objective_proxy is returned. Stalled restarts are only returned when every
/// other restart is degenerate. A group whose mass collapses is reseeded once
/// per restart; a second collapse marks the restart degenerate. Throws
/// DegenerateFitError when every restart is degenerate, DataError when the
/// graph is not simple.
FitResult fit(const Graph& g, const FitOptions& options);

}  // namespace submarket
