#pragma once

#include <cstddef>

#include "submarket/bp.hpp"
#include "submarket/dcsbm.hpp"
#include "submarket/graph.hpp"
#include "submarket/matrix.hpp"

namespace submarket {

enum class PosteriorModel {
  /// Weight exp(L(c)) prod_i gamma_{c_i}, with L the ordered-pair
  /// log-likelihood returned by log_likelihood().
  joint,
  /// The distribution belief propagation solves exactly on a tree:
  /// prod_i gamma_{c_i} exp(-d_i h_{c_i}) prod_{edges} omega_{c_i c_j}, where
  /// the degree field h_r = sum_s omega_rs sum_k d_k q^k_s is solved
  /// self-consistently from the enumerated marginals.
  bp_fixed_point,
};

struct ExactPosteriorOptions {
  PosteriorModel model = PosteriorModel::joint;
  double max_states = 1e7;
  double field_tol = 1e-13;
  int max_field_iterations = 500;
  /// Weight kept on the previous marginals in each field iteration; the
  /// undamped map can oscillate when the field is strong.
  double field_damping = 0.5;
};

struct ExactPosterior {
  Matrix q1;
  PairMarginals q2;
  double states = 0.0;
  int field_iterations = 0;
  bool field_converged = true;
};

/// Brute-force posterior marginals over all k^n assignments. Throws DataError
/// when k^n exceeds options.max_states.
ExactPosterior exact_posterior(const Graph& g, const BlockModelParams& params,
                               const ExactPosteriorOptions& options = {});

}  // namespace submarket
