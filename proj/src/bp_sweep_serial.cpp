#include "bp_kernel.hpp"

namespace submarket::detail {

// Reference schedule: nodes in index order, messages and field updated in place.
double sweep_sequential(const Graph& g, const BlockModelParams& params, BpState& state,
                        std::span<double> field, double damping) {
  const std::size_t k = params.k();
  NodeScratch scratch;
  scratch.reserve(k);
  std::vector<double> prior(k);
  std::vector<double> q_old(k);
  double* mu = state.beliefs.mu.data();
  double change = 0.0;
  for (NodeId i = 0; i < g.node_count(); ++i) {
    const auto q_row = state.q1.row(i);
    std::copy(q_row.begin(), q_row.end(), q_old.begin());
    node_log_prior(params, field, g.degree(i), prior);
    change = std::max(change, update_node(g, params, i, prior, mu, mu, q_row, damping, scratch));
    shift_field(params, g.degree(i), q_old, q_row, field);
  }
  return change;
}

}  // namespace submarket::detail
