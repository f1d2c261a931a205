#include <omp.h>

#include "bp_kernel.hpp"

namespace submarket::detail {
namespace {

// Nodes are processed in fixed contiguous blocks. Within a block every node
// reads the state left by earlier blocks, and the field is refreshed between
// blocks, so the result does not depend on the thread count.
constexpr std::size_t kMinBlock = 256;
constexpr std::size_t kBlocksPerSweep = 64;

}  // namespace

double sweep_parallel(const Graph& g, const BlockModelParams& params, BpState& state,
                      std::span<double> field, double damping) {
  const std::size_t k = params.k();
  const std::size_t n = g.node_count();
  const std::size_t block = std::max(kMinBlock, (n + kBlocksPerSweep - 1) / kBlocksPerSweep);
  std::vector<double>& mu = state.beliefs.mu;
  std::vector<double> next(mu.size());
  Matrix q_old(std::min(block, n), k);
  double change = 0.0;
  bool failed = false;
  std::string failure;

  for (std::size_t lo = 0; lo < n; lo += block) {
    const std::size_t hi = std::min(n, lo + block);
    for (std::size_t i = lo; i < hi; ++i) {
      const auto row = state.q1.row(i);
      std::copy(row.begin(), row.end(), q_old.row(i - lo).begin());
    }
    const auto first = static_cast<std::int64_t>(lo);
    const auto last = static_cast<std::int64_t>(hi);

#pragma omp parallel reduction(max : change)
    {
      NodeScratch scratch;
      scratch.reserve(k);
      std::vector<double> prior(k);
#pragma omp for schedule(dynamic, 16)
      for (std::int64_t i = first; i < last; ++i) {
        const auto node = static_cast<NodeId>(i);
        try {
          node_log_prior(params, field, g.degree(node), prior);
          change = std::max(change, update_node(g, params, node, prior, mu.data(), next.data(),
                                                state.q1.row(node), damping, scratch));
        } catch (const NumericalError& e) {
#pragma omp critical(bp_failure)
          {
            if (!failed) {
              failed = true;
              failure = e.what();
            }
          }
        }
      }
    }
    if (failed) throw NumericalError(failure);

    const std::size_t slot_lo = g.slot_begin(static_cast<NodeId>(lo)) * k;
    const std::size_t slot_hi = g.slot_end(static_cast<NodeId>(hi - 1)) * k;
    std::copy(next.begin() + slot_lo, next.begin() + slot_hi, mu.begin() + slot_lo);
    for (std::size_t i = lo; i < hi; ++i) {
      shift_field(params, g.degree(static_cast<NodeId>(i)), q_old.row(i - lo), state.q1.row(i), field);
    }
  }
  return change;
}

}  // namespace submarket::detail
