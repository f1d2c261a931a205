#include "submarket/metrics.hpp"

#include <algorithm>
#include <limits>

#include "submarket/errors.hpp"

namespace submarket {

std::vector<int> align_labels(std::span<const std::uint32_t> truth, std::uint32_t k_truth,
                              std::span<const std::uint32_t> found, std::uint32_t k_found) {
  if (truth.size() != found.size()) throw DataError("align_labels: label vectors differ in length");
  const std::size_t size = std::max<std::size_t>({k_truth, k_found, 1});
  // cost = -overlap on a padded square matrix; rows = found, cols = truth
  std::vector<std::vector<double>> cost(size, std::vector<double>(size, 0.0));
  for (std::size_t i = 0; i < truth.size(); ++i) cost[found[i]][truth[i]] -= 1.0;

  // Hungarian algorithm (potentials form), 1-based internally
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(size + 1, 0.0), v(size + 1, 0.0);
  std::vector<std::size_t> p(size + 1, 0), way(size + 1, 0);
  for (std::size_t row = 1; row <= size; ++row) {
    p[0] = row;
    std::size_t j0 = 0;
    std::vector<double> minv(size + 1, inf);
    std::vector<bool> used(size + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= size; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= size; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> mapping(k_found, -1);
  for (std::size_t j = 1; j <= size; ++j) {
    const std::size_t row = p[j] - 1;
    if (row < k_found && j - 1 < k_truth) mapping[row] = static_cast<int>(j - 1);
  }
  return mapping;
}

double aligned_accuracy(std::span<const std::uint32_t> truth, std::uint32_t k_truth,
                        std::span<const std::uint32_t> found, std::uint32_t k_found) {
  if (truth.empty()) return 1.0;
  const auto mapping = align_labels(truth, k_truth, found, k_found);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (mapping[found[i]] == static_cast<int>(truth[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace submarket
