#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace submarket {

/// Best one-to-one matching of found labels onto truth labels (maximum total
/// overlap, Hungarian method). Returns found label -> truth label, or -1 for
/// found labels left unmatched when k_found > k_truth.
std::vector<int> align_labels(std::span<const std::uint32_t> truth, std::uint32_t k_truth,
                              std::span<const std::uint32_t> found, std::uint32_t k_found);

/// Fraction of nodes whose found label maps to their truth label under align_labels.
double aligned_accuracy(std::span<const std::uint32_t> truth, std::uint32_t k_truth,
                        std::span<const std::uint32_t> found, std::uint32_t k_found);

}  // namespace submarket
