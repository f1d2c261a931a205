#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "submarket/graph.hpp"
#include "submarket/matrix.hpp"
#include "submarket/partition.hpp"

namespace submarket {

/// Degree-corrected block model parameters: group priors gamma (sum 1) and a
/// symmetric non-negative affinity matrix omega. The expected number of edges
/// between i and j is d_i d_j omega(c_i, c_j).
struct BlockModelParams {
  std::vector<double> gamma;
  Matrix omega;

  std::size_t k() const noexcept { return gamma.size(); }

  /// Throws DataError unless gamma is a distribution (within 1e-12) and omega
  /// is k x k, symmetric and non-negative.
  void validate() const;

  friend bool operator==(const BlockModelParams&, const BlockModelParams&) = default;
};

nlohmann::json to_json(const BlockModelParams& p);
BlockModelParams params_from_json(const nlohmann::json& j);
BlockModelParams load_params_file(const std::string& path);

enum class GenerateMode { simple, multigraph };

struct GenerateOptions {
  GenerateMode mode = GenerateMode::simple;
  /// Largest allowed pair mean d_i d_j omega; beyond it the sparse model is
  /// no longer a sensible description.
  double dense_cap = 50.0;
};

struct GeneratedGraph {
  Graph graph;
  Partition planted;  ///< keeps group indices; groups may be empty
};

/// Forward model: each node joins group r with probability gamma_r; every
/// unordered pair i < j receives Poisson(d_i d_j omega) edges. Edges are drawn
/// per group pair as a Poisson total split over endpoints chosen with
/// probability proportional to d, which gives the same per-pair law in
/// O(n + m). Simple mode truncates multiplicities to one.
GeneratedGraph generate(std::size_t n, const BlockModelParams& params,
                        std::span<const double> target_degrees, std::uint64_t seed,
                        const GenerateOptions& options = {});

struct LogLikelihood {
  double value = 0.0;
  /// Edges that fall between groups with omega = 0. Non-zero means value is -inf.
  std::size_t impossible_edges = 0;

  bool finite() const noexcept { return impossible_edges == 0; }
};

/// sum over ordered pairs (i, j), diagonal included, of
/// a_ij log omega(c_i, c_j) - d_i d_j omega(c_i, c_j).
LogLikelihood log_likelihood(const Graph& g, const Partition& c, const BlockModelParams& params);

}  // namespace submarket
