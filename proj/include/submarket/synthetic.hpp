#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "submarket/attributes.hpp"
#include "submarket/dcsbm.hpp"
#include "submarket/matrix.hpp"

namespace submarket {

/// Discrete power law P(d) ∝ d^-exponent on [min_degree, max_degree];
/// max_degree = 0 means floor(sqrt(n)).
std::vector<double> powerlaw_degrees(std::size_t n, std::uint64_t seed, double exponent = 2.5,
                                     int min_degree = 2, int max_degree = 0);

/// omega = c * affinity, with c chosen so that the expected total degree is
/// degree_scale * sum(degrees) when groups are filled in proportion to gamma.
BlockModelParams affinity_params(const Matrix& affinity, std::vector<double> gamma,
                                 std::span<const double> degrees, double degree_scale = 1.0);

/// k x k affinity with `ratio` on the diagonal and 1 elsewhere.
Matrix assortative_affinity(std::size_t k, double ratio);

/// Two sexes x age blocks, mostly cross-sex and mostly within an age block.
struct MarketSpec {
  std::size_t age_blocks = 4;
  /// share of cross-sex edges that stay inside the age block
  double within_block = 0.85;
  /// share of all edges between members of the same sex
  double same_sex = 0.005;
  double first_block_age = 22.0;
  double block_age_step = 8.0;
  double age_sd = 2.0;
  double male_fraction = 0.5;
  double degree_scale = 1.0;
  std::vector<double> ethnicity_weights{0.10, 0.15, 0.15, 0.55, 0.05};
};

struct SyntheticMarket {
  Graph graph;
  /// group = 2 * age_block + (female ? 1 : 0)
  Partition planted;
  std::vector<std::uint32_t> age_block;
  BlockModelParams truth;
  AttributeTable attrs;
  std::vector<double> target_degrees;
};

SyntheticMarket make_market(std::size_t n, const MarketSpec& spec, std::uint64_t seed);

/// Restricts a market to the largest connected component of its graph.
SyntheticMarket restrict_to_lcc(const SyntheticMarket& market);

}  // namespace submarket
