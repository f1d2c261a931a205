#include "submarket/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "submarket/errors.hpp"

namespace submarket {

std::vector<double> powerlaw_degrees(std::size_t n, std::uint64_t seed, double exponent, int min_degree,
                                     int max_degree) {
  if (max_degree == 0) max_degree = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n))));
  max_degree = std::max(max_degree, min_degree);
  if (min_degree < 1) throw DataError("power-law degrees need min_degree >= 1");
  std::vector<double> weights;
  for (int d = min_degree; d <= max_degree; ++d) weights.push_back(std::pow(d, -exponent));
  std::discrete_distribution<int> pick(weights.begin(), weights.end());
  std::mt19937_64 rng(seed);
  std::vector<double> out(n);
  for (double& d : out) d = static_cast<double>(min_degree + pick(rng));
  return out;
}

BlockModelParams affinity_params(const Matrix& affinity, std::vector<double> gamma, std::span<const double> degrees,
                                 double degree_scale) {
  const std::size_t k = gamma.size();
  if (affinity.rows() != k || affinity.cols() != k) throw DataError("affinity must be k x k");
  double total = 0.0;
  for (double d : degrees) total += d;
  double mix = 0.0;
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t s = 0; s < k; ++s) mix += gamma[r] * gamma[s] * affinity(r, s);
  }
  if (!(total > 0.0) || !(mix > 0.0)) throw DataError("affinity_params: degenerate inputs");
  // expected total degree = c * mix * total^2
  const double c = degree_scale / (mix * total);
  BlockModelParams p;
  p.gamma = std::move(gamma);
  p.omega = Matrix(k, k);
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t s = r; s < k; ++s) {
      p.omega(r, s) = p.omega(s, r) = c * 0.5 * (affinity(r, s) + affinity(s, r));
    }
  }
  return p;
}

Matrix assortative_affinity(std::size_t k, double ratio) {
  Matrix a(k, k, 1.0);
  for (std::size_t r = 0; r < k; ++r) a(r, r) = ratio;
  return a;
}

SyntheticMarket make_market(std::size_t n, const MarketSpec& spec, std::uint64_t seed) {
  const std::size_t blocks = spec.age_blocks;
  if (blocks == 0) throw DataError("market needs at least one age block");
  const std::size_t k = 2 * blocks;
  std::mt19937_64 rng(seed);

  // cross-sex, other block affinity x and same-sex affinity y relative to 1
  // for cross-sex same-block pairs
  const double b = static_cast<double>(blocks);
  const double x = blocks > 1 ? (1.0 - spec.within_block) / (spec.within_block * (b - 1.0)) : 0.0;
  const double cross = 1.0 + (b - 1.0) * x;
  const double y = spec.same_sex / (1.0 - spec.same_sex) * cross / b;
  Matrix affinity(k, k);
  for (std::size_t g1 = 0; g1 < k; ++g1) {
    for (std::size_t g2 = 0; g2 < k; ++g2) {
      const bool same_sex = (g1 % 2) == (g2 % 2);
      const bool same_block = (g1 / 2) == (g2 / 2);
      affinity(g1, g2) = same_sex ? y : (same_block ? 1.0 : x);
    }
  }
  std::vector<double> gamma(k);
  for (std::size_t g = 0; g < k; ++g) gamma[g] = (g % 2 == 0 ? spec.male_fraction : 1.0 - spec.male_fraction) / b;

  SyntheticMarket m;
  m.target_degrees = powerlaw_degrees(n, rng());
  m.truth = affinity_params(affinity, gamma, m.target_degrees, spec.degree_scale);
  auto generated = generate(n, m.truth, m.target_degrees, rng());
  m.graph = std::move(generated.graph);
  m.planted = std::move(generated.planted);

  std::normal_distribution<double> noise(0.0, spec.age_sd);
  std::discrete_distribution<int> eth(spec.ethnicity_weights.begin(), spec.ethnicity_weights.end());
  std::vector<NodeAttributes> rows(n);
  m.age_block.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto group = m.planted.labels[i];
    m.age_block[i] = group / 2;
    rows[i].sex = group % 2 == 0 ? Sex::male : Sex::female;
    const double mean = spec.first_block_age + spec.block_age_step * static_cast<double>(group / 2);
    rows[i].age = std::clamp(mean + noise(rng), 18.0, 100.0);
    rows[i].ethnicity = kEthnicities[static_cast<std::size_t>(eth(rng))];
  }
  m.attrs = AttributeTable(std::move(rows));
  return m;
}

SyntheticMarket restrict_to_lcc(const SyntheticMarket& market) {
  const Subgraph sub = largest_connected_component(market.graph);
  SyntheticMarket out;
  out.graph = sub.graph;
  out.truth = market.truth;
  std::vector<std::uint32_t> labels;
  std::vector<NodeAttributes> rows;
  for (NodeId old : sub.to_parent) {
    labels.push_back(market.planted.labels[old]);
    out.age_block.push_back(market.age_block[old]);
    out.target_degrees.push_back(market.target_degrees[old]);
    rows.push_back(market.attrs[old]);
  }
  out.planted = Partition::with_groups(std::move(labels), market.planted.k);
  out.attrs = AttributeTable(std::move(rows));
  return out;
}

}  // namespace submarket
