#include "submarket/pairing.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

#include "submarket/em.hpp"
#include "submarket/errors.hpp"

namespace submarket {
namespace {

enum class Majority { male, female, tied, empty };

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

NodeSubmarkets SubmarketMap::for_nodes(const Partition& assignment) const {
  NodeSubmarkets out;
  out.count = count;
  out.of_node.reserve(assignment.size());
  for (auto c : assignment.labels) out.of_node.push_back(of_community.at(c));
  return out;
}

SubmarketMap pair_submarkets(const BlockModelParams& params, const Partition& assignment,
                             const AttributeTable& attrs) {
  const std::size_t k = assignment.k;
  if (params.k() != k) throw DataError("pair_submarkets: assignment and parameters disagree on k");
  if (attrs.size() != assignment.size()) throw DataError("pair_submarkets: attribute table size mismatch");

  std::vector<std::size_t> men(k, 0), women(k, 0);
  std::vector<std::vector<double>> ages(k);
  for (NodeId i = 0; i < assignment.size(); ++i) {
    const auto c = assignment.labels[i];
    (attrs[i].sex == Sex::male ? men : women)[c] += 1;
    ages[c].push_back(attrs[i].age);
  }
  std::vector<Majority> majority(k);
  SubmarketMap map;
  for (std::size_t c = 0; c < k; ++c) {
    if (men[c] + women[c] == 0) {
      majority[c] = Majority::empty;
    } else if (men[c] > women[c]) {
      majority[c] = Majority::male;
    } else if (women[c] > men[c]) {
      majority[c] = Majority::female;
    } else {
      majority[c] = Majority::tied;
      map.warnings.push_back("community " + std::to_string(c) +
                             " has no sex majority; assigned by omega alone");
    }
  }
  if (k % 2 != 0) map.warnings.push_back("odd number of communities (" + std::to_string(k) + ")");

  std::vector<std::tuple<double, std::uint32_t, std::uint32_t>> candidates;
  for (std::uint32_t m = 0; m < k; ++m) {
    if (majority[m] != Majority::male) continue;
    for (std::uint32_t f = 0; f < k; ++f) {
      if (majority[f] == Majority::female) candidates.emplace_back(params.omega(m, f), m, f);
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
    return std::get<2>(a) < std::get<2>(b);
  });

  std::vector<std::uint32_t> group(k, kNoSubmarket);  // provisional submarket ids
  std::uint32_t next = 0;
  for (const auto& [w, m, f] : candidates) {
    if (group[m] != kNoSubmarket || group[f] != kNoSubmarket) continue;
    group[m] = group[f] = next++;
  }
  for (std::uint32_t c = 0; c < k; ++c) {
    if (group[c] != kNoSubmarket || majority[c] == Majority::empty) continue;
    std::uint32_t partner = kNoSubmarket;
    double best = -1.0;
    for (std::uint32_t o = 0; o < k; ++o) {
      if (o == c || group[o] == kNoSubmarket) continue;
      if (params.omega(c, o) > best) {
        best = params.omega(c, o);
        partner = o;
      }
    }
    if (partner == kNoSubmarket) {
      group[c] = next++;
    } else {
      group[c] = group[partner];
      if (majority[c] != Majority::tied) {
        map.warnings.push_back("community " + std::to_string(c) + " left unpaired; joined community " +
                               std::to_string(partner));
      }
    }
  }

  // number submarkets by median age
  std::vector<std::vector<double>> sub_ages(next);
  std::vector<std::uint32_t> lowest(next, kNoSubmarket);
  for (std::uint32_t c = 0; c < k; ++c) {
    if (group[c] == kNoSubmarket) continue;
    auto& a = sub_ages[group[c]];
    a.insert(a.end(), ages[c].begin(), ages[c].end());
    lowest[group[c]] = std::min(lowest[group[c]], c);
  }
  std::vector<double> med(next);
  for (std::uint32_t s = 0; s < next; ++s) med[s] = median(sub_ages[s]);
  std::vector<std::uint32_t> order(next);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return med[a] != med[b] ? med[a] < med[b] : lowest[a] < lowest[b];
  });
  std::vector<std::uint32_t> rank(next);
  for (std::uint32_t r = 0; r < next; ++r) rank[order[r]] = r;

  map.count = next;
  map.of_community.assign(k, kNoSubmarket);
  for (std::uint32_t c = 0; c < k; ++c) {
    if (group[c] != kNoSubmarket) map.of_community[c] = rank[group[c]];
  }
  return map;
}

SubmarketMap pair_submarkets(const FitResult& result, const AttributeTable& attrs) {
  return pair_submarkets(result.params, result.assignment, attrs);
}

}  // namespace submarket
