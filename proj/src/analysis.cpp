#include "submarket/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "submarket/errors.hpp"

namespace submarket {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_cover(const NodeSubmarkets& sub, std::size_t n) {
  if (sub.of_node.size() != n) throw DataError("submarket map does not cover every node");
  for (auto s : sub.of_node) {
    if (s >= sub.count) throw DataError("node without a submarket");
  }
}

std::size_t eth_index(Ethnicity e) { return static_cast<std::size_t>(e); }

bool direction_matches(const AttributeTable& attrs, const Contact& c, Direction d) {
  const Sex from = d == Direction::male_to_female ? Sex::male : Sex::female;
  const Sex to = d == Direction::male_to_female ? Sex::female : Sex::male;
  return attrs[c.sender].sex == from && attrs[c.receiver].sex == to;
}

}  // namespace

double within_fraction(const Graph& g, const NodeSubmarkets& sub) {
  check_cover(sub, g.node_count());
  const double total = g.total_weight();
  if (!(total > 0.0)) throw DataError("within_fraction undefined: no interactions");
  double within = 0.0;
  for (NodeId i = 0; i < g.node_count(); ++i) within += g.internal_weight(i);
  for (const Edge& e : g.edges()) {
    if (sub.of_node[e.u] == sub.of_node[e.v]) within += e.weight;
  }
  return within / total;
}

double within_fraction(const ContactLog& log, const NodeSubmarkets& sub) {
  if (log.empty()) throw DataError("within_fraction undefined: no contacts");
  std::size_t within = 0;
  for (const Contact& c : log.records()) {
    if (c.sender >= sub.of_node.size() || c.receiver >= sub.of_node.size()) {
      throw DataError("contact endpoint without a submarket");
    }
    if (sub.of_node[c.sender] == sub.of_node[c.receiver]) ++within;
  }
  return static_cast<double>(within) / static_cast<double>(log.size());
}

double quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw DataError("quantile of an empty sample");
  const double pos = static_cast<double>(sorted.size() - 1) * p;  // 0-based
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

AgeQuantiles age_quantiles(const NodeSubmarkets& sub, const AttributeTable& attrs, bool by_sex,
                           std::size_t min_count) {
  check_cover(sub, attrs.size());
  const std::size_t sexes = by_sex ? 2 : 1;
  std::vector<std::vector<double>> ages(sub.count * sexes);
  for (NodeId i = 0; i < attrs.size(); ++i) {
    const std::size_t cell = sub.of_node[i] * sexes + (by_sex && attrs[i].sex == Sex::female ? 1 : 0);
    ages[cell].push_back(attrs[i].age);
  }
  AgeQuantiles out;
  for (std::uint32_t s = 0; s < sub.count; ++s) {
    for (std::size_t x = 0; x < sexes; ++x) {
      auto& v = ages[s * sexes + x];
      std::optional<Sex> sex;
      if (by_sex) sex = x == 0 ? Sex::male : Sex::female;
      if (v.empty()) {
        out.warnings.push_back("submarket " + std::to_string(s) +
                               (sex ? " sex " + std::string(to_string(*sex)) : std::string()) +
                               ": no members, cell omitted");
        continue;
      }
      std::sort(v.begin(), v.end());
      AgeQuantileCell cell;
      cell.submarket = s;
      cell.sex = sex;
      cell.count = v.size();
      cell.quantiles = {quantile(v, 0.09), quantile(v, 0.25), quantile(v, 0.50), quantile(v, 0.75),
                        quantile(v, 0.91)};
      cell.low_support = v.size() < min_count;
      out.cells.push_back(cell);
    }
  }
  return out;
}

SexRatios sex_ratio(const NodeSubmarkets& sub, const AttributeTable& attrs) {
  check_cover(sub, attrs.size());
  std::vector<std::size_t> men(sub.count, 0), women(sub.count, 0);
  for (NodeId i = 0; i < attrs.size(); ++i) (attrs[i].sex == Sex::male ? men : women)[sub.of_node[i]] += 1;
  SexRatios out;
  auto row = [](std::optional<std::uint32_t> s, std::size_t m, std::size_t w) {
    const double total = static_cast<double>(m + w);
    return SexRatioRow{s, m, w, 100.0 * static_cast<double>(m) / total, 100.0 * static_cast<double>(w) / total};
  };
  std::size_t all_men = 0, all_women = 0;
  for (std::uint32_t s = 0; s < sub.count; ++s) {
    all_men += men[s];
    all_women += women[s];
    if (men[s] + women[s] == 0) {
      out.warnings.push_back("submarket " + std::to_string(s) + " is empty, omitted");
      continue;
    }
    out.rows.push_back(row(s, men[s], women[s]));
  }
  if (all_men + all_women > 0) out.rows.push_back(row(std::nullopt, all_men, all_women));
  return out;
}

RelativeAges relative_minority_age(const NodeSubmarkets& sub, const AttributeTable& attrs, Ethnicity reference,
                                   Sex sex, std::size_t min_count, AgeWeighting weighting, const Graph* graph) {
  check_cover(sub, attrs.size());
  if (weighting == AgeWeighting::interactions && (graph == nullptr || graph->node_count() != attrs.size())) {
    throw DataError("interaction weighting needs the interaction graph");
  }
  struct Acc {
    double weighted = 0.0;
    double weight = 0.0;
    std::size_t count = 0;
  };
  std::vector<Acc> acc(sub.count * kEthnicityCount);
  for (NodeId i = 0; i < attrs.size(); ++i) {
    if (attrs[i].sex != sex) continue;
    const double w = weighting == AgeWeighting::users ? 1.0 : graph->strength(i);
    auto& a = acc[sub.of_node[i] * kEthnicityCount + eth_index(attrs[i].ethnicity)];
    a.weighted += w * attrs[i].age;
    a.weight += w;
    ++a.count;
  }
  RelativeAges out;
  for (std::uint32_t s = 0; s < sub.count; ++s) {
    const Acc& ref = acc[s * kEthnicityCount + eth_index(reference)];
    if (ref.count == 0 || !(ref.weight > 0.0)) {
      out.warnings.push_back("submarket " + std::to_string(s) + ": no reference members, omitted");
      continue;
    }
    const double ref_mean = ref.weighted / ref.weight;
    for (Ethnicity e : kEthnicities) {
      if (e == reference) continue;
      const Acc& a = acc[s * kEthnicityCount + eth_index(e)];
      if (a.count == 0 || !(a.weight > 0.0)) continue;
      RelativeAgeCell cell;
      cell.submarket = s;
      cell.ethnicity = e;
      cell.count = a.count;
      cell.reference_count = ref.count;
      cell.mean_age = a.weighted / a.weight;
      cell.reference_mean_age = ref_mean;
      cell.difference = cell.mean_age - ref_mean;
      cell.low_support = a.count < min_count || ref.count < min_count;
      out.cells.push_back(cell);
    }
  }
  return out;
}

MixingMatrices mixing_matrix(const ContactLog& log, const AttributeTable& attrs, const NodeSubmarkets& sub,
                             Direction direction, std::size_t min_messages) {
  check_cover(sub, attrs.size());
  const std::size_t k = sub.count;
  MixingMatrices out;
  out.sent = Matrix(k, k);
  out.replied = Matrix(k, k);
  out.fraction = Matrix(k, k, kNaN);
  out.reply_rate = Matrix(k, k, kNaN);
  out.row_present.assign(k, false);
  out.min_messages = min_messages;
  for (const Contact& c : log.records()) {
    if (!direction_matches(attrs, c, direction)) continue;
    const auto r = sub.of_node[c.sender];
    const auto s = sub.of_node[c.receiver];
    out.sent(r, s) += 1.0;
    if (c.replied) out.replied(r, s) += 1.0;
  }
  for (std::size_t r = 0; r < k; ++r) {
    double row_total = 0.0;
    for (std::size_t s = 0; s < k; ++s) row_total += out.sent(r, s);
    if (row_total == 0.0) {
      out.warnings.push_back("sender submarket " + std::to_string(r) + " sent no messages, row omitted");
      continue;
    }
    out.row_present[r] = true;
    for (std::size_t s = 0; s < k; ++s) {
      out.fraction(r, s) = out.sent(r, s) / row_total;
      if (out.sent(r, s) > 0.0) out.reply_rate(r, s) = out.replied(r, s) / out.sent(r, s);
    }
  }
  return out;
}

const AgeGapCell& AgeGapMatrix::at(Ethnicity sender, std::uint32_t submarket, Ethnicity receiver) const {
  return cells.at((eth_index(sender) * submarkets + submarket) * kEthnicityCount + eth_index(receiver));
}

AgeGapMatrix age_gap_matrix(const ContactLog& log, const AttributeTable& attrs, const NodeSubmarkets& sub,
                            ContactStage stage, Direction direction, GapWeighting weighting) {
  check_cover(sub, attrs.size());
  AgeGapMatrix out;
  out.submarkets = sub.count;
  out.cells.resize(kEthnicityCount * sub.count * kEthnicityCount);
  for (Ethnicity se : kEthnicities) {
    for (std::uint32_t s = 0; s < sub.count; ++s) {
      for (Ethnicity re : kEthnicities) {
        auto& cell = out.cells[(eth_index(se) * sub.count + s) * kEthnicityCount + eth_index(re)];
        cell.sender_ethnicity = se;
        cell.submarket = s;
        cell.receiver_ethnicity = re;
      }
    }
  }
  // per cell: sender -> (sum, count), so both weightings come from one pass
  std::vector<std::map<NodeId, std::pair<double, std::size_t>>> per_sender(out.cells.size());
  for (const Contact& c : log.records()) {
    if (stage == ContactStage::replied && !c.replied) continue;
    if (!direction_matches(attrs, c, direction)) continue;
    const auto& from = attrs[c.sender];
    const auto& to = attrs[c.receiver];
    const std::size_t idx =
        (eth_index(from.ethnicity) * sub.count + sub.of_node[c.sender]) * kEthnicityCount + eth_index(to.ethnicity);
    auto& slot = per_sender[idx][c.sender];
    slot.first += from.age - to.age;
    slot.second += 1;
  }
  for (std::size_t idx = 0; idx < out.cells.size(); ++idx) {
    auto& cell = out.cells[idx];
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& [sender, acc] : per_sender[idx]) {
      count += acc.second;
      sum += weighting == GapWeighting::messages ? acc.first : acc.first / static_cast<double>(acc.second);
    }
    cell.count = count;
    if (count == 0) {
      cell.mean_gap = kNaN;
    } else if (weighting == GapWeighting::messages) {
      cell.mean_gap = sum / static_cast<double>(count);
    } else {
      cell.mean_gap = sum / static_cast<double>(per_sender[idx].size());
    }
  }
  return out;
}

}  // namespace submarket
