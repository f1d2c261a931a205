#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "submarket/analysis.hpp"
#include "submarket/em.hpp"
#include "submarket/errors.hpp"
#include "submarket/metrics.hpp"
#include "submarket/pairing.hpp"
#include "submarket/synthetic.hpp"

using namespace submarket;

namespace {

NodeAttributes person(Sex sex, double age, Ethnicity e = Ethnicity::white) { return {sex, age, e, ""}; }

NodeSubmarkets subs(std::vector<std::uint32_t> of_node, std::uint32_t count) { return {std::move(of_node), count}; }

}  // namespace

TEST_CASE("within fraction on graphs and contact logs") {
  const Graph g = testing::graph(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
  CHECK(within_fraction(g, subs({0, 0, 1, 1}, 2)) == 0.5);
  CHECK(within_fraction(g, subs({0, 0, 0, 0}, 1)) == 1.0);
  // relabelling submarkets leaves the fraction unchanged
  CHECK(within_fraction(g, subs({1, 1, 0, 0}, 2)) == 0.5);

  const Graph w = Graph::from_edges(3, {{0, 1, 1.0}, {1, 2, 1.0}}, {2.0, 0.0, 0.0});
  CHECK(within_fraction(w, subs({0, 1, 1}, 2)) == doctest::Approx(3.0 / 4.0));

  const ContactLog log({{0, 1, false}, {1, 2, true}, {2, 3, false}, {3, 2, false}});
  CHECK(within_fraction(log, subs({0, 0, 1, 1}, 2)) == 0.75);
  CHECK_THROWS_AS(within_fraction(ContactLog{}, subs({0}, 1)), DataError);
  CHECK_THROWS_AS(within_fraction(Graph::from_edges(2, {}), subs({0, 0}, 1)), DataError);
}

TEST_CASE("quantiles match numpy linear interpolation") {
  const auto fx = testing::fixture("quantiles.json");
  for (const auto& [name, f] : fx.items()) {
    CAPTURE(name);
    auto values = f["values"].get<std::vector<double>>();
    std::sort(values.begin(), values.end());
    const auto probs = f["probs"].get<std::vector<double>>();
    for (std::size_t t = 0; t < probs.size(); ++t) {
      CHECK(quantile(values, probs[t]) == doctest::Approx(f["quantiles"][t].get<double>()).epsilon(1e-13));
    }
  }
  CHECK_THROWS_AS(quantile(std::vector<double>{}, 0.5), DataError);
}

TEST_CASE("age quantiles per cell") {
  std::vector<NodeAttributes> rows;
  for (int t = 0; t < 12; ++t) rows.push_back(person(Sex::male, 30));
  for (int t = 0; t < 3; ++t) rows.push_back(person(Sex::female, 20 + t));
  const AttributeTable attrs(rows);
  std::vector<std::uint32_t> of(15, 0);
  const auto q = age_quantiles(subs(of, 2), attrs, true, 10);
  REQUIRE(q.cells.size() == 2);
  CHECK(q.cells[0].quantiles.p9 == 30.0);
  CHECK(q.cells[0].quantiles.p91 == 30.0);
  CHECK(!q.cells[0].low_support);
  CHECK(q.cells[1].quantiles.p50 == 21.0);
  CHECK(q.cells[1].low_support);
  CHECK(q.warnings.size() == 2);  // submarket 1 has neither sex

  const auto pooled = age_quantiles(subs(of, 1), attrs, false);
  REQUIRE(pooled.cells.size() == 1);
  CHECK(!pooled.cells[0].sex);
  CHECK(pooled.cells[0].count == 15);
}

TEST_CASE("sex ratio") {
  std::vector<NodeAttributes> rows;
  for (int t = 0; t < 6; ++t) rows.push_back(person(t < 4 ? Sex::male : Sex::female, 25));
  const AttributeTable attrs(rows);
  const auto r = sex_ratio(subs({0, 0, 0, 0, 0, 0}, 2), attrs);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].percent_men == doctest::Approx(200.0 / 3.0));
  CHECK(r.rows[0].percent_men + r.rows[0].percent_women == doctest::Approx(100.0));
  CHECK(!r.rows[1].submarket);
  CHECK(r.warnings.size() == 1);

  // a generated 2:1 population
  std::mt19937_64 rng(3);
  std::bernoulli_distribution male(2.0 / 3.0);
  std::vector<NodeAttributes> big;
  for (int t = 0; t < 3000; ++t) big.push_back(person(male(rng) ? Sex::male : Sex::female, 30));
  const auto s = sex_ratio(subs(std::vector<std::uint32_t>(3000, 0), 1), AttributeTable(big));
  CHECK(std::abs(s.rows[0].percent_men - 200.0 / 3.0) < 3 * 100.0 * std::sqrt(2.0 / 9.0 / 3000.0));
}

TEST_CASE("relative minority age") {
  std::vector<NodeAttributes> rows{person(Sex::female, 30, Ethnicity::white), person(Sex::female, 34, Ethnicity::white),
                                   person(Sex::female, 29, Ethnicity::black), person(Sex::male, 50, Ethnicity::black),
                                   person(Sex::female, 40, Ethnicity::asian)};
  const AttributeTable attrs(rows);
  const auto r = relative_minority_age(subs({0, 0, 0, 0, 1}, 2), attrs, Ethnicity::white, Sex::female);
  REQUIRE(r.cells.size() == 1);
  CHECK(r.cells[0].ethnicity == Ethnicity::black);
  CHECK(r.cells[0].difference == -3.0);
  CHECK(r.cells[0].low_support);
  CHECK(r.warnings.size() == 1);  // submarket 1 has no white women

  // interaction weighting uses node strength
  const Graph g = testing::graph(5, {{0, 1}, {0, 2}, {0, 3}, {1, 4}});
  const auto w =
      relative_minority_age(subs({0, 0, 0, 0, 1}, 2), attrs, Ethnicity::white, Sex::female, 10,
                            AgeWeighting::interactions, &g);
  CHECK(w.cells[0].reference_mean_age == doctest::Approx((3 * 30.0 + 2 * 34.0) / 5.0));
  CHECK_THROWS_AS(relative_minority_age(subs({0, 0, 0, 0, 1}, 2), attrs, Ethnicity::white, Sex::female, 10,
                                        AgeWeighting::interactions),
                  DataError);

  // planted offset of -8 years
  std::mt19937_64 rng(8);
  std::normal_distribution<double> white(36.0, 2.0), black(28.0, 2.0);
  std::vector<NodeAttributes> big;
  for (int t = 0; t < 5000; ++t) big.push_back(person(Sex::female, white(rng), Ethnicity::white));
  for (int t = 0; t < 5000; ++t) big.push_back(person(Sex::female, black(rng), Ethnicity::black));
  const auto planted = relative_minority_age(subs(std::vector<std::uint32_t>(10000, 0), 1), AttributeTable(big),
                                             Ethnicity::white, Sex::female);
  REQUIRE(planted.cells.size() == 1);
  CHECK(std::abs(planted.cells[0].difference + 8.0) < 0.2);
}

TEST_CASE("mixing matrix") {
  // men 0, 1 in submarket 0 and 2 in submarket 1; women 3 in 0, 4 in 1
  std::vector<NodeAttributes> rows{person(Sex::male, 25), person(Sex::male, 26), person(Sex::male, 40),
                                   person(Sex::female, 24), person(Sex::female, 38)};
  const AttributeTable attrs(rows);
  const auto sub = subs({0, 0, 1, 0, 1}, 2);
  const ContactLog log({{0, 3, true}, {1, 3, false}, {0, 4, true}, {1, 4, false}, {2, 4, true}, {3, 0, true}});
  const auto m = mixing_matrix(log, attrs, sub, Direction::male_to_female, 1);
  CHECK(m.sent(0, 0) == 2.0);
  CHECK(m.sent(0, 1) == 2.0);
  CHECK(m.fraction(0, 0) == 0.5);
  CHECK(m.fraction(1, 1) == 1.0);
  CHECK(m.reply_rate(0, 1) == 0.5);
  CHECK(std::isnan(m.reply_rate(1, 0)));
  for (std::size_t r = 0; r < 2; ++r) {
    double total = 0.0;
    for (std::size_t s = 0; s < 2; ++s) {
      total += m.fraction(r, s);
      CHECK(m.replied(r, s) <= m.sent(r, s));
    }
    CHECK(total == doctest::Approx(1.0));
  }
  const auto f = mixing_matrix(log, attrs, sub, Direction::female_to_male, 1);
  CHECK(f.row_present[0]);
  CHECK(!f.row_present[1]);
  CHECK(std::isnan(f.fraction(1, 0)));
  CHECK(f.warnings.size() == 1);
  CHECK(f.low_support(0, 1));

  // generated log with 57% of messages inside the sender's submarket
  std::vector<NodeAttributes> big;
  std::vector<std::uint32_t> of;
  for (int t = 0; t < 400; ++t) {
    big.push_back(person(t % 2 == 0 ? Sex::male : Sex::female, 30));
    of.push_back(static_cast<std::uint32_t>((t / 2) % 2));
  }
  std::mt19937_64 rng(57);
  std::bernoulli_distribution inside(0.57);
  std::vector<Contact> records;
  for (NodeId man = 0; man < 400; man += 2) {
    for (int t = 0; t < 25; ++t) {
      const bool in = inside(rng);
      // women of submarket s sit at indices 4j + 2s + 1
      const std::uint32_t want = in ? of[man] : 1 - of[man];
      records.push_back({man, static_cast<NodeId>(4 * t + 2 * want + 1), false});
    }
  }
  const auto g = mixing_matrix(ContactLog(records), AttributeTable(big), subs(of, 2), Direction::male_to_female);
  CHECK(std::abs(g.fraction(0, 0) - 0.57) < 0.03);
  CHECK(std::abs(g.fraction(1, 1) - 0.57) < 0.03);
}

TEST_CASE("age gap matrix") {
  std::vector<NodeAttributes> rows{person(Sex::male, 30, Ethnicity::white), person(Sex::male, 40, Ethnicity::white),
                                   person(Sex::female, 25, Ethnicity::white), person(Sex::female, 28, Ethnicity::black)};
  const AttributeTable attrs(rows);
  const auto sub = subs({0, 0, 0, 0}, 1);
  const ContactLog log({{0, 2, true}, {0, 3, false}, {1, 2, false}, {1, 3, true}});
  const auto sent = age_gap_matrix(log, attrs, sub, ContactStage::sent);
  CHECK(sent.at(Ethnicity::white, 0, Ethnicity::white).mean_gap == 10.0);  // (5 + 15) / 2
  CHECK(sent.at(Ethnicity::white, 0, Ethnicity::black).mean_gap == 7.0);
  CHECK(sent.at(Ethnicity::black, 0, Ethnicity::white).empty());
  CHECK(std::isnan(sent.at(Ethnicity::black, 0, Ethnicity::white).mean_gap));
  CHECK(sent.cells.size() == kEthnicityCount * kEthnicityCount);
  const auto replied = age_gap_matrix(log, attrs, sub, ContactStage::replied);
  CHECK(replied.at(Ethnicity::white, 0, Ethnicity::white).mean_gap == 5.0);
  CHECK(replied.at(Ethnicity::white, 0, Ethnicity::black).mean_gap == 12.0);

  // per-sender weighting averages each sender's mean
  const ContactLog skew({{0, 2, false}, {0, 3, false}, {1, 3, false}});
  std::vector<NodeAttributes> same{person(Sex::male, 30), person(Sex::male, 40), person(Sex::female, 30),
                                   person(Sex::female, 30)};
  const auto by_msg = age_gap_matrix(skew, AttributeTable(same), sub, ContactStage::sent, Direction::male_to_female,
                                     GapWeighting::messages);
  const auto by_sender = age_gap_matrix(skew, AttributeTable(same), sub, ContactStage::sent,
                                        Direction::male_to_female, GapWeighting::senders);
  CHECK(by_msg.at(Ethnicity::white, 0, Ethnicity::white).mean_gap == doctest::Approx(10.0 / 3.0));
  CHECK(by_sender.at(Ethnicity::white, 0, Ethnicity::white).mean_gap == 5.0);

  // planted mean gap of 5.8 years
  std::mt19937_64 rng(58);
  std::normal_distribution<double> age(35.0, 4.0), noise(0.0, 2.0);
  std::vector<NodeAttributes> big;
  std::vector<Contact> records;
  for (NodeId t = 0; t < 3000; ++t) {
    const double receiver = age(rng);
    big.push_back(person(Sex::male, receiver + 5.8 + noise(rng)));
    big.push_back(person(Sex::female, receiver));
    records.push_back({2 * t, 2 * t + 1, false});
  }
  const auto planted = age_gap_matrix(ContactLog(records), AttributeTable(big), subs(std::vector<std::uint32_t>(6000, 0), 1),
                                      ContactStage::sent);
  CHECK(std::abs(planted.at(Ethnicity::white, 0, Ethnicity::white).mean_gap - 5.8) < 0.1);
}

TEST_CASE("pairing sex-homogeneous communities") {
  std::vector<NodeAttributes> rows;
  std::vector<std::uint32_t> labels;
  // communities: 0 men age ~40, 1 women ~38, 2 men ~25, 3 women ~23
  const double ages[4] = {40, 38, 25, 23};
  for (std::uint32_t c = 0; c < 4; ++c) {
    for (int t = 0; t < 5; ++t) {
      rows.push_back(person(c % 2 == 0 ? Sex::male : Sex::female, ages[c] + t));
      labels.push_back(c);
    }
  }
  BlockModelParams p{{0.25, 0.25, 0.25, 0.25}, Matrix(4, 4, 0.01)};
  p.omega(0, 1) = p.omega(1, 0) = 0.5;
  p.omega(2, 3) = p.omega(3, 2) = 0.4;
  const auto map = pair_submarkets(p, Partition::with_groups(labels, 4), AttributeTable(rows));
  CHECK(map.count == 2);
  CHECK(map.of_community == std::vector<std::uint32_t>{1, 1, 0, 0});
  CHECK(map.warnings.empty());

  // k = 2: one male and one female community form a single submarket
  std::vector<std::uint32_t> two;
  for (auto l : labels) two.push_back(l % 2);
  BlockModelParams q{{0.5, 0.5}, Matrix(2, 2, 0.01)};
  q.omega(0, 1) = q.omega(1, 0) = 0.3;
  const auto single = pair_submarkets(q, Partition::with_groups(two, 2), AttributeTable(rows));
  CHECK(single.count == 1);
}

TEST_CASE("pairing ties and leftovers") {
  std::vector<NodeAttributes> rows{person(Sex::male, 30), person(Sex::female, 30), person(Sex::female, 31),
                                   person(Sex::male, 20), person(Sex::female, 20)};
  // community 0 male, 1 and 2 female with equal omega to 0, community 3 split 50/50
  const std::vector<std::uint32_t> labels{0, 1, 2, 3, 3};
  BlockModelParams p{{0.25, 0.25, 0.25, 0.25}, Matrix(4, 4, 0.0)};
  p.omega(0, 1) = p.omega(1, 0) = 0.2;
  p.omega(0, 2) = p.omega(2, 0) = 0.2;
  p.omega(3, 2) = p.omega(2, 3) = 0.1;
  const auto map = pair_submarkets(p, Partition::with_groups(labels, 4), AttributeTable(rows));
  // 0 pairs with the lower index 1; 2 is left over and joins 0's submarket
  CHECK(map.of_community[0] == map.of_community[1]);
  CHECK(map.of_community[2] == map.of_community[0]);
  CHECK(map.of_community[3] == map.of_community[2]);
  CHECK(map.count == 1);
  bool tie_warning = false;
  for (const auto& w : map.warnings) tie_warning |= w.find("no sex majority") != std::string::npos;
  CHECK(tie_warning);

  const auto nodes = map.for_nodes(Partition::with_groups(labels, 4));
  CHECK(nodes.of_node.size() == 5);
}

TEST_CASE("pairing a planted market recovers the age blocks") {
  MarketSpec spec;
  spec.age_blocks = 2;
  spec.degree_scale = 4.0;
  const auto market = make_market(1200, spec, 2);
  const auto map = pair_submarkets(market.truth, market.planted, market.attrs);
  REQUIRE(map.count == 2);
  const auto nodes = map.for_nodes(market.planted);
  CHECK(aligned_accuracy(market.age_block, 2, nodes.of_node, nodes.count) == 1.0);
  for (std::size_t i = 0; i < nodes.of_node.size(); ++i) CHECK(nodes.of_node[i] == market.age_block[i]);
}

TEST_CASE("label alignment") {
  const std::vector<std::uint32_t> truth{0, 0, 1, 1, 2, 2};
  const std::vector<std::uint32_t> found{2, 2, 0, 0, 1, 1};
  CHECK(align_labels(truth, 3, found, 3) == std::vector<int>{1, 2, 0});
  CHECK(aligned_accuracy(truth, 3, found, 3) == 1.0);
  const std::vector<std::uint32_t> extra{0, 0, 1, 1, 2, 3};
  const auto map = align_labels(truth, 3, extra, 4);
  CHECK(std::count(map.begin(), map.end(), -1) == 1);
  CHECK(aligned_accuracy(truth, 3, extra, 4) == doctest::Approx(5.0 / 6.0));
  const std::vector<std::uint32_t> merged{0, 0, 0, 0, 1, 1};
  CHECK(aligned_accuracy(truth, 3, merged, 2) == doctest::Approx(4.0 / 6.0));
  CHECK_THROWS_AS(align_labels(truth, 3, std::vector<std::uint32_t>{0}, 1), DataError);
}
