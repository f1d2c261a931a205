#include <doctest.h>

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "submarket/dcsbm.hpp"
#include "submarket/errors.hpp"
#include "submarket/synthetic.hpp"

using namespace submarket;

namespace {

BlockModelParams single(double w) { return {{1.0}, Matrix(1, 1, w)}; }

}  // namespace

TEST_CASE("parameter validation") {
  BlockModelParams p{{0.5, 0.5}, Matrix(2, 2, 0.1)};
  CHECK_NOTHROW(p.validate());
  p.gamma = {0.6, 0.5};
  CHECK_THROWS_AS(p.validate(), DataError);
  p.gamma = {0.5, 0.5};
  p.omega(0, 1) = 0.2;
  CHECK_THROWS_AS(p.validate(), DataError);
  p.omega(1, 0) = 0.2;
  CHECK_NOTHROW(p.validate());
  p.omega(0, 0) = -1.0;
  CHECK_THROWS_AS(p.validate(), DataError);
}

TEST_CASE("parameter JSON round trip") {
  BlockModelParams p{{0.25, 0.75}, Matrix(2, 2)};
  p.omega(0, 0) = 0.1;
  p.omega(0, 1) = p.omega(1, 0) = 1.0 / 3.0;
  p.omega(1, 1) = 2e-7;
  const nlohmann::json j = to_json(p);
  CHECK(j["k"] == 2);
  CHECK(params_from_json(nlohmann::json::parse(j.dump())) == p);
  CHECK_THROWS_AS(params_from_json(nlohmann::json{{"k", 3}, {"gamma", {1.0}}, {"omega", {{1.0}}}}), DataError);
}

TEST_CASE("log-likelihood of a single edge") {
  const Graph g = testing::graph(2, {{0, 1}});
  const Partition c = Partition::with_groups({0, 0}, 1);
  for (double w : {0.05, 0.25, 1.0}) {
    CHECK(log_likelihood(g, c, single(w)).value == doctest::Approx(2.0 * std::log(w) - 4.0 * w).epsilon(1e-14));
  }
}

TEST_CASE("log-likelihood matches the direct ordered-pair sum") {
  const auto fx = testing::fixture("likelihood.json")["six"];
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (const auto& e : fx["edges"]) pairs.emplace_back(e[0].get<NodeId>(), e[1].get<NodeId>());
  const Graph g = testing::graph(fx["n"].get<std::size_t>(), pairs);
  const Partition c = Partition::with_groups(fx["labels"].get<std::vector<std::uint32_t>>(), 2);
  const BlockModelParams p{{0.5, 0.5}, testing::matrix(fx["omega"])};
  CHECK(log_likelihood(g, c, p).value == doctest::Approx(fx["loglike"].get<double>()).epsilon(1e-13));

  // relabel groups and permute omega together
  const Partition swapped = Partition::with_groups({1, 1, 1, 0, 0, 0}, 2);
  BlockModelParams q = p;
  std::swap(q.omega(0, 0), q.omega(1, 1));
  CHECK(log_likelihood(g, swapped, q).value == doctest::Approx(log_likelihood(g, c, p).value).epsilon(1e-14));
}

TEST_CASE("an edge on a zero-affinity pair gives -inf") {
  const Graph g = testing::graph(2, {{0, 1}});
  BlockModelParams p{{0.5, 0.5}, Matrix(2, 2, 0.0)};
  p.omega(0, 0) = p.omega(1, 1) = 0.5;
  const auto ll = log_likelihood(g, Partition::with_groups({0, 1}, 2), p);
  CHECK_FALSE(ll.finite());
  CHECK(ll.impossible_edges == 1);
  CHECK(std::isinf(ll.value));
  CHECK(ll.value < 0);
}

TEST_CASE("zero affinity generates no edges") {
  const std::vector<double> d(50, 3.0);
  const auto gen = generate(50, BlockModelParams{{0.5, 0.5}, Matrix(2, 2, 0.0)}, d, 1);
  CHECK(gen.graph.node_count() == 50);
  CHECK(gen.graph.edge_count() == 0);
}

TEST_CASE("generator edge count matches the Poisson mean") {
  const std::size_t n = 100;
  const std::vector<double> d(n, 5.0);
  const double w = 1.0 / (5.0 * n);
  const double mean = 0.5 * (n * n - n) * 25.0 * w;  // sum over i < j
  GenerateOptions opt;
  opt.mode = GenerateMode::multigraph;
  double sum = 0.0, sum2 = 0.0;
  const int runs = 1000;
  for (int s = 0; s < runs; ++s) {
    const Graph g = generate(n, single(w), d, static_cast<std::uint64_t>(s), opt).graph;
    double total = 0.0;
    for (const Edge& e : g.edges()) total += e.weight;
    sum += total;
    sum2 += total * total;
  }
  const double avg = sum / runs;
  const double se = std::sqrt((sum2 / runs - avg * avg) / runs);
  CHECK(std::abs(avg - mean) < 3.0 * se);
}

TEST_CASE("generator is deterministic and simple mode is simple") {
  const auto d = powerlaw_degrees(300, 4);
  const auto p = affinity_params(assortative_affinity(3, 5.0), {0.2, 0.3, 0.5}, d);
  const auto a = generate(300, p, d, 17);
  const auto b = generate(300, p, d, 17);
  CHECK(a.planted.labels == b.planted.labels);
  CHECK(std::equal(a.graph.edges().begin(), a.graph.edges().end(), b.graph.edges().begin(), b.graph.edges().end()));
  CHECK(a.graph.is_simple());
}

TEST_CASE("generated group fractions follow gamma") {
  const std::size_t n = 10000;
  const std::vector<double> d(n, 2.0);
  const std::vector<double> gamma{0.1, 0.3, 0.6};
  BlockModelParams p{gamma, Matrix(3, 3, 1.0 / (2.0 * n))};
  const auto gen = generate(n, p, d, 99);
  const auto sizes = gen.planted.sizes();
  for (std::size_t r = 0; r < 3; ++r) {
    const double sigma = std::sqrt(n * gamma[r] * (1 - gamma[r]));
    CHECK(std::abs(static_cast<double>(sizes[r]) - n * gamma[r]) < 3.0 * sigma);
  }
}

TEST_CASE("dense regime is refused") {
  const std::vector<double> d(10, 100.0);
  CHECK_THROWS_AS(generate(10, single(0.01), d, 1), DataError);
}

TEST_CASE("planted partition has the highest likelihood among its perturbations") {
  for (int seed = 0; seed < 20; ++seed) {
    const std::size_t n = 200;
    const std::vector<double> d(n, 12.0);
    const auto p = affinity_params(assortative_affinity(2, 20.0), {0.5, 0.5}, d);
    const auto gen = generate(n, p, d, static_cast<std::uint64_t>(seed));
    const double planted = log_likelihood(gen.graph, gen.planted, p).value;
    std::mt19937_64 rng(seed);
    for (int t = 0; t < 10; ++t) {
      auto labels = gen.planted.labels;
      for (int flip = 0; flip < 1 + t * 5; ++flip) {
        auto& l = labels[rng() % n];
        l = 1 - l;
      }
      CHECK(log_likelihood(gen.graph, Partition::with_groups(labels, 2), p).value < planted);
    }
    CHECK(log_likelihood(gen.graph, Partition::with_groups(std::vector<std::uint32_t>(n, 0), 2), p).value < planted);
  }
}

TEST_CASE("power-law degrees stay in range") {
  const auto d = powerlaw_degrees(400, 2);
  for (double x : d) {
    CHECK(x >= 2.0);
    CHECK(x <= 20.0);
  }
  CHECK(powerlaw_degrees(400, 2) == d);
}
