#include "submarket/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "submarket/analysis.hpp"
#include "submarket/bp.hpp"
#include "submarket/edge_list.hpp"
#include "submarket/em.hpp"
#include "submarket/errors.hpp"
#include "submarket/figures.hpp"
#include "submarket/metrics.hpp"
#include "submarket/modularity.hpp"
#include "submarket/oracle.hpp"
#include "submarket/pairing.hpp"
#include "submarket/synthetic.hpp"

namespace submarket {
namespace {

// Pinned tolerances and sizes.
constexpr int kTrees = 50;
constexpr double kTreeTol = 1e-6;
constexpr double kTreeSeconds = 10.0;

constexpr std::size_t kPlantedN = 2000;
constexpr std::size_t kPlantedK = 4;
constexpr double kPlantedRatio = 10.0;
constexpr double kPlantedDegreeScale = 4.0;
constexpr int kPlantedSeeds = 10;
constexpr int kPlantedRequired = 8;
constexpr double kPlantedAccuracy = 0.95;
constexpr double kPlantedSeconds = 60.0;

constexpr std::size_t kMarketN = 3000;
constexpr double kMarketDegreeScale = 4.0;
constexpr std::uint64_t kMarketSeed = 5;
constexpr double kSexPurity = 0.95;
constexpr double kBlockAccuracy = 0.95;
constexpr double kMarketSeconds = 120.0;

constexpr double kDegreeTol = 1e-2;
constexpr double kDegreeMin = 5.0;

constexpr int kModularityGraphs = 20;
constexpr double kModularityTol = 1e-12;

constexpr double kRegionResolution = 0.65;
constexpr double kRegionMinQ = 0.3;

constexpr double kAnalysisTol = 1e-12;
constexpr double kNormTol = 1e-10;

constexpr std::size_t kRobustN = 3600;
constexpr std::size_t kRobustBlocks = 6;
constexpr int kRobustRestarts = 4;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double x, int precision = 4) {
  std::ostringstream out;
  out.precision(precision);
  out << x;
  return out.str();
}

Graph graph_from_pairs(std::size_t n, const std::vector<std::pair<NodeId, NodeId>>& pairs) {
  std::vector<Edge> edges;
  for (auto [u, v] : pairs) edges.push_back({u, v, 1.0});
  return Graph::from_edges(n, edges);
}

struct PlantedRun {
  Graph graph;
  std::vector<std::uint32_t> truth;
  FitResult fit;
  double seconds = 0.0;
};

struct MarketRun {
  SyntheticMarket market;
  FitResult fit;
  double seconds = 0.0;
};

// Fits shared between criteria, computed on first use.
class Suite {
 public:
  const std::vector<PlantedRun>& planted() {
    if (!planted_) {
      planted_.emplace();
      for (int seed = 0; seed < kPlantedSeeds; ++seed) planted_->push_back(planted_run(seed));
    }
    return *planted_;
  }

  const MarketRun& market() {
    if (!market_) {
      MarketSpec spec;
      spec.degree_scale = kMarketDegreeScale;
      MarketRun run;
      run.market = restrict_to_lcc(make_market(kMarketN, spec, kMarketSeed));
      FitOptions opt;
      opt.k = 2 * spec.age_blocks;
      opt.seed = 0;
      opt.track_invariants = true;
      const auto t0 = Clock::now();
      run.fit = fit(run.market.graph, opt);
      run.seconds = seconds_since(t0);
      market_ = std::move(run);
    }
    return *market_;
  }

  bool planted_done() const { return planted_.has_value(); }
  bool market_done() const { return market_.has_value(); }

  static Graph planted_graph(int seed, std::vector<std::uint32_t>* truth) {
    const auto degrees = powerlaw_degrees(kPlantedN, 100 + static_cast<std::uint64_t>(seed));
    std::vector<double> gamma(kPlantedK, 1.0 / kPlantedK);
    const auto params =
        affinity_params(assortative_affinity(kPlantedK, kPlantedRatio), gamma, degrees, kPlantedDegreeScale);
    const auto generated = generate(kPlantedN, params, degrees, 200 + static_cast<std::uint64_t>(seed));
    Subgraph sub = largest_connected_component(generated.graph);
    if (truth) {
      truth->clear();
      for (NodeId old : sub.to_parent) truth->push_back(generated.planted.labels[old]);
    }
    return std::move(sub.graph);
  }

 private:
  static PlantedRun planted_run(int seed) {
    PlantedRun run;
    run.graph = planted_graph(seed, &run.truth);
    FitOptions opt;
    opt.k = kPlantedK;
    opt.seed = static_cast<std::uint64_t>(seed);
    opt.track_invariants = true;
    const auto t0 = Clock::now();
    run.fit = fit(run.graph, opt);
    run.seconds = seconds_since(t0);
    return run;
  }

  std::optional<std::vector<PlantedRun>> planted_;
  std::optional<MarketRun> market_;
};

// --- 1: BP on trees against enumeration -----------------------------------

Graph random_tree(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (std::size_t i = 1; i < n; ++i) {
    const auto parent = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
    pairs.emplace_back(static_cast<NodeId>(parent), static_cast<NodeId>(i));
  }
  return graph_from_pairs(n, pairs);
}

BlockModelParams random_params(std::size_t k, double two_m, std::mt19937_64& rng) {
  BlockModelParams p;
  std::gamma_distribution<double> part(2.0, 1.0);
  double total = 0.0;
  for (std::size_t r = 0; r < k; ++r) {
    p.gamma.push_back(part(rng) + 0.05);
    total += p.gamma.back();
  }
  for (double& x : p.gamma) x /= total;
  std::uniform_real_distribution<double> scale(0.5, 1.5);
  p.omega = Matrix(k, k);
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t s = r; s < k; ++s) p.omega(r, s) = p.omega(s, r) = scale(rng) / two_m;
  }
  return p;
}

CriterionResult tree_exactness(Suite&) {
  CriterionResult out{1, "tree-exactness", false, "", 0.0};
  std::mt19937_64 rng(20240601);
  double worst = 0.0;
  double norm = 0.0;
  int unconverged = 0;
  for (int t = 0; t < kTrees; ++t) {
    const std::size_t k = t % 2 == 0 ? 2 : 3;
    const std::size_t max_n = k == 2 ? 12 : 10;
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, max_n)(rng);
    const Graph g = random_tree(n, rng);
    const BlockModelParams params = random_params(k, 2.0 * static_cast<double>(n - 1), rng);

    BpState state = random_bp_state(g, k, rng());
    BpOptions bp;
    bp.tol = 1e-13;
    bp.max_sweeps = 20000;
    bp.track_normalization = true;
    const BpRunResult run = run_bp(g, params, state, bp);
    if (!run.converged) ++unconverged;
    norm = std::max(norm, run.max_norm_error);
    const PairMarginals q2 = two_node_marginals(g, params, state.beliefs);

    ExactPosteriorOptions opt;
    opt.model = PosteriorModel::bp_fixed_point;
    const ExactPosterior exact = exact_posterior(g, params, opt);
    if (!exact.field_converged) ++unconverged;
    for (std::size_t x = 0; x < exact.q1.data().size(); ++x) {
      worst = std::max(worst, std::abs(exact.q1.data()[x] - state.q1.data()[x]));
    }
    for (std::size_t x = 0; x < exact.q2.data.size(); ++x) {
      worst = std::max(worst, std::abs(exact.q2.data[x] - q2.data[x]));
    }
  }
  out.passed = worst <= kTreeTol && unconverged == 0 && norm <= kNormTol;
  out.detail = std::to_string(kTrees) + " trees, max |bp - exact| = " + fmt(worst) + " (tol " + fmt(kTreeTol) +
               "), unconverged " + std::to_string(unconverged);
  return out;
}

// --- 2: planted assortative recovery ----------------------------------------

CriterionResult planted_recovery(Suite& suite) {
  CriterionResult out{2, "planted-assortative-recovery", false, "", 0.0};
  int good = 0;
  double slowest = 0.0;
  std::ostringstream accs;
  for (const auto& run : suite.planted()) {
    const double acc = aligned_accuracy(run.truth, kPlantedK, run.fit.assignment.labels, kPlantedK);
    if (acc >= kPlantedAccuracy) ++good;
    slowest = std::max(slowest, run.seconds);
    accs << (accs.tellp() > 0 ? " " : "") << fmt(acc, 3);
  }
  out.passed = good >= kPlantedRequired && slowest < kPlantedSeconds;
  out.detail = std::to_string(good) + "/" + std::to_string(kPlantedSeeds) + " seeds with accuracy >= " +
               fmt(kPlantedAccuracy) + " (need " + std::to_string(kPlantedRequired) + "), slowest seed " +
               fmt(slowest, 3) + " s; accuracies " + accs.str();
  return out;
}

// --- 3: mixed assortative / disassortative market ---------------------------

double min_sex_purity(const Partition& p, const AttributeTable& attrs) {
  std::vector<std::size_t> men(p.k, 0), total(p.k, 0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    ++total[p.labels[i]];
    if (attrs[static_cast<NodeId>(i)].sex == Sex::male) ++men[p.labels[i]];
  }
  double worst = 1.0;
  for (std::size_t c = 0; c < p.k; ++c) {
    if (total[c] == 0) continue;
    const double majority = static_cast<double>(std::max(men[c], total[c] - men[c]));
    worst = std::min(worst, majority / static_cast<double>(total[c]));
  }
  return worst;
}

CriterionResult mixed_structure(Suite& suite) {
  CriterionResult out{3, "mixed-structure-market", false, "", 0.0};
  const MarketRun& run = suite.market();
  const double purity = min_sex_purity(run.fit.assignment, run.market.attrs);
  const SubmarketMap map = pair_submarkets(run.fit, run.market.attrs);
  const NodeSubmarkets nodes = map.for_nodes(run.fit.assignment);
  const auto blocks = static_cast<std::uint32_t>(run.market.planted.k / 2);
  const double acc =
      map.count == blocks ? aligned_accuracy(run.market.age_block, blocks, nodes.of_node, nodes.count) : 0.0;
  out.passed = purity >= kSexPurity && map.count == blocks && acc >= kBlockAccuracy && run.seconds < kMarketSeconds;
  out.detail = "min sex purity " + fmt(purity) + ", " + std::to_string(map.count) + " submarkets, age-block accuracy " +
               fmt(acc) + ", fit " + fmt(run.seconds, 3) + " s";
  return out;
}

// --- 4: expected degrees ----------------------------------------------------

CriterionResult expected_degree(Suite& suite) {
  CriterionResult out{4, "expected-degree-identity", false, "", 0.0};
  double worst = 0.0;
  std::size_t checked = 0;
  for (const auto& run : suite.planted()) {
    const auto expected = expected_degrees(run.graph, run.fit.q1, run.fit.params);
    for (NodeId i = 0; i < run.graph.node_count(); ++i) {
      const double d = run.graph.degree(i);
      if (d < kDegreeMin) continue;
      worst = std::max(worst, std::abs(expected[i] - d) / d);
      ++checked;
    }
  }
  out.passed = checked > 0 && worst <= kDegreeTol;
  out.detail = std::to_string(checked) + " nodes with d >= 5, max relative error " + fmt(worst) + " (tol " +
               fmt(kDegreeTol) + ")";
  return out;
}

// --- 5: modularity oracle ---------------------------------------------------

CriterionResult modularity_oracle(Suite&) {
  CriterionResult out{5, "modularity-oracle", false, "", 0.0};
  std::mt19937_64 rng(77);
  int ok = 0;
  bool zero_exact = true;
  double worst_gap = 0.0;
  for (int t = 0; t < kModularityGraphs; ++t) {
    Graph g;
    do {
      const std::size_t n = std::uniform_int_distribution<std::size_t>(3, 8)(rng);
      const double p = std::uniform_real_distribution<double>(0.25, 0.7)(rng);
      std::vector<Edge> edges;
      for (NodeId u = 0; u < n; ++u) {
        for (NodeId v = u + 1; v < n; ++v) {
          if (std::bernoulli_distribution(p)(rng)) {
            // every other graph is weighted
            const double w = t % 2 == 0 ? 1.0 : std::uniform_int_distribution<int>(1, 5)(rng);
            edges.push_back({u, v, w});
          }
        }
      }
      g = Graph::from_edges(n, edges);
    } while (g.edge_count() == 0);
    const auto exact = exhaustive_max_modularity(g);
    const auto greedy = louvain(g, LouvainOptions{});
    worst_gap = std::max(worst_gap, greedy.modularity - exact.modularity);
    if (exact.modularity >= greedy.modularity - kModularityTol) ++ok;
    const Partition one = Partition::with_groups(std::vector<std::uint32_t>(g.node_count(), 0), 1);
    if (modularity(g, one) != 0.0) zero_exact = false;
  }

  const Graph triangles = graph_from_pairs(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}, {2, 3}});
  std::vector<std::pair<NodeId, NodeId>> k5;
  for (NodeId u = 0; u < 5; ++u) {
    for (NodeId v = u + 1; v < 5; ++v) k5.emplace_back(u, v);
  }
  const Graph complete = graph_from_pairs(5, k5);
  bool fixtures_equal = true;
  for (const Graph* g : {&triangles, &complete}) {
    const double exact = exhaustive_max_modularity(*g).modularity;
    const double greedy = louvain(*g, LouvainOptions{}).modularity;
    if (std::abs(exact - greedy) > kModularityTol) fixtures_equal = false;
    const Partition one = Partition::with_groups(std::vector<std::uint32_t>(g->node_count(), 0), 1);
    if (modularity(*g, one) != 0.0) zero_exact = false;
  }
  out.passed = ok == kModularityGraphs && fixtures_equal && zero_exact;
  out.detail = std::to_string(ok) + "/" + std::to_string(kModularityGraphs) + " graphs with exhaustive Q >= Louvain Q" +
               " (max excess " + fmt(worst_gap) + "), fixtures equal: " + (fixtures_equal ? "yes" : "no") +
               ", all-in-one Q == 0: " + (zero_exact ? "yes" : "no");
  return out;
}

// --- 6: geographic pipeline -------------------------------------------------

CriterionResult geographic(Suite&) {
  CriterionResult out{6, "geographic-pipeline", false, "", 0.0};
  // two macro regions of ten 3-digit codes each; within-region pairs
  // interact at ten times the cross-region rate
  std::vector<std::string> codes;
  std::vector<int> side;
  for (int c = 0; c < 10; ++c) {
    codes.push_back(std::to_string(600 + c));
    side.push_back(0);
    codes.push_back(std::to_string(100 + c));
    side.push_back(1);
  }
  std::mt19937_64 rng(65);
  RegionInteractionLog log;
  for (std::size_t a = 0; a < codes.size(); ++a) {
    for (std::size_t b = a; b < codes.size(); ++b) {
      const double rate = side[a] == side[b] ? 40.0 : 4.0;
      const int count = std::poisson_distribution<int>(rate)(rng);
      for (int t = 0; t < count; ++t) log.add(codes[a], codes[b]);
    }
  }
  const Graph g = aggregate_by_region(log);
  const auto result = louvain(g, LouvainOptions{kRegionResolution, 0});
  // expected labels by id
  std::map<std::string, int> truth;
  for (std::size_t c = 0; c < codes.size(); ++c) truth[codes[c]] = side[c];
  bool exact = result.partition.k == 2;
  std::vector<int> map(2, -1);
  for (NodeId i = 0; i < g.node_count() && exact; ++i) {
    const auto label = result.partition.labels[i];
    const int want = truth.at(g.id(i));
    if (map[label] == -1) map[label] = want;
    if (map[label] != want) exact = false;
  }
  if (exact && map[0] == map[1]) exact = false;
  const double q = modularity(g, result.partition, 1.0);
  out.passed = exact && q > kRegionMinQ;
  out.detail = std::to_string(result.partition.k) + " communities, regions recovered exactly: " +
               (exact ? "yes" : "no") + ", Q = " + fmt(q) + " (resolution 1; > " + fmt(kRegionMinQ) + ")";
  return out;
}

// --- 7: analysis exactness --------------------------------------------------

struct Checks {
  int total = 0;
  std::vector<std::string> failed;

  void near(const std::string& what, double got, double want, double tol = kAnalysisTol) {
    ++total;
    if (!(std::abs(got - want) <= tol)) failed.push_back(what + " = " + fmt(got, 17) + ", want " + fmt(want, 17));
  }
  void exact(const std::string& what, double got, double want) {
    ++total;
    if (got != want) failed.push_back(what + " = " + fmt(got, 17) + ", want " + fmt(want, 17));
  }
  void truth(const std::string& what, bool ok) {
    ++total;
    if (!ok) failed.push_back(what);
  }
};

NodeAttributes person(Sex s, double age, Ethnicity e) { return {s, age, e, ""}; }

CriterionResult analysis_exactness(Suite&) {
  CriterionResult out{7, "analysis-exactness", false, "", 0.0};
  Checks c;

  // within_fraction: 3 within + 1 across
  {
    const Graph g = graph_from_pairs(4, {{0, 1}, {2, 3}, {0, 2}, {1, 3}});
    NodeSubmarkets sub{{0, 0, 1, 0}, 2};
    c.exact("within_fraction(graph)", within_fraction(g, sub), 0.5);
    ContactLog log({{0, 1, true}, {1, 0, false}, {1, 3, true}, {2, 0, false}});
    c.exact("within_fraction(contacts)", within_fraction(log, sub), 0.75);
    const Graph w = Graph::from_edges(3, {{0, 1, 3.0}, {1, 2, 1.0}}, {0.0, 0.0, 4.0});
    NodeSubmarkets sub3{{0, 0, 1}, 2};
    // within: 3 (edge) + 4 (internal) of total 8
    c.exact("within_fraction(weighted)", within_fraction(w, sub3), 7.0 / 8.0);
  }

  // quantiles
  {
    std::vector<double> hundred;
    for (int a = 1; a <= 100; ++a) hundred.push_back(a);
    c.exact("quantile(1..100, 0.25)", quantile(hundred, 0.25), 25.75);
    c.near("quantile(1..100, 0.09)", quantile(hundred, 0.09), 9.91);
    const std::vector<double> five{20, 21, 22, 23, 24};
    c.exact("quantile(20..24, 0.5)", quantile(five, 0.5), 22.0);
    c.near("quantile(20..24, 0.91)", quantile(five, 0.91), 23.64);
  }

  // age_quantiles, sex_ratio and relative ages on a 120-person fixture
  {
    std::vector<NodeAttributes> rows;
    std::vector<std::uint32_t> labels;
    // submarket 0: 60 men aged 20..79 (white), 40 women
    for (int a = 0; a < 60; ++a) {
      rows.push_back(person(Sex::male, 20 + a, Ethnicity::white));
      labels.push_back(0);
    }
    // women: 20 white aged 30, 20 black aged 27
    for (int a = 0; a < 20; ++a) {
      rows.push_back(person(Sex::female, 30, Ethnicity::white));
      labels.push_back(0);
    }
    for (int a = 0; a < 20; ++a) {
      rows.push_back(person(Sex::female, 27, Ethnicity::black));
      labels.push_back(0);
    }
    // submarket 1: 10 men, 10 women, all aged 40
    for (int a = 0; a < 20; ++a) {
      rows.push_back(person(a < 10 ? Sex::male : Sex::female, 40, Ethnicity::white));
      labels.push_back(1);
    }
    const AttributeTable attrs(rows);
    const NodeSubmarkets sub{labels, 2};

    const auto ratios = sex_ratio(sub, attrs);
    c.truth("sex_ratio has 3 rows", ratios.rows.size() == 3);
    if (ratios.rows.size() == 3) {
      c.near("sex_ratio[0].percent_men", ratios.rows[0].percent_men, 60.0);
      c.near("sex_ratio[0].percent_women", ratios.rows[0].percent_women, 40.0);
      c.near("sex_ratio[1].percent_men", ratios.rows[1].percent_men, 50.0);
      c.exact("sex_ratio[overall].men", static_cast<double>(ratios.rows[2].men), 70.0);
      c.near("sex_ratio[overall].percent_men", ratios.rows[2].percent_men, 700.0 / 12.0);
    }

    const auto q = age_quantiles(sub, attrs, true);
    const AgeQuantileCell* men0 = nullptr;
    const AgeQuantileCell* women1 = nullptr;
    for (const auto& cell : q.cells) {
      if (cell.submarket == 0 && cell.sex == Sex::male) men0 = &cell;
      if (cell.submarket == 1 && cell.sex == Sex::female) women1 = &cell;
    }
    c.truth("age_quantiles cells present", men0 && women1);
    if (men0 && women1) {
      // men 20..79: position 1 + 59 p
      c.near("age_quantiles men0 p25", men0->quantiles.p25, 20.0 + 59.0 * 0.25);
      c.near("age_quantiles men0 p91", men0->quantiles.p91, 20.0 + 59.0 * 0.91);
      c.exact("age_quantiles women1 p9", women1->quantiles.p9, 40.0);
      c.truth("age_quantiles women1 not low support", !women1->low_support);
    }

    const auto rel = relative_minority_age(sub, attrs, Ethnicity::white, Sex::female);
    const RelativeAgeCell* black0 = nullptr;
    for (const auto& cell : rel.cells) {
      if (cell.submarket == 0 && cell.ethnicity == Ethnicity::black) black0 = &cell;
    }
    c.truth("relative age cell present", black0 != nullptr);
    if (black0) c.exact("relative_minority_age black women", black0->difference, -3.0);
  }

  // mixing, reply rates and age gaps
  {
    std::vector<NodeAttributes> rows;
    std::vector<std::uint32_t> labels;
    // nodes 0..9 men in submarket 0 aged 30 (black), 10..19 women in 0 aged 25
    // (white), 20..29 women in 1 aged 28 (asian)
    for (int i = 0; i < 10; ++i) {
      rows.push_back(person(Sex::male, 30, Ethnicity::black));
      labels.push_back(0);
    }
    for (int i = 0; i < 10; ++i) {
      rows.push_back(person(Sex::female, 25, Ethnicity::white));
      labels.push_back(0);
    }
    for (int i = 0; i < 10; ++i) {
      rows.push_back(person(Sex::female, 28, Ethnicity::asian));
      labels.push_back(1);
    }
    const AttributeTable attrs(rows);
    const NodeSubmarkets sub{labels, 2};
    std::vector<Contact> records;
    // man i -> woman 10+i, replied for the first 4
    for (NodeId i = 0; i < 10; ++i) records.push_back({i, 10 + i, i < 4});
    // man i -> woman 20+i for i < 5, never replied
    for (NodeId i = 0; i < 5; ++i) records.push_back({i, 20 + i, false});
    const ContactLog log(records);

    const auto mix = mixing_matrix(log, attrs, sub, Direction::male_to_female);
    c.exact("reply_rate(0,0)", mix.reply_rate(0, 0), 0.4);
    c.exact("reply_rate(0,1)", mix.reply_rate(0, 1), 0.0);
    c.near("fraction(0,0)", mix.fraction(0, 0), 2.0 / 3.0);
    c.near("fraction row sum", mix.fraction(0, 0) + mix.fraction(0, 1), 1.0);
    c.truth("row 1 absent", !mix.row_present[1]);
    c.truth("cell (0,0) low support", mix.low_support(0, 0));

    const auto sent = age_gap_matrix(log, attrs, sub, ContactStage::sent);
    const auto replied = age_gap_matrix(log, attrs, sub, ContactStage::replied);
    const auto& bw = sent.at(Ethnicity::black, 0, Ethnicity::white);
    const auto& ba = sent.at(Ethnicity::black, 0, Ethnicity::asian);
    c.exact("age gap black->white", bw.mean_gap, 5.0);
    c.exact("age gap black->asian", ba.mean_gap, 2.0);
    c.exact("age gap count", static_cast<double>(bw.count), 10.0);
    c.exact("replied gap count", static_cast<double>(replied.at(Ethnicity::black, 0, Ethnicity::white).count), 4.0);
    c.truth("replied black->asian empty", replied.at(Ethnicity::black, 0, Ethnicity::asian).empty());
    c.truth("white senders empty", sent.at(Ethnicity::white, 0, Ethnicity::white).empty());
  }

  out.passed = c.failed.empty();
  out.detail = std::to_string(c.total - static_cast<int>(c.failed.size())) + "/" + std::to_string(c.total) +
               " fixture values exact";
  for (const auto& f : c.failed) out.detail += "; " + f;
  return out;
}

// --- 8: normalization and determinism ---------------------------------------

std::string fit_bytes(const Graph& g, const FitOptions& opt) {
  const FitResult r = fit(g, opt);
  return dump(fit_result_json(r, g.ids())) + marginals_binary(r.q1);
}

CriterionResult invariants(Suite& suite) {
  CriterionResult out{8, "normalization-determinism", false, "", 0.0};
  InvariantReport report;
  for (const auto& run : suite.planted()) report.merge(run.fit.invariants);
  report.merge(suite.market().fit.invariants);
  const double worst = std::max({report.belief_norm, report.marginal_norm, report.pair_norm, report.gamma_norm});

  // repeated runs with the same seed, one thread
  const Graph g = Suite::planted_graph(0, nullptr);
  FitOptions opt;
  opt.k = kPlantedK;
  opt.seed = 11;
  opt.restarts = 3;
  const bool fit_same = fit_bytes(g, opt) == fit_bytes(g, opt);
  const auto p1 = louvain(g, LouvainOptions{1.0, 3});
  const auto p2 = louvain(g, LouvainOptions{1.0, 3});
  const bool louvain_same = partition_csv(p1.partition, g.ids()) == partition_csv(p2.partition, g.ids());

  out.passed = worst <= kNormTol && report.sweeps_checked > 0 && fit_same && louvain_same;
  out.detail = "max normalization error " + fmt(worst) + " over " + std::to_string(report.sweeps_checked) +
               " sweeps and " + std::to_string(report.m_steps_checked) + " M-steps (tol " + fmt(kNormTol) +
               "); repeated fit byte-identical: " + (fit_same ? "yes" : "no") +
               ", repeated louvain byte-identical: " + (louvain_same ? "yes" : "no");
  return out;
}

// --- 9: robustness across k -------------------------------------------------

CriterionResult robustness(Suite&) {
  CriterionResult out{9, "robustness-across-k", false, "", 0.0};
  MarketSpec spec;
  spec.age_blocks = kRobustBlocks;
  spec.degree_scale = kMarketDegreeScale;
  const SyntheticMarket market = restrict_to_lcc(make_market(kRobustN, spec, kMarketSeed));
  bool all_increasing = true;
  std::ostringstream detail;
  for (std::size_t k : {6, 8, 10, 12}) {
    FitOptions opt;
    opt.k = k;
    opt.seed = 0;
    opt.restarts = kRobustRestarts;
    const FitResult r = fit(market.graph, opt);
    const SubmarketMap map = pair_submarkets(r, market.attrs);
    const NodeSubmarkets nodes = map.for_nodes(r.assignment);
    std::vector<std::vector<double>> ages(map.count);
    for (NodeId i = 0; i < market.graph.node_count(); ++i) {
      if (nodes.of_node[i] != kNoSubmarket) ages[nodes.of_node[i]].push_back(market.attrs[i].age);
    }
    std::vector<double> medians;
    for (auto& a : ages) {
      std::sort(a.begin(), a.end());
      medians.push_back(a.empty() ? std::nan("") : quantile(a, 0.5));
    }
    bool increasing = map.count >= 1;
    for (std::size_t s = 1; s < medians.size(); ++s) {
      if (!(medians[s] > medians[s - 1])) increasing = false;
    }
    all_increasing = all_increasing && increasing;
    detail << (detail.tellp() > 0 ? "; " : "") << "k=" << k << ": " << map.count << " submarkets, medians";
    for (double m : medians) detail << ' ' << fmt(m, 3);
    if (!increasing) detail << " (not increasing)";
  }
  out.passed = all_increasing;
  out.detail = detail.str();
  return out;
}

using Criterion = std::function<CriterionResult(Suite&)>;

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options) {
  const std::vector<Criterion> all{tree_exactness,    planted_recovery,   mixed_structure,
                                   expected_degree,   modularity_oracle,  geographic,
                                   analysis_exactness, invariants,        robustness};
  Suite suite;
  std::vector<CriterionResult> results;
  for (std::size_t c = 0; c < all.size(); ++c) {
    const int id = static_cast<int>(c) + 1;
    if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), id) == options.only.end()) {
      continue;
    }
    const auto t0 = Clock::now();
    CriterionResult r;
    try {
      r = all[c](suite);
    } catch (const std::exception& e) {
      r.id = id;
      r.name = "criterion-" + std::to_string(id);
      r.passed = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = seconds_since(t0);
    if (options.progress) *options.progress << format_line(r) << std::endl;
    results.push_back(std::move(r));
  }
  return results;
}

std::string format_line(const CriterionResult& r) {
  std::ostringstream out;
  out << (r.passed ? "[PASS] " : "[FAIL] ") << r.id << ' ' << r.name << " (" << fmt(r.seconds, 3) << " s): " << r.detail;
  return out.str();
}

nlohmann::json acceptance_json(const std::vector<CriterionResult>& results) {
  nlohmann::json list = nlohmann::json::array();
  bool all = true;
  for (const auto& r : results) {
    list.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}, {"seconds", r.seconds}});
    all = all && r.passed;
  }
  return {{"passed", all}, {"criteria", list}};
}

}  // namespace submarket
