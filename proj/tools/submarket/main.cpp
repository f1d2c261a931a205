// submarket: command-line entry point.
//
// Exit status: 0 success, 1 usage error, 2 data error, 3 numerical error or
// failed acceptance run.

#include <omp.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "options.hpp"
#include "submarket/acceptance.hpp"
#include "submarket/analysis.hpp"
#include "submarket/edge_list.hpp"
#include "submarket/em.hpp"
#include "submarket/errors.hpp"
#include "submarket/figures.hpp"
#include "submarket/io.hpp"
#include "submarket/modularity.hpp"
#include "submarket/oracle.hpp"
#include "submarket/pairing.hpp"
#include "submarket/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace submarket::cli {
namespace {

constexpr const char* kVersion = "1.0.0";

struct Globals {
  std::string config;
  int threads = 1;
};

std::istringstream open_text(const std::string& path) { return std::istringstream(read_file(path)); }

std::string with_suffix(const std::string& path, const std::string& suffix) {
  const fs::path p(path);
  fs::path out = p.parent_path() / p.stem();
  out += suffix;
  out += p.extension();
  return out.string();
}

SelfLoopPolicy parse_self_loops(const std::string& s) {
  return s == "internal" ? SelfLoopPolicy::internal : SelfLoopPolicy::drop;
}

std::string canonical_edges(const Graph& g) {
  std::ostringstream out;
  write_edge_list(out, g);
  return out.str();
}

std::vector<std::uint32_t> read_assignments(const json& assignments, std::vector<std::string>& ids) {
  std::vector<std::uint32_t> labels;
  for (const auto& [id, c] : assignments.items()) {
    ids.push_back(id);
    labels.push_back(c.get<std::uint32_t>());
  }
  return labels;
}

// --- ingest ---------------------------------------------------------------

struct IngestConfig {
  std::string input, output, dedup = "sum", self_loops = "drop";
  bool weighted = false, lcc = false;
};

void add_ingest(OptionSet& o, IngestConfig& c) {
  o.need(o.add("input", c.input, "Tab-separated edge list"));
  o.need(o.add("output", c.output, "Canonical edge list to write"));
  o.flag("weighted", c.weighted, "Accept a third weight column");
  o.add("dedup", c.dedup, "Duplicate pairs: sum or error")->check(CLI::IsMember({"sum", "error"}));
  o.add("self-loops", c.self_loops, "Self-loops: drop or internal")->check(CLI::IsMember({"drop", "internal"}));
  o.flag("lcc", c.lcc, "Keep only the largest connected component");
}

std::vector<std::string> run_ingest(const IngestConfig& c) {
  EdgeListOptions opt;
  opt.weighted = c.weighted;
  opt.dedup = c.dedup == "error" ? DuplicatePolicy::error : DuplicatePolicy::sum;
  opt.self_loops = parse_self_loops(c.self_loops);
  LoadedGraph loaded = load_edge_list_file(c.input, opt);
  Graph g = std::move(loaded.graph);
  const std::size_t before = g.node_count();
  if (c.lcc) g = std::move(largest_connected_component(g).graph);
  write_file_atomic(c.output, canonical_edges(g));
  std::cout << "ingest: " << g.node_count() << " nodes, " << g.edge_count() << " edges";
  if (c.lcc) std::cout << " (largest component of " << before << " nodes)";
  std::cout << "; " << loaded.self_loops_dropped << " self-loops dropped, " << loaded.duplicates_merged
            << " duplicates merged\n";
  for (const auto& w : loaded.warnings) std::cout << "warning: " << w << '\n';
  return {c.output};
}

// --- aggregate ------------------------------------------------------------

struct AggregateConfig {
  std::string input, output;
};

void add_aggregate(OptionSet& o, AggregateConfig& c) {
  o.need(o.add("input", c.input, "Two-column TSV of region codes, one interaction per line"));
  o.need(o.add("output", c.output, "Weighted region graph to write"));
}

std::vector<std::string> run_aggregate(const AggregateConfig& c) {
  auto in = open_text(c.input);
  const RegionInteractionLog log = load_region_log(in);
  const Graph g = aggregate_by_region(log);
  write_file_atomic(c.output, canonical_edges(g));
  std::cout << "aggregate: " << log.records.size() << " records, " << g.node_count() << " regions, "
            << g.edge_count() << " region pairs\n";
  return {c.output};
}

// --- louvain --------------------------------------------------------------

struct LouvainConfig {
  std::string input, output, self_loops = "internal";
  double resolution = 1.0;
  std::uint64_t seed = 0;
};

void add_louvain(OptionSet& o, LouvainConfig& c) {
  o.need(o.add("input", c.input, "Edge list, optionally weighted"));
  o.need(o.add("output", c.output, "partition.csv (node_id,community)"));
  o.add("resolution", c.resolution, "Multiplier on the null-model term")->check(CLI::NonNegativeNumber);
  o.add("seed", c.seed, "Seed for the node visiting order");
  o.add("self-loops", c.self_loops, "Lines u<TAB>u: internal weight or drop")
      ->check(CLI::IsMember({"drop", "internal"}));
}

std::vector<std::string> run_louvain(const LouvainConfig& c) {
  EdgeListOptions opt;
  opt.weighted = true;
  opt.self_loops = parse_self_loops(c.self_loops);
  const Graph g = load_edge_list_file(c.input, opt).graph;
  LouvainOptions lo;
  lo.resolution = c.resolution;
  lo.seed = c.seed;
  const LouvainResult r = louvain(g, lo);
  write_file_atomic(c.output, partition_csv(r.partition, g.ids()));
  std::cout << "louvain: " << r.partition.k << " communities, Q = " << format_double(r.modularity) << " at resolution "
            << format_double(c.resolution) << ", " << r.level_modularity.size() << " levels\n";
  return {c.output};
}

// --- generate -------------------------------------------------------------

struct GenerateConfig {
  std::size_t n = 0, k = 0, market_blocks = 0;
  std::string params, degrees = "powerlaw", out, truth, mode = "simple", params_out, attributes, contacts;
  double ratio = 10.0, degree_scale = 1.0, exponent = 2.5;
  std::uint64_t seed = 0;
  bool lcc = false;
};

void add_generate(OptionSet& o, GenerateConfig& c) {
  o.need(o.add("n", c.n, "Number of nodes"));
  o.add("k", c.k, "Number of groups; taken from --params when omitted");
  o.add("params", c.params, "Block model parameters {k, gamma, omega}");
  o.add("ratio", c.ratio, "Within/between affinity ratio when --params is absent")->check(CLI::PositiveNumber);
  o.add("degree-scale", c.degree_scale, "Multiplier on the expected degrees when --params is absent")
      ->check(CLI::PositiveNumber);
  o.add("degrees", c.degrees, "powerlaw, or a file with one target degree per line");
  o.add("exponent", c.exponent, "Power-law exponent")->check(CLI::PositiveNumber);
  o.add("seed", c.seed, "Random seed");
  o.add("mode", c.mode, "simple or multigraph")->check(CLI::IsMember({"simple", "multigraph"}));
  o.need(o.add("out", c.out, "Edge list to write"));
  o.add("truth", c.truth, "Planted labels (node_id,group[,age_block])");
  o.add("params-out", c.params_out, "Write the parameters used");
  o.flag("lcc", c.lcc, "Keep only the largest connected component");
  o.add("market-blocks", c.market_blocks, "Generate a two-sex dating market with this many age blocks");
  o.add("attributes", c.attributes, "Market only: node attributes CSV");
  o.add("contacts", c.contacts, "Market only: first-contact log CSV");
}

std::vector<double> read_degrees(const std::string& path, std::size_t n) {
  auto in = open_text(path);
  std::vector<double> d;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    try {
      d.push_back(std::stod(line));
    } catch (const std::exception&) {
      throw ParseError(line_no, "expected a degree");
    }
    if (!(d.back() > 0.0)) throw ParseError(line_no, "degrees must be positive");
  }
  if (d.size() != n) throw DataError(path + ": " + std::to_string(d.size()) + " degrees for n = " + std::to_string(n));
  return d;
}

std::string contacts_csv(const SyntheticMarket& market, const Graph& second_draw, std::uint64_t seed,
                         const std::set<std::string>* keep) {
  // reciprocal interactions become replied first contacts sent by the man
  // (or either side for same-sex pairs); edges only in the second draw become
  // unreplied contacts in a random direction
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  const Graph& g = market.graph;
  std::set<std::pair<NodeId, NodeId>> core, seen;
  std::vector<Contact> records;
  for (const Edge& e : g.edges()) {
    core.insert({e.u, e.v});
    const Sex su = market.attrs[e.u].sex, sv = market.attrs[e.v].sex;
    bool u_sends = su != sv ? su == Sex::male : coin(rng);
    records.push_back(u_sends ? Contact{e.u, e.v, true} : Contact{e.v, e.u, true});
  }
  for (const Edge& e : second_draw.edges()) {
    if (core.count({e.u, e.v})) continue;
    records.push_back(coin(rng) ? Contact{e.u, e.v, false} : Contact{e.v, e.u, false});
  }
  std::ostringstream out;
  out << "sender,receiver,replied\n";
  for (const Contact& c : records) {
    if (!seen.insert({c.sender, c.receiver}).second) continue;
    if (keep && (!keep->count(g.id(c.sender)) || !keep->count(g.id(c.receiver)))) continue;
    out << g.id(c.sender) << ',' << g.id(c.receiver) << ',' << (c.replied ? 1 : 0) << '\n';
  }
  return out.str();
}

std::vector<std::string> run_market(const GenerateConfig& c) {
  if (!c.params.empty()) throw UsageError("--market-blocks builds its own parameters; drop --params");
  MarketSpec spec;
  spec.age_blocks = c.market_blocks;
  spec.degree_scale = c.degree_scale;
  const SyntheticMarket full = make_market(c.n, spec, c.seed);
  const SyntheticMarket market = c.lcc ? restrict_to_lcc(full) : full;
  std::vector<std::string> written{c.out};
  write_file_atomic(c.out, canonical_edges(market.graph));
  if (!c.truth.empty()) {
    std::ostringstream t;
    t << "node_id,group,age_block\n";
    for (NodeId i = 0; i < market.graph.node_count(); ++i) {
      t << market.graph.id(i) << ',' << market.planted.labels[i] << ',' << market.age_block[i] << '\n';
    }
    write_file_atomic(c.truth, t.str());
    written.push_back(c.truth);
  }
  if (!c.params_out.empty()) {
    write_file_atomic(c.params_out, dump(to_json(market.truth)));
    written.push_back(c.params_out);
  }
  if (!c.attributes.empty()) {
    std::ostringstream a;
    write_attributes(a, market.attrs, market.graph.ids());
    write_file_atomic(c.attributes, a.str());
    written.push_back(c.attributes);
  }
  if (!c.contacts.empty()) {
    const Graph second = generate(c.n, full.truth, full.target_degrees, c.seed + 1).graph;
    std::set<std::string> keep(market.graph.ids().begin(), market.graph.ids().end());
    write_file_atomic(c.contacts, contacts_csv(full, second, c.seed + 2, c.lcc ? &keep : nullptr));
    written.push_back(c.contacts);
  }
  std::cout << "generate: market with " << c.market_blocks << " age blocks, " << market.graph.node_count()
            << " nodes, " << market.graph.edge_count() << " edges\n";
  return written;
}

std::vector<std::string> run_generate(const GenerateConfig& c) {
  if (c.n == 0) throw UsageError("--n must be positive");
  if (c.market_blocks > 0) return run_market(c);
  if (!c.attributes.empty() || !c.contacts.empty()) throw UsageError("--attributes and --contacts need --market-blocks");

  const std::vector<double> degrees =
      c.degrees == "powerlaw" ? powerlaw_degrees(c.n, c.seed, c.exponent) : read_degrees(c.degrees, c.n);
  BlockModelParams params;
  if (!c.params.empty()) {
    params = load_params_file(c.params);
    if (c.k != 0 && c.k != params.k()) {
      throw DataError("--k " + std::to_string(c.k) + " does not match k = " + std::to_string(params.k()) + " in " +
                      c.params);
    }
  } else {
    if (c.k == 0) throw UsageError("give --params or --k");
    params = affinity_params(assortative_affinity(c.k, c.ratio), std::vector<double>(c.k, 1.0 / c.k), degrees,
                             c.degree_scale);
  }
  GenerateOptions opt;
  opt.mode = c.mode == "multigraph" ? GenerateMode::multigraph : GenerateMode::simple;
  // seed + 1 so the degree draw and the edge draw use different streams
  GeneratedGraph gen = generate(c.n, params, degrees, c.seed + 1, opt);
  Graph g = std::move(gen.graph);
  std::vector<NodeId> to_parent;
  if (c.lcc) {
    Subgraph sub = largest_connected_component(g);
    g = std::move(sub.graph);
    to_parent = std::move(sub.to_parent);
  }
  std::vector<std::string> written{c.out};
  write_file_atomic(c.out, canonical_edges(g));
  if (!c.truth.empty()) {
    std::ostringstream t;
    t << "node_id,group\n";
    for (NodeId i = 0; i < g.node_count(); ++i) {
      t << g.id(i) << ',' << gen.planted.labels[c.lcc ? to_parent[i] : i] << '\n';
    }
    write_file_atomic(c.truth, t.str());
    written.push_back(c.truth);
  }
  if (!c.params_out.empty()) {
    write_file_atomic(c.params_out, dump(to_json(params)));
    written.push_back(c.params_out);
  }
  std::cout << "generate: " << g.node_count() << " nodes, " << g.edge_count() << " edges, k = " << params.k() << '\n';
  return written;
}

// --- fit-sbm --------------------------------------------------------------

struct FitConfig {
  std::vector<std::size_t> k{2};
  int restarts = 10, max_sweeps = 500, max_em_iters = 100, max_stalled = 3;
  std::uint64_t seed = 0;
  double bp_tol = 1e-6, em_tol = 1e-6, damping = 0.1, damping_step = 0.1, max_damping = 0.3, init_jitter = 0.5, partner_contrast = 3.0;
  bool strict_pairs = false, lcc = false;
  std::string input, out, marginals, partition;
};

void add_fit(OptionSet& o, FitConfig& c) {
  o.add("k", c.k, "Number of groups; a comma-separated list fits each")->delimiter(',');
  o.add("restarts", c.restarts, "EM restarts per k")->check(CLI::PositiveNumber);
  o.add("seed", c.seed, "Random seed");
  o.add("bp-tol", c.bp_tol, "BP convergence threshold on message change")->check(CLI::PositiveNumber);
  o.add("em-tol", c.em_tol, "EM convergence threshold on relative parameter change")->check(CLI::PositiveNumber);
  o.add("damping", c.damping, "Weight kept on old messages")->check(CLI::Range(0.0, 0.99));
  o.add("damping-step", c.damping_step, "Damping increase after an unconverged E-step")->check(CLI::Range(0.0, 0.99));
  o.add("max-damping", c.max_damping, "Upper limit for the increased damping")->check(CLI::Range(0.0, 0.99));
  o.add("max-sweeps", c.max_sweeps, "BP sweeps per E-step")->check(CLI::PositiveNumber);
  o.add("max-em-iters", c.max_em_iters, "EM iterations per restart")->check(CLI::PositiveNumber);
  o.add("max-stalled", c.max_stalled, "Stop a restart after this many unconverged E-steps in a row (0: never)")
      ->check(CLI::NonNegativeNumber);
  o.add("init-jitter", c.init_jitter, "Relative jitter of the starting omega")->check(CLI::NonNegativeNumber);
  o.add("partner-contrast", c.partner_contrast, "Initial boost of omega between random partner groups")
      ->check(CLI::PositiveNumber);
  o.flag("strict-pairs", c.strict_pairs, "Include the Poisson factor in two-node marginals");
  o.flag("lcc", c.lcc, "Fit only the largest connected component");
  o.need(o.add("input", c.input, "Simple unweighted edge list"));
  o.need(o.add("out", c.out, "result.json"));
  o.add("marginals", c.marginals, "Binary n x k marginals (float64, little-endian, row-major)");
  o.add("partition", c.partition, "Hard assignment as node_id,community CSV");
}

std::vector<std::string> run_fit(const FitConfig& c, int threads) {
  if (c.k.empty()) throw UsageError("--k needs at least one value");
  Graph g = load_edge_list_file(c.input).graph;
  if (c.lcc) g = std::move(largest_connected_component(g).graph);
  std::vector<std::string> written;
  for (std::size_t k : c.k) {
    if (k == 0) throw UsageError("--k values must be positive");
    FitOptions opt;
    opt.k = k;
    opt.restarts = c.restarts;
    opt.seed = c.seed;
    opt.bp_tol = c.bp_tol;
    opt.em_tol = c.em_tol;
    opt.damping = c.damping;
    opt.damping_step = c.damping_step;
    opt.max_damping = c.max_damping;
    opt.max_sweeps = c.max_sweeps;
    opt.max_em_iters = c.max_em_iters;
    opt.max_stalled_e_steps = c.max_stalled;
    opt.init_jitter = c.init_jitter;
    opt.partner_contrast = c.partner_contrast;
    opt.strict_pair_marginals = c.strict_pairs;
    opt.schedule = threads > 1 ? BpSchedule::parallel : BpSchedule::sequential;
    const FitResult r = fit(g, opt);

    const bool many = c.k.size() > 1;
    const std::string suffix = ".k" + std::to_string(k);
    const std::string out = many ? with_suffix(c.out, suffix) : c.out;
    std::string marginals;
    if (!c.marginals.empty()) {
      marginals = many ? with_suffix(c.marginals, suffix) : c.marginals;
      write_file_atomic(marginals, marginals_binary(r.q1));
      written.push_back(marginals);
    }
    if (!c.partition.empty()) {
      const std::string path = many ? with_suffix(c.partition, suffix) : c.partition;
      write_file_atomic(path, partition_csv(r.assignment, g.ids()));
      written.push_back(path);
    }
    write_file_atomic(out, dump(fit_result_json(r, g.ids(), marginals)));
    written.push_back(out);

    std::cout << "fit-sbm k=" << k << ": objective " << format_double(r.objective) << ", "
              << (r.converged ? "converged" : "not converged") << ", best restart " << r.best_restart << " of "
              << r.restarts.size() << ", group sizes";
    for (auto s : r.assignment.sizes()) std::cout << ' ' << s;
    std::cout << '\n';
  }
  return written;
}

// --- oracle ---------------------------------------------------------------

struct OracleConfig {
  std::string input, params, out, marginals, model = "joint";
  double max_states = 1e7;
};

void add_oracle(OptionSet& o, OracleConfig& c) {
  o.need(o.add("input", c.input, "Small edge list"));
  o.need(o.add("params", c.params, "Block model parameters {k, gamma, omega}"));
  o.add("model", c.model, "joint (the block model posterior) or bp (the tree BP fixed point)")
      ->check(CLI::IsMember({"joint", "bp"}));
  o.add("max-states", c.max_states, "Refuse to enumerate more than this many assignments")
      ->check(CLI::PositiveNumber);
  o.need(o.add("out", c.out, "posterior.json with one- and two-node marginals"));
  o.add("marginals", c.marginals, "Binary n x k marginals (float64, little-endian, row-major)");
}

std::vector<std::string> run_oracle(const OracleConfig& c) {
  EdgeListOptions eo;
  eo.weighted = true;
  const Graph g = load_edge_list_file(c.input, eo).graph;
  const BlockModelParams params = load_params_file(c.params);
  ExactPosteriorOptions opt;
  opt.model = c.model == "bp" ? PosteriorModel::bp_fixed_point : PosteriorModel::joint;
  opt.max_states = c.max_states;
  const ExactPosterior post = exact_posterior(g, params, opt);
  if (!post.field_converged) throw NumericalError("oracle: self-consistent field did not converge");
  std::vector<std::string> written{c.out};
  write_file_atomic(c.out, dump(posterior_json(post, g)));
  if (!c.marginals.empty()) {
    write_file_atomic(c.marginals, marginals_binary(post.q1));
    written.push_back(c.marginals);
  }
  std::cout << "oracle: enumerated " << format_double(post.states) << " assignments\n";
  return written;
}

// --- pair -----------------------------------------------------------------

struct PairConfig {
  std::string fit, attributes, input, out, summary;
};

void add_pair(OptionSet& o, PairConfig& c) {
  o.need(o.add("fit", c.fit, "result.json from fit-sbm"));
  o.need(o.add("attributes", c.attributes, "Node attributes CSV"));
  o.add("input", c.input, "Edge list whose node order the output follows (default: sorted ids)");
  o.need(o.add("out", c.out, "submarkets.csv (node_id,community,submarket)"));
  o.add("summary", c.summary, "JSON with the community to submarket map");
}

std::vector<std::string> run_pair(const PairConfig& c) {
  json result;
  try {
    result = json::parse(read_file(c.fit));
  } catch (const json::exception& e) {
    throw DataError(c.fit + ": " + e.what());
  }
  const BlockModelParams params = params_from_json(result);
  if (!result.contains("assignments") || !result["assignments"].is_object()) {
    throw DataError(c.fit + ": missing assignments");
  }
  std::vector<std::string> ids;
  std::vector<std::uint32_t> labels = read_assignments(result["assignments"], ids);
  if (!c.input.empty()) {
    EdgeListOptions eo;
    eo.weighted = true;
    const Graph g = load_edge_list_file(c.input, eo).graph;
    std::unordered_map<std::string, std::uint32_t> by_id;
    for (std::size_t i = 0; i < ids.size(); ++i) by_id.emplace(ids[i], labels[i]);
    std::vector<std::string> ordered;
    std::vector<std::uint32_t> ordered_labels;
    for (const auto& id : g.ids()) {
      const auto it = by_id.find(id);
      if (it == by_id.end()) throw DataError("node " + id + " of " + c.input + " has no assignment");
      ordered.push_back(id);
      ordered_labels.push_back(it->second);
    }
    ids = std::move(ordered);
    labels = std::move(ordered_labels);
  }
  const Partition assignment = Partition::with_groups(std::move(labels), static_cast<std::uint32_t>(params.k()));
  auto attrs_in = open_text(c.attributes);
  const AttributeTable attrs = load_attributes(attrs_in, ids);
  const SubmarketMap map = pair_submarkets(params, assignment, attrs);
  std::vector<std::string> written{c.out};
  write_file_atomic(c.out, submarkets_csv(assignment, map, ids));
  if (!c.summary.empty()) {
    json of = json::array();
    for (auto s : map.of_community) of.push_back(s == kNoSubmarket ? json(nullptr) : json(s));
    write_file_atomic(c.summary, dump({{"submarkets", map.count}, {"of_community", of}, {"warnings", map.warnings}}));
    written.push_back(c.summary);
  }
  std::cout << "pair: " << map.count << " submarkets from " << params.k() << " communities\n";
  for (const auto& w : map.warnings) std::cout << "warning: " << w << '\n';
  return written;
}

// --- analyze --------------------------------------------------------------

struct AnalyzeConfig {
  std::string submarkets, attributes, contacts, input, out_dir;
  std::string reference_ethnicity = "white", reference_sex = "female";
  std::string age_weighting = "users", gap_weighting = "messages";
  std::size_t min_count = 10, min_messages = 20;
  bool pooled = false;
};

void add_analyze(OptionSet& o, AnalyzeConfig& c) {
  o.need(o.add("submarkets", c.submarkets, "submarkets.csv from pair"));
  o.need(o.add("attributes", c.attributes, "Node attributes CSV"));
  o.add("contacts", c.contacts, "First-contact log (sender,receiver,replied); enables fig3 and fig4");
  o.add("input", c.input, "Interaction graph; enables the graph within-fraction and interaction weighting");
  o.need(o.add("out-dir", c.out_dir, "Directory for fig*.csv, fig*.json and summary.json"));
  o.add("reference-ethnicity", c.reference_ethnicity, "Reference group for relative ages");
  o.add("reference-sex", c.reference_sex, "Sex compared in relative ages");
  o.add("age-weighting", c.age_weighting, "Relative ages over users or interactions")
      ->check(CLI::IsMember({"users", "interactions"}));
  o.add("gap-weighting", c.gap_weighting, "Age gaps averaged over messages or senders")
      ->check(CLI::IsMember({"messages", "senders"}));
  o.add("min-count", c.min_count, "Members below which a cell is flagged low-support");
  o.add("min-messages", c.min_messages, "Messages below which a mixing cell is flagged low-support");
  o.flag("pooled", c.pooled, "Age quantiles with both sexes pooled");
}

struct LoadedSubmarkets {
  std::vector<std::string> ids;
  NodeSubmarkets sub;
};

LoadedSubmarkets load_submarkets(const std::string& path) {
  auto in = open_text(path);
  LoadedSubmarkets out;
  std::string line;
  std::size_t line_no = 0;
  std::uint32_t max_label = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "node_id,community,submarket") throw ParseError(1, "expected header node_id,community,submarket");
      continue;
    }
    std::stringstream row(line);
    std::string id, community, submarket;
    if (!std::getline(row, id, ',') || !std::getline(row, community, ',') || !std::getline(row, submarket)) {
      throw ParseError(line_no, "expected node_id,community,submarket");
    }
    std::uint32_t s = 0;
    try {
      const unsigned long v = std::stoul(submarket);
      s = static_cast<std::uint32_t>(v);
    } catch (const std::exception&) {
      throw ParseError(line_no, "bad submarket '" + submarket + "'");
    }
    out.ids.push_back(id);
    out.sub.of_node.push_back(s);
    if (s != kNoSubmarket) max_label = std::max(max_label, s + 1);
  }
  out.sub.count = max_label;
  return out;
}

std::vector<std::string> run_analyze(const AnalyzeConfig& c) {
  const LoadedSubmarkets loaded = load_submarkets(c.submarkets);
  const auto& ids = loaded.ids;
  const NodeSubmarkets& sub = loaded.sub;
  auto attrs_in = open_text(c.attributes);
  const AttributeTable attrs = load_attributes(attrs_in, ids);
  const Ethnicity reference = parse_ethnicity(c.reference_ethnicity);
  const Sex sex = parse_sex(c.reference_sex);
  if (c.age_weighting == "interactions" && c.input.empty()) throw UsageError("--age-weighting interactions needs --input");

  std::optional<Graph> graph;
  if (!c.input.empty()) {
    EdgeListOptions eo;
    eo.weighted = true;
    eo.self_loops = SelfLoopPolicy::internal;
    const Graph loaded_graph = load_edge_list_file(c.input, eo).graph;
    // reorder onto the submarket file's node order
    std::unordered_map<std::string, NodeId> index;
    for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], static_cast<NodeId>(i));
    std::vector<Edge> edges;
    std::vector<double> internal(ids.size(), 0.0);
    auto lookup = [&](NodeId i) {
      const auto it = index.find(loaded_graph.id(i));
      if (it == index.end()) throw DataError("graph node " + loaded_graph.id(i) + " has no submarket");
      return it->second;
    };
    for (const Edge& e : loaded_graph.edges()) edges.push_back({lookup(e.u), lookup(e.v), e.weight});
    for (NodeId i = 0; i < loaded_graph.node_count(); ++i) internal[lookup(i)] += loaded_graph.internal_weight(i);
    graph = Graph::from_edges(ids.size(), std::move(edges), std::move(internal), ids);
  }

  const fs::path dir(c.out_dir);
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::string& content) {
    const fs::path p = dir / name;
    write_file_atomic(p, content);
    written.push_back(p.string());
  };

  const AgeQuantiles q = age_quantiles(sub, attrs, !c.pooled, c.min_count);
  emit("fig2a.csv", fig2a_csv(q));
  emit("fig2a.json", dump(fig2a_json(q)));
  const SexRatios ratios = sex_ratio(sub, attrs);
  emit("fig2b.csv", fig2b_csv(ratios));
  emit("fig2b.json", dump(fig2b_json(ratios)));
  const RelativeAges rel =
      relative_minority_age(sub, attrs, reference, sex, c.min_count,
                            c.age_weighting == "interactions" ? AgeWeighting::interactions : AgeWeighting::users,
                            graph ? &*graph : nullptr);
  emit("fig2c.csv", fig2c_csv(rel));
  emit("fig2c.json", dump(fig2c_json(rel)));

  json summary = {{"nodes", ids.size()}, {"submarkets", sub.count}};
  if (graph) {
    summary["within_fraction_graph"] = within_fraction(*graph, sub);
  }
  if (!c.contacts.empty()) {
    auto contacts_in = open_text(c.contacts);
    std::size_t skipped = 0;
    const ContactLog log = load_contacts(contacts_in, ids, &skipped);
    summary["contacts"] = log.size();
    summary["contacts_skipped"] = skipped;
    if (!log.empty()) summary["within_fraction_contacts"] = within_fraction(log, sub);
    const GapWeighting gw = c.gap_weighting == "senders" ? GapWeighting::senders : GapWeighting::messages;
    const std::vector<AgeGapMatrix> gaps{
        age_gap_matrix(log, attrs, sub, ContactStage::sent, Direction::male_to_female, gw),
        age_gap_matrix(log, attrs, sub, ContactStage::replied, Direction::male_to_female, gw)};
    const std::vector<ContactStage> stages{ContactStage::sent, ContactStage::replied};
    emit("fig3.csv", fig3_csv(gaps, stages));
    emit("fig3.json", dump(fig3_json(gaps, stages)));
    const std::vector<MixingMatrices> mix{
        mixing_matrix(log, attrs, sub, Direction::male_to_female, c.min_messages),
        mixing_matrix(log, attrs, sub, Direction::female_to_male, c.min_messages)};
    const std::vector<Direction> dirs{Direction::male_to_female, Direction::female_to_male};
    emit("fig4.csv", fig4_csv(mix, dirs));
    emit("fig4.json", dump(fig4_json(mix, dirs)));
  }
  emit("summary.json", dump(summary));

  std::cout << "analyze: " << sub.count << " submarkets, " << ids.size() << " nodes";
  if (summary.contains("within_fraction_graph")) {
    std::cout << ", within-submarket interactions " << format_double(summary["within_fraction_graph"].get<double>());
  }
  if (summary.contains("within_fraction_contacts")) {
    std::cout << ", within-submarket first contacts "
              << format_double(summary["within_fraction_contacts"].get<double>());
  }
  std::cout << '\n';
  for (const auto& w : q.warnings) std::cout << "warning: " << w << '\n';
  for (const auto& w : ratios.warnings) std::cout << "warning: " << w << '\n';
  for (const auto& w : rel.warnings) std::cout << "warning: " << w << '\n';
  return written;
}

// --- repro-synthetic ------------------------------------------------------

struct ReproConfig {
  std::string out;
  std::vector<int> only;
};

void add_repro(OptionSet& o, ReproConfig& c) {
  o.need(o.add("out", c.out, "Report JSON"));
  o.add("only", c.only, "Run only these criteria (comma-separated ids)")->delimiter(',');
}

int run_repro(const ReproConfig& c) {
  AcceptanceOptions opt;
  opt.only = c.only;
  opt.progress = &std::cout;
  const auto results = run_acceptance(opt);
  write_file_atomic(c.out, dump(acceptance_json(results)));
  const bool ok = std::all_of(results.begin(), results.end(), [](const CriterionResult& r) { return r.passed; });
  std::cout << (ok ? "all criteria passed" : "some criteria failed") << '\n';
  return ok ? 0 : 3;
}

// --- driver ---------------------------------------------------------------

json load_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw DataError("config " + path + ": " + e.what());
  }
  if (!j.is_object()) throw DataError("config " + path + ": expected a JSON object");
  return j;
}

int run(int argc, char** argv) {
  CLI::App app{"Dating-market submarket detection: graph ingestion, modularity, block-model inference, analysis",
               "submarket"};
  app.option_defaults()->always_capture_default();
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  Globals globals;
  OptionSet root(&app);
  root.add("config", globals.config, "JSON config file; flags and SUBMARKET_* variables take precedence");
  root.add("threads", globals.threads, "OpenMP threads; more than 1 selects the parallel BP schedule")
      ->check(CLI::PositiveNumber);

  struct Command {
    CLI::App* app;
    std::unique_ptr<OptionSet> options;
  };
  std::map<std::string, Command> commands;
  auto command = [&](const std::string& name, const std::string& help) -> OptionSet& {
    CLI::App* sub = app.add_subcommand(name, help);
    auto& cmd = commands[name] = Command{sub, std::make_unique<OptionSet>(sub)};
    return *cmd.options;
  };

  IngestConfig ingest;
  AggregateConfig aggregate;
  LouvainConfig louvain_cfg;
  GenerateConfig generate_cfg;
  FitConfig fit_cfg;
  OracleConfig oracle;
  PairConfig pair;
  AnalyzeConfig analyze;
  ReproConfig repro;
  add_ingest(command("ingest", "Normalize an edge list"), ingest);
  add_aggregate(command("aggregate", "Aggregate region-pair interactions into a weighted graph"), aggregate);
  add_louvain(command("louvain", "Modularity communities (Louvain)"), louvain_cfg);
  add_generate(command("generate", "Sample a degree-corrected block model graph"), generate_cfg);
  add_fit(command("fit-sbm", "Fit the degree-corrected block model by EM with belief propagation"), fit_cfg);
  add_oracle(command("oracle", "Exact posterior marginals by enumeration"), oracle);
  add_pair(command("pair", "Pair male and female communities into submarkets"), pair);
  add_analyze(command("analyze", "Submarket statistics (fig2a-fig4 tables)"), analyze);
  add_repro(command("repro-synthetic", "Run the synthetic acceptance suite"), repro);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code == 0) return 0;
    const CLI::App* failed = &app;
    for (const auto& [n, cmd] : commands) {
      if (cmd.app->parsed()) failed = cmd.app;
    }
    std::cerr << '\n' << failed->help();
    return 1;
  }

  std::string name;
  for (const auto& [n, cmd] : commands) {
    if (cmd.app->parsed()) name = n;
  }
  OptionSet& options = *commands.at(name).options;

  try {
    if (!globals.config.empty()) {
      const json config = load_config(globals.config);
      for (const auto& [key, value] : config.items()) {
        if (value.is_object() && !commands.count(key)) throw UsageError("config: unknown section '" + key + "'");
      }
      root.apply_config(config, false);
      options.apply_config(config, false);
      if (config.contains(name)) options.apply_config(config[name], true);
    }
    options.check_required();
  } catch (const CLI::Error& e) {
    std::cerr << "config: " << e.what() << '\n';
    return 1;
  }

  omp_set_num_threads(globals.threads);
  json echo = {{"subcommand", name}, {"version", kVersion}, {"threads", globals.threads}, {"options", options.echo()}};
  if (!globals.config.empty()) echo["config"] = globals.config;

  std::vector<std::string> outputs;
  int status = 0;
  if (name == "ingest") outputs = run_ingest(ingest);
  if (name == "aggregate") outputs = run_aggregate(aggregate);
  if (name == "louvain") outputs = run_louvain(louvain_cfg);
  if (name == "generate") outputs = run_generate(generate_cfg);
  if (name == "fit-sbm") outputs = run_fit(fit_cfg, globals.threads);
  if (name == "oracle") outputs = run_oracle(oracle);
  if (name == "pair") outputs = run_pair(pair);
  if (name == "analyze") outputs = run_analyze(analyze);
  if (name == "repro-synthetic") {
    status = run_repro(repro);
    outputs = {repro.out};
  }
  // the resolved configuration is written next to the primary output
  std::string primary;
  if (name == "ingest") primary = ingest.output;
  if (name == "aggregate") primary = aggregate.output;
  if (name == "louvain") primary = louvain_cfg.output;
  if (name == "generate") primary = generate_cfg.out;
  if (name == "fit-sbm") primary = fit_cfg.out;
  if (name == "oracle") primary = oracle.out;
  if (name == "pair") primary = pair.out;
  if (name == "repro-synthetic") primary = repro.out;
  const std::string echo_path =
      name == "analyze" ? (fs::path(analyze.out_dir) / "run.config.json").string() : primary + ".config.json";
  write_file_atomic(echo_path, dump(echo));
  outputs.push_back(echo_path);
  std::cout << "wrote";
  for (const auto& path : outputs) std::cout << ' ' << path;
  std::cout << "\nrun config: " << echo.dump() << '\n';
  return status;
}

}  // namespace
}  // namespace submarket::cli

int main(int argc, char** argv) {
  using namespace submarket;
  try {
    return cli::run(argc, argv);
  } catch (const cli::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\nrun with --help for usage\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
