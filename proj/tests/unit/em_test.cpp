#include <doctest.h>

#include <cmath>

#include <omp.h>

#include "helpers.hpp"
#include "submarket/em.hpp"
#include "submarket/errors.hpp"
#include "submarket/figures.hpp"
#include "submarket/metrics.hpp"
#include "submarket/synthetic.hpp"

using namespace submarket;

namespace {

GeneratedGraph planted(const Matrix& affinity, std::size_t n, std::uint64_t seed) {
  const std::vector<double> degrees(n, 10.0);
  const std::size_t k = affinity.rows();
  const auto p = affinity_params(affinity, std::vector<double>(k, 1.0 / double(k)), degrees);
  return generate(n, p, degrees, seed);
}

double accuracy(const GeneratedGraph& gg, const FitResult& r) {
  return aligned_accuracy(gg.planted.labels, gg.planted.k, r.assignment.labels, r.assignment.k);
}

}  // namespace

TEST_CASE("initial parameters") {
  const Graph g = testing::two_triangles();
  const auto flat = initial_params(g, 1, 0.5, 3);
  CHECK(flat.gamma == std::vector<double>{1.0});
  CHECK(flat.omega(0, 0) == doctest::Approx(1.0 / (2.0 * g.total_weight())).epsilon(1e-15));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = initial_params(g, 4, 0.5, seed, 3.0);
    CHECK_NOTHROW(p.validate());
    for (double w : p.omega.data()) CHECK(w > 0.0);
  }
  CHECK(initial_params(g, 3, 0.5, 7, 3.0) == initial_params(g, 3, 0.5, 7, 3.0));
  CHECK(!(initial_params(g, 3, 0.5, 7, 3.0) == initial_params(g, 3, 0.5, 8, 3.0)));
}

TEST_CASE("parameter change and hard assignment") {
  BlockModelParams a{{0.5, 0.5}, Matrix(2, 2, 0.2)};
  BlockModelParams b = a;
  CHECK(parameter_change(a, b) == 0.0);
  b.gamma = {0.6, 0.4};
  CHECK(parameter_change(a, b) == doctest::Approx(0.1));
  b = a;
  b.omega(1, 1) = 0.3;
  CHECK(parameter_change(a, b) == doctest::Approx(0.1 / 0.3));

  Matrix q(3, 3);
  q(0, 2) = 0.7;
  q(0, 0) = 0.3;
  q(1, 0) = q(1, 1) = 0.5;
  q(2, 1) = 1.0;
  const auto h = hard_assignment(q);
  CHECK(h.labels == std::vector<std::uint32_t>{2, 0, 1});
  CHECK(h.k == 3);
}

TEST_CASE("one group converges in one iteration") {
  const auto gg = planted(assortative_affinity(2, 5.0), 300, 1);
  FitOptions opt;
  opt.k = 1;
  opt.restarts = 2;
  const auto r = fit(gg.graph, opt);
  CHECK(r.converged);
  CHECK(r.history.size() == 1);
  CHECK(r.params.gamma == std::vector<double>{1.0});
  CHECK(r.params.omega(0, 0) == doctest::Approx(1.0 / (2.0 * gg.graph.total_weight())).epsilon(1e-14));
  for (auto l : r.assignment.labels) CHECK(l == 0);
}

TEST_CASE("assortative planted partition is recovered") {
  const auto gg = planted(assortative_affinity(2, 10.0), 500, 4);
  FitOptions opt;
  opt.k = 2;
  opt.restarts = 5;
  opt.seed = 2;
  opt.track_invariants = true;
  const auto r = fit(gg.graph, opt);
  CHECK(accuracy(gg, r) >= 0.98);
  CHECK(r.params.omega(0, 0) > r.params.omega(0, 1));
  CHECK(r.params.omega(1, 1) > r.params.omega(0, 1));
  CHECK(r.invariants.belief_norm <= 1e-10);
  CHECK(r.invariants.marginal_norm <= 1e-10);
  CHECK(r.invariants.pair_norm <= 1e-10);
  CHECK(r.invariants.gamma_norm <= 1e-10);
  CHECK(r.invariants.sweeps_checked > 0);
  CHECK(r.invariants.m_steps_checked > 0);
}

TEST_CASE("disassortative planted partition is recovered") {
  Matrix affinity(2, 2, 10.0);
  affinity(0, 0) = affinity(1, 1) = 1.0;
  const auto gg = planted(affinity, 500, 6);
  FitOptions opt;
  opt.k = 2;
  opt.restarts = 5;
  const auto r = fit(gg.graph, opt);
  CHECK(accuracy(gg, r) >= 0.98);
  CHECK(r.params.omega(0, 1) > r.params.omega(0, 0));
  CHECK(r.params.omega(0, 1) > r.params.omega(1, 1));
}

TEST_CASE("the selected restart has the best objective in its tier") {
  const auto gg = planted(assortative_affinity(3, 6.0), 400, 9);
  FitOptions opt;
  opt.k = 3;
  opt.restarts = 6;
  opt.seed = 5;
  const auto r = fit(gg.graph, opt);
  REQUIRE(r.restarts.size() == 6);
  const auto& chosen = r.restarts[static_cast<std::size_t>(r.best_restart)];
  CHECK(!chosen.degenerate);
  CHECK(r.objective == chosen.objective);
  for (const auto& s : r.restarts) {
    if (s.degenerate) continue;
    if (s.stalled == chosen.stalled) CHECK(s.objective <= chosen.objective);
    if (chosen.stalled) CHECK(s.stalled);
  }
}

TEST_CASE("fits are deterministic") {
  const auto gg = planted(assortative_affinity(2, 6.0), 400, 12);
  FitOptions opt;
  opt.restarts = 3;
  opt.seed = 21;
  const auto a = fit(gg.graph, opt);
  const auto b = fit(gg.graph, opt);
  CHECK(fit_result_json(a, gg.graph.ids()).dump() == fit_result_json(b, gg.graph.ids()).dump());
  CHECK(a.q1 == b.q1);
  opt.seed = 22;
  const auto c = fit(gg.graph, opt);
  CHECK(c.restarts.size() == 3);
}

TEST_CASE("parallel fits do not depend on the thread count") {
  const auto gg = planted(assortative_affinity(2, 6.0), 600, 13);
  FitOptions opt;
  opt.restarts = 2;
  opt.schedule = BpSchedule::parallel;
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto a = fit(gg.graph, opt);
  omp_set_num_threads(3);
  const auto b = fit(gg.graph, opt);
  omp_set_num_threads(saved);
  CHECK(a.q1 == b.q1);
  CHECK(a.params == b.params);
}

TEST_CASE("permuting the groups permutes the beliefs") {
  const auto gg = planted(assortative_affinity(3, 6.0), 300, 3);
  const auto p = initial_params(gg.graph, 3, 0.5, 1, 3.0);
  const std::vector<std::size_t> perm{2, 0, 1};  // new group perm[r] is old group r
  BlockModelParams q{std::vector<double>(3), Matrix(3, 3)};
  for (std::size_t r = 0; r < 3; ++r) {
    q.gamma[perm[r]] = p.gamma[r];
    for (std::size_t s = 0; s < 3; ++s) q.omega(perm[r], perm[s]) = p.omega(r, s);
  }
  BpState a = random_bp_state(gg.graph, 3, 4);
  BpState b = a;
  for (std::size_t slot = 0; slot < gg.graph.slot_count(); ++slot) {
    for (std::size_t r = 0; r < 3; ++r) b.beliefs.at(slot)[perm[r]] = a.beliefs.at(slot)[r];
  }
  for (NodeId i = 0; i < gg.graph.node_count(); ++i) {
    for (std::size_t r = 0; r < 3; ++r) b.q1(i, perm[r]) = a.q1(i, r);
  }
  BpOptions opt;
  opt.max_sweeps = 40;
  run_bp(gg.graph, p, a, opt);
  run_bp(gg.graph, q, b, opt);
  double worst = 0.0;
  for (NodeId i = 0; i < gg.graph.node_count(); ++i) {
    for (std::size_t r = 0; r < 3; ++r) worst = std::max(worst, std::abs(a.q1(i, r) - b.q1(i, perm[r])));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("fit rejects weighted graphs") {
  const Graph g = Graph::from_edges(3, {{0, 1, 2.0}, {1, 2, 1.0}});
  CHECK_THROWS_AS(fit(g, {}), DataError);
}
