#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "submarket/dcsbm.hpp"
#include "submarket/graph.hpp"
#include "submarket/matrix.hpp"

namespace testing {

inline nlohmann::json fixture(const std::string& name) {
  std::ifstream in(std::string(SUBMARKET_FIXTURE_DIR) + "/" + name);
  return nlohmann::json::parse(in);
}

inline submarket::Graph graph(std::size_t n, const std::vector<std::pair<submarket::NodeId, submarket::NodeId>>& pairs) {
  std::vector<submarket::Edge> edges;
  for (auto [u, v] : pairs) edges.push_back({u, v, 1.0});
  return submarket::Graph::from_edges(n, edges);
}

inline submarket::Graph two_triangles() { return graph(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}}); }

inline submarket::Matrix matrix(const nlohmann::json& rows) {
  submarket::Matrix m(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c].get<double>();
  }
  return m;
}

inline submarket::BlockModelParams params(const nlohmann::json& gamma, const nlohmann::json& omega) {
  return {gamma.get<std::vector<double>>(), matrix(omega)};
}

}  // namespace testing
