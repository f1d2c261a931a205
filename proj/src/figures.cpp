#include "submarket/figures.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>

#include "submarket/edge_list.hpp"
#include "submarket/errors.hpp"

namespace submarket {
namespace {

std::string num(double x) { return std::isnan(x) ? "NA" : format_double(x); }

nlohmann::json num_json(double x) {
  if (std::isnan(x)) return nullptr;
  return x;
}

std::string flag(bool b) { return b ? "1" : "0"; }

std::string sex_label(const std::optional<Sex>& s) { return s ? std::string(to_string(*s)) : "all"; }

}  // namespace

std::string_view to_string(ContactStage s) { return s == ContactStage::sent ? "sent" : "replied"; }

std::string_view to_string(Direction d) {
  return d == Direction::male_to_female ? "male_to_female" : "female_to_male";
}

std::string fig2a_csv(const AgeQuantiles& q) {
  std::ostringstream out;
  out << "submarket,sex,count,p9,p25,p50,p75,p91,low_support\n";
  for (const auto& c : q.cells) {
    out << c.submarket << ',' << sex_label(c.sex) << ',' << c.count << ',' << num(c.quantiles.p9) << ','
        << num(c.quantiles.p25) << ',' << num(c.quantiles.p50) << ',' << num(c.quantiles.p75) << ','
        << num(c.quantiles.p91) << ',' << flag(c.low_support) << '\n';
  }
  return out.str();
}

nlohmann::json fig2a_json(const AgeQuantiles& q) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : q.cells) {
    cells.push_back({{"submarket", c.submarket},
                     {"sex", sex_label(c.sex)},
                     {"count", c.count},
                     {"p9", c.quantiles.p9},
                     {"p25", c.quantiles.p25},
                     {"p50", c.quantiles.p50},
                     {"p75", c.quantiles.p75},
                     {"p91", c.quantiles.p91},
                     {"low_support", c.low_support}});
  }
  return {{"figure", "fig2a"}, {"cells", cells}, {"warnings", q.warnings}};
}

std::string fig2b_csv(const SexRatios& r) {
  std::ostringstream out;
  out << "submarket,men,women,percent_men,percent_women\n";
  for (const auto& row : r.rows) {
    out << (row.submarket ? std::to_string(*row.submarket) : "all") << ',' << row.men << ',' << row.women << ','
        << num(row.percent_men) << ',' << num(row.percent_women) << '\n';
  }
  return out.str();
}

nlohmann::json fig2b_json(const SexRatios& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"submarket", row.submarket ? nlohmann::json(*row.submarket) : nlohmann::json("all")},
                    {"men", row.men},
                    {"women", row.women},
                    {"percent_men", row.percent_men},
                    {"percent_women", row.percent_women}});
  }
  return {{"figure", "fig2b"}, {"rows", rows}, {"warnings", r.warnings}};
}

std::string fig2c_csv(const RelativeAges& r) {
  std::ostringstream out;
  out << "submarket,ethnicity,count,reference_count,mean_age,reference_mean_age,difference,low_support\n";
  for (const auto& c : r.cells) {
    out << c.submarket << ',' << to_string(c.ethnicity) << ',' << c.count << ',' << c.reference_count << ','
        << num(c.mean_age) << ',' << num(c.reference_mean_age) << ',' << num(c.difference) << ','
        << flag(c.low_support) << '\n';
  }
  return out.str();
}

nlohmann::json fig2c_json(const RelativeAges& r) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : r.cells) {
    cells.push_back({{"submarket", c.submarket},
                     {"ethnicity", to_string(c.ethnicity)},
                     {"count", c.count},
                     {"reference_count", c.reference_count},
                     {"mean_age", num_json(c.mean_age)},
                     {"reference_mean_age", num_json(c.reference_mean_age)},
                     {"difference", num_json(c.difference)},
                     {"low_support", c.low_support}});
  }
  return {{"figure", "fig2c"}, {"cells", cells}, {"warnings", r.warnings}};
}

std::string fig3_csv(std::span<const AgeGapMatrix> stages, std::span<const ContactStage> names) {
  if (stages.size() != names.size()) throw DataError("fig3: one stage name per matrix");
  std::ostringstream out;
  out << "stage,sender_ethnicity,submarket,receiver_ethnicity,count,mean_gap\n";
  for (std::size_t t = 0; t < stages.size(); ++t) {
    for (const auto& c : stages[t].cells) {
      out << to_string(names[t]) << ',' << to_string(c.sender_ethnicity) << ',' << c.submarket << ','
          << to_string(c.receiver_ethnicity) << ',' << c.count << ',' << (c.empty() ? "X" : num(c.mean_gap))
          << '\n';
    }
  }
  return out.str();
}

nlohmann::json fig3_json(std::span<const AgeGapMatrix> stages, std::span<const ContactStage> names) {
  if (stages.size() != names.size()) throw DataError("fig3: one stage name per matrix");
  nlohmann::json cells = nlohmann::json::array();
  for (std::size_t t = 0; t < stages.size(); ++t) {
    for (const auto& c : stages[t].cells) {
      cells.push_back({{"stage", to_string(names[t])},
                       {"sender_ethnicity", to_string(c.sender_ethnicity)},
                       {"submarket", c.submarket},
                       {"receiver_ethnicity", to_string(c.receiver_ethnicity)},
                       {"count", c.count},
                       {"mean_gap", c.empty() ? nlohmann::json("X") : num_json(c.mean_gap)}});
    }
  }
  return {{"figure", "fig3"}, {"cells", cells}};
}

std::string fig4_csv(std::span<const MixingMatrices> mats, std::span<const Direction> directions) {
  if (mats.size() != directions.size()) throw DataError("fig4: one direction per matrix");
  std::ostringstream out;
  out << "direction,sender_submarket,receiver_submarket,sent,replied,fraction,reply_rate,low_support\n";
  for (std::size_t t = 0; t < mats.size(); ++t) {
    const auto& m = mats[t];
    for (std::size_t r = 0; r < m.sent.rows(); ++r) {
      if (!m.row_present[r]) continue;
      for (std::size_t s = 0; s < m.sent.cols(); ++s) {
        out << to_string(directions[t]) << ',' << r << ',' << s << ',' << num(m.sent(r, s)) << ','
            << num(m.replied(r, s)) << ',' << num(m.fraction(r, s)) << ',' << num(m.reply_rate(r, s)) << ','
            << flag(m.low_support(r, s)) << '\n';
      }
    }
  }
  return out.str();
}

nlohmann::json fig4_json(std::span<const MixingMatrices> mats, std::span<const Direction> directions) {
  if (mats.size() != directions.size()) throw DataError("fig4: one direction per matrix");
  nlohmann::json out = {{"figure", "fig4"}, {"directions", nlohmann::json::array()}};
  for (std::size_t t = 0; t < mats.size(); ++t) {
    const auto& m = mats[t];
    nlohmann::json fraction = nlohmann::json::array();
    nlohmann::json reply = nlohmann::json::array();
    nlohmann::json sent = nlohmann::json::array();
    for (std::size_t r = 0; r < m.sent.rows(); ++r) {
      nlohmann::json f = nlohmann::json::array(), rr = nlohmann::json::array(), s = nlohmann::json::array();
      for (std::size_t c = 0; c < m.sent.cols(); ++c) {
        f.push_back(num_json(m.fraction(r, c)));
        rr.push_back(num_json(m.reply_rate(r, c)));
        s.push_back(m.sent(r, c));
      }
      fraction.push_back(f);
      reply.push_back(rr);
      sent.push_back(s);
    }
    out["directions"].push_back({{"direction", to_string(directions[t])},
                                 {"sent", sent},
                                 {"fraction", fraction},
                                 {"reply_rate", reply},
                                 {"min_messages", m.min_messages},
                                 {"warnings", m.warnings}});
  }
  return out;
}

std::string partition_csv(const Partition& p, std::span<const std::string> ids) {
  if (ids.size() != p.size()) throw DataError("partition and id list differ in length");
  std::ostringstream out;
  out << "node_id,community\n";
  for (std::size_t i = 0; i < p.size(); ++i) out << ids[i] << ',' << p.labels[i] << '\n';
  return out.str();
}

std::string submarkets_csv(const Partition& p, const SubmarketMap& map, std::span<const std::string> ids) {
  if (ids.size() != p.size()) throw DataError("partition and id list differ in length");
  const NodeSubmarkets nodes = map.for_nodes(p);
  std::ostringstream out;
  out << "node_id,community,submarket\n";
  for (std::size_t i = 0; i < p.size(); ++i) {
    out << ids[i] << ',' << p.labels[i] << ',' << nodes.of_node[i] << '\n';
  }
  return out.str();
}

nlohmann::json fit_result_json(const FitResult& r, std::span<const std::string> ids,
                               const std::string& marginals_path) {
  if (ids.size() != r.assignment.size()) throw DataError("assignment and id list differ in length");
  nlohmann::json j = to_json(r.params);
  j["loglike_proxy"] = r.objective;
  j["converged"] = r.converged;
  nlohmann::json assignments = nlohmann::json::object();
  for (std::size_t i = 0; i < ids.size(); ++i) assignments[ids[i]] = r.assignment.labels[i];
  j["assignments"] = assignments;
  if (!marginals_path.empty()) j["marginals_path"] = marginals_path;
  nlohmann::json restarts = nlohmann::json::array();
  for (const auto& s : r.restarts) {
    restarts.push_back({{"objective", s.objective},
                        {"converged", s.converged},
                        {"degenerate", s.degenerate},
                        {"stalled", s.stalled},
                        {"em_iterations", s.em_iterations}});
  }
  j["best_restart"] = r.best_restart;
  j["restarts"] = restarts;
  return j;
}

std::string marginals_binary(const Matrix& q1) {
  const auto data = q1.data();
  std::string out(data.size() * sizeof(double), '\0');
  for (std::size_t t = 0; t < data.size(); ++t) {
    auto bits = std::bit_cast<std::uint64_t>(data[t]);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    std::memcpy(out.data() + t * sizeof(double), &bits, sizeof(bits));
  }
  return out;
}

nlohmann::json posterior_json(const ExactPosterior& post, const Graph& g) {
  nlohmann::json q1 = nlohmann::json::object();
  for (NodeId i = 0; i < g.node_count(); ++i) {
    const auto row = post.q1.row(i);
    q1[g.id(i)] = std::vector<double>(row.begin(), row.end());
  }
  nlohmann::json q2 = nlohmann::json::array();
  const auto edges = g.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto block = post.q2.block(e);
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < post.q2.k; ++r) {
      rows.push_back(std::vector<double>(block.begin() + r * post.q2.k, block.begin() + (r + 1) * post.q2.k));
    }
    q2.push_back({{"u", g.id(edges[e].u)}, {"v", g.id(edges[e].v)}, {"block", rows}});
  }
  return {{"q1", q1}, {"q2", q2}, {"states", post.states}, {"field_iterations", post.field_iterations},
          {"field_converged", post.field_converged}};
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace submarket
