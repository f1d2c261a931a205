#pragma once

// Tidy CSV and JSON renderings of the analysis tables and model outputs.
// Numbers use the shortest round-trip form; missing values are written as NA,
// and empty age-gap cells as X.

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "submarket/analysis.hpp"
#include "submarket/em.hpp"
#include "submarket/oracle.hpp"
#include "submarket/pairing.hpp"

namespace submarket {

/// submarket,sex,count,p9,p25,p50,p75,p91,low_support (sex is "all" when pooled)
std::string fig2a_csv(const AgeQuantiles& q);
/// submarket,men,women,percent_men,percent_women (last row has submarket "all")
std::string fig2b_csv(const SexRatios& r);
/// submarket,ethnicity,count,reference_count,mean_age,reference_mean_age,difference,low_support
std::string fig2c_csv(const RelativeAges& r);
/// stage,sender_ethnicity,submarket,receiver_ethnicity,count,mean_gap
std::string fig3_csv(std::span<const AgeGapMatrix> stages, std::span<const ContactStage> names);
/// direction,sender_submarket,receiver_submarket,sent,replied,fraction,reply_rate,low_support
std::string fig4_csv(std::span<const MixingMatrices> mats, std::span<const Direction> directions);

nlohmann::json fig2a_json(const AgeQuantiles& q);
nlohmann::json fig2b_json(const SexRatios& r);
nlohmann::json fig2c_json(const RelativeAges& r);
nlohmann::json fig3_json(std::span<const AgeGapMatrix> stages, std::span<const ContactStage> names);
nlohmann::json fig4_json(std::span<const MixingMatrices> mats, std::span<const Direction> directions);

std::string_view to_string(ContactStage s);
std::string_view to_string(Direction d);

/// node_id,community
std::string partition_csv(const Partition& p, std::span<const std::string> ids);
/// node_id,community,submarket
std::string submarkets_csv(const Partition& p, const SubmarketMap& map, std::span<const std::string> ids);

/// {k, gamma, omega, loglike_proxy, converged, assignments, marginals_path?}
nlohmann::json fit_result_json(const FitResult& r, std::span<const std::string> ids,
                               const std::string& marginals_path = {});
/// q1 as n x k little-endian float64, row-major.
std::string marginals_binary(const Matrix& q1);

/// {q1: {node: [..]}, q2: [{u, v, block}], states}
nlohmann::json posterior_json(const ExactPosterior& post, const Graph& g);

/// JSON text as written to disk: two-space indent and a trailing newline.
std::string dump(const nlohmann::json& j);

}  // namespace submarket
