#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "submarket/attributes.hpp"
#include "submarket/graph.hpp"
#include "submarket/matrix.hpp"
#include "submarket/pairing.hpp"

namespace submarket {

/// Share of edge weight (internal weight counts as within) whose endpoints
/// share a submarket. Throws DataError on an empty graph.
double within_fraction(const Graph& g, const NodeSubmarkets& sub);
/// Share of contact records between members of the same submarket.
double within_fraction(const ContactLog& log, const NodeSubmarkets& sub);

/// Linear interpolation between order statistics at 1-based position
/// 1 + (n - 1) p. `sorted` must be ascending and non-empty.
double quantile(std::span<const double> sorted, double p);

struct QuantileSummary {
  double p9 = 0, p25 = 0, p50 = 0, p75 = 0, p91 = 0;
};

struct AgeQuantileCell {
  std::uint32_t submarket = 0;
  std::optional<Sex> sex;  ///< nullopt when sexes are pooled
  std::size_t count = 0;
  QuantileSummary quantiles;
  bool low_support = false;
};

struct AgeQuantiles {
  std::vector<AgeQuantileCell> cells;
  std::vector<std::string> warnings;
};

AgeQuantiles age_quantiles(const NodeSubmarkets& sub, const AttributeTable& attrs, bool by_sex,
                           std::size_t min_count = 10);

struct SexRatioRow {
  std::optional<std::uint32_t> submarket;  ///< nullopt for the overall row
  std::size_t men = 0;
  std::size_t women = 0;
  double percent_men = 0.0;
  double percent_women = 0.0;
};

struct SexRatios {
  std::vector<SexRatioRow> rows;  ///< per submarket, then overall
  std::vector<std::string> warnings;
};

SexRatios sex_ratio(const NodeSubmarkets& sub, const AttributeTable& attrs);

enum class AgeWeighting {
  users,         ///< every member counts once
  interactions,  ///< members weighted by their strength in a graph
};

struct RelativeAgeCell {
  std::uint32_t submarket = 0;
  Ethnicity ethnicity = Ethnicity::other;
  std::size_t count = 0;
  std::size_t reference_count = 0;
  double mean_age = 0.0;
  double reference_mean_age = 0.0;
  double difference = 0.0;
  bool low_support = false;
};

struct RelativeAges {
  std::vector<RelativeAgeCell> cells;
  std::vector<std::string> warnings;
};

/// Mean age of each non-reference ethnicity minus the mean age of the
/// reference ethnicity, among members of `sex` in the same submarket.
/// Submarkets without reference members are omitted.
RelativeAges relative_minority_age(const NodeSubmarkets& sub, const AttributeTable& attrs, Ethnicity reference,
                                   Sex sex, std::size_t min_count = 10,
                                   AgeWeighting weighting = AgeWeighting::users, const Graph* graph = nullptr);

enum class Direction { male_to_female, female_to_male };

struct MixingMatrices {
  Matrix sent;        ///< message counts, rows = sender submarket
  Matrix replied;     ///< replied counts
  Matrix fraction;    ///< row-stochastic; NaN rows where nothing was sent
  Matrix reply_rate;  ///< replied / sent; NaN where nothing was sent
  std::vector<bool> row_present;
  std::size_t min_messages = 20;
  std::vector<std::string> warnings;

  bool low_support(std::size_t r, std::size_t s) const { return sent(r, s) < static_cast<double>(min_messages); }
};

/// Message fractions and reply rates between sender and receiver submarkets
/// for contacts in the given direction (sender sex -> opposite sex).
MixingMatrices mixing_matrix(const ContactLog& log, const AttributeTable& attrs, const NodeSubmarkets& sub,
                             Direction direction, std::size_t min_messages = 20);

enum class ContactStage { sent, replied };

enum class GapWeighting {
  messages,  ///< mean over contact records
  senders,   ///< mean over senders of each sender's mean gap
};

struct AgeGapCell {
  Ethnicity sender_ethnicity = Ethnicity::other;
  std::uint32_t submarket = 0;  ///< sender's submarket
  Ethnicity receiver_ethnicity = Ethnicity::other;
  std::size_t count = 0;
  double mean_gap = 0.0;  ///< NaN when empty

  bool empty() const noexcept { return count == 0; }
};

/// Mean (sender age - receiver age). Rows are (sender ethnicity, sender
/// submarket), columns receiver ethnicity. Every combination is present;
/// cells without records are empty (marked X in reports).
struct AgeGapMatrix {
  std::uint32_t submarkets = 0;
  std::vector<AgeGapCell> cells;

  const AgeGapCell& at(Ethnicity sender, std::uint32_t submarket, Ethnicity receiver) const;
};

AgeGapMatrix age_gap_matrix(const ContactLog& log, const AttributeTable& attrs, const NodeSubmarkets& sub,
                            ContactStage stage, Direction direction = Direction::male_to_female,
                            GapWeighting weighting = GapWeighting::messages);

}  // namespace submarket
