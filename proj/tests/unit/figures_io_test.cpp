#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <limits>

#include "helpers.hpp"
#include "submarket/errors.hpp"
#include "submarket/figures.hpp"
#include "submarket/io.hpp"

using namespace submarket;
namespace fs = std::filesystem;

namespace {

std::string first_line(const std::string& csv) { return csv.substr(0, csv.find('\n')); }

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("submarket_unit_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("figure headers") {
  CHECK(first_line(fig2a_csv({})) == "submarket,sex,count,p9,p25,p50,p75,p91,low_support");
  CHECK(first_line(fig2b_csv({})) == "submarket,men,women,percent_men,percent_women");
  CHECK(first_line(fig2c_csv({})) ==
        "submarket,ethnicity,count,reference_count,mean_age,reference_mean_age,difference,low_support");
  CHECK(first_line(fig3_csv({}, {})) == "stage,sender_ethnicity,submarket,receiver_ethnicity,count,mean_gap");
  CHECK(first_line(fig4_csv({}, {})) ==
        "direction,sender_submarket,receiver_submarket,sent,replied,fraction,reply_rate,low_support");
}

TEST_CASE("sex ratio rows") {
  SexRatios r;
  r.rows.push_back({0u, 2, 1, 200.0 / 3.0, 100.0 / 3.0});
  r.rows.push_back({std::nullopt, 2, 1, 200.0 / 3.0, 100.0 / 3.0});
  const std::string csv = fig2b_csv(r);
  CHECK(csv.find("\n0,2,1,66.66666666666667,33.333333333333336\n") != std::string::npos);
  CHECK(csv.find("\nall,2,1,") != std::string::npos);
  CHECK(fig2b_json(r)["rows"].size() == 2);
}

TEST_CASE("empty age-gap cells are written as X") {
  AgeGapMatrix m;
  m.submarkets = 1;
  AgeGapCell full;
  full.sender_ethnicity = Ethnicity::white;
  full.receiver_ethnicity = Ethnicity::black;
  full.count = 3;
  full.mean_gap = 4.5;
  AgeGapCell empty;
  empty.mean_gap = std::numeric_limits<double>::quiet_NaN();
  m.cells = {full, empty};
  const std::vector<AgeGapMatrix> stages{m};
  const std::vector<ContactStage> names{ContactStage::replied};
  const std::string csv = fig3_csv(stages, names);
  CHECK(csv.find("replied,White,0,Black,3,4.5\n") != std::string::npos);
  CHECK(csv.find("replied,Other,0,Other,0,X\n") != std::string::npos);
  CHECK(fig3_json(stages, names)["cells"][1]["mean_gap"] == "X");
  CHECK_THROWS_AS(fig3_csv(stages, {}), DataError);
}

TEST_CASE("missing mixing values are written as NA") {
  MixingMatrices m;
  m.sent = Matrix(1, 2);
  m.replied = Matrix(1, 2);
  m.sent(0, 0) = 4.0;
  m.replied(0, 0) = 1.0;
  m.fraction = Matrix(1, 2);
  m.fraction(0, 0) = 1.0;
  m.reply_rate = Matrix(1, 2, std::numeric_limits<double>::quiet_NaN());
  m.reply_rate(0, 0) = 0.25;
  m.row_present = {true};
  m.min_messages = 2;
  const std::vector<MixingMatrices> mats{m};
  const std::vector<Direction> dirs{Direction::male_to_female};
  const std::string csv = fig4_csv(mats, dirs);
  CHECK(csv.find(",0,0,4,1,1,0.25,0\n") != std::string::npos);
  CHECK(csv.find(",0,1,0,0,0,NA,1\n") != std::string::npos);
  CHECK(fig4_json(mats, dirs)["directions"][0]["reply_rate"][0][1].is_null());
}

TEST_CASE("partition and submarket tables") {
  const Partition p = Partition::with_groups({1, 0, 1}, 2);
  const std::vector<std::string> ids{"a", "b", "c"};
  CHECK(partition_csv(p, ids) == "node_id,community\na,1\nb,0\nc,1\n");
  SubmarketMap map;
  map.of_community = {0, 0};
  map.count = 1;
  CHECK(submarkets_csv(p, map, ids) == "node_id,community,submarket\na,1,0\nb,0,0\nc,1,0\n");
  CHECK_THROWS_AS(partition_csv(p, std::vector<std::string>{"a"}), DataError);
}

TEST_CASE("marginals are little-endian float64") {
  Matrix q(2, 2);
  q(0, 0) = 0.25;
  q(0, 1) = 0.75;
  q(1, 0) = 1.0;
  const std::string bin = marginals_binary(q);
  REQUIRE(bin.size() == 4 * sizeof(double));
  // 0.25 = 0x3FD0000000000000
  CHECK(static_cast<unsigned char>(bin[7]) == 0x3F);
  CHECK(static_cast<unsigned char>(bin[6]) == 0xD0);
  for (int b = 0; b < 6; ++b) CHECK(bin[b] == '\0');
  double back[4];
  std::memcpy(back, bin.data(), bin.size());
  CHECK(back[1] == 0.75);
  CHECK(back[3] == 0.0);
}

TEST_CASE("fit results serialize with ids") {
  FitResult r;
  r.params = {{0.5, 0.5}, Matrix(2, 2, 0.1)};
  r.assignment = Partition::with_groups({0, 1}, 2);
  r.objective = -3.5;
  r.converged = true;
  const std::vector<std::string> ids{"u", "v"};
  const auto j = fit_result_json(r, ids, "m.bin");
  CHECK(j["k"] == 2);
  CHECK(j["assignments"]["v"] == 1);
  CHECK(j["loglike_proxy"] == -3.5);
  CHECK(j["marginals_path"] == "m.bin");
  CHECK(dump(nlohmann::json{{"a", 1}}) == "{\n  \"a\": 1\n}\n");
}

TEST_CASE("atomic writes") {
  const fs::path dir = scratch("atomic");
  const fs::path file = dir / "nested" / "out.csv";
  write_file_atomic(file, "one\n");
  CHECK(read_file(file) == "one\n");
  write_file_atomic(file, "two\n");
  CHECK(read_file(file) == "two\n");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(file.parent_path())) ++entries;
  CHECK(entries == 1);
  CHECK_THROWS_AS(read_file(dir / "missing"), DataError);
  fs::remove_all(dir);
}
