#include "submarket/attributes.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_map>

#include "submarket/edge_list.hpp"
#include "submarket/errors.hpp"

namespace submarket {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::unordered_map<std::string, NodeId> index_of(std::span<const std::string> ids) {
  std::unordered_map<std::string, NodeId> map;
  for (std::size_t i = 0; i < ids.size(); ++i) map.emplace(ids[i], static_cast<NodeId>(i));
  return map;
}

// Reads non-empty lines; the first is the header.
template <typename Fn>
void for_each_row(std::istream& in, Fn&& fn) {
  std::string raw;
  std::size_t line_no = 0;
  bool header = true;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    fn(split_commas(line), line_no);
  }
}

}  // namespace

std::string_view to_string(Sex s) { return s == Sex::male ? "M" : "F"; }

std::string_view to_string(Ethnicity e) {
  switch (e) {
    case Ethnicity::asian: return "Asian";
    case Ethnicity::black: return "Black";
    case Ethnicity::hispanic: return "Hispanic";
    case Ethnicity::white: return "White";
    case Ethnicity::other: return "Other";
  }
  return "Other";
}

Sex parse_sex(std::string_view text) {
  const auto t = lower(text);
  if (t == "m" || t == "male") return Sex::male;
  if (t == "f" || t == "female") return Sex::female;
  throw DataError("unknown sex '" + std::string(text) + "'");
}

Ethnicity parse_ethnicity(std::string_view text) {
  const auto t = lower(text);
  if (t == "asian" || t == "a") return Ethnicity::asian;
  if (t == "black" || t == "b") return Ethnicity::black;
  if (t == "hispanic" || t == "h") return Ethnicity::hispanic;
  if (t == "white" || t == "w") return Ethnicity::white;
  if (t == "other" || t == "o" || t == "multi" || t == "mixed" || t == "multiethnic") return Ethnicity::other;
  throw DataError("unknown ethnicity '" + std::string(text) + "'");
}

AttributeTable::AttributeTable(std::vector<NodeAttributes> rows) : rows_(std::move(rows)) {
  for (const auto& r : rows_) {
    if (!(r.age >= 18.0 && r.age <= 100.0)) throw DataError("age " + std::to_string(r.age) + " outside [18, 100]");
  }
}

AttributeTable load_attributes(std::istream& in, std::span<const std::string> node_ids) {
  const auto index = index_of(node_ids);
  std::vector<NodeAttributes> rows(node_ids.size());
  std::vector<bool> seen(node_ids.size(), false);
  for_each_row(in, [&](const std::vector<std::string_view>& f, std::size_t line_no) {
    if (f.size() < 4 || f.size() > 5) throw ParseError(line_no, "expected node_id,sex,age,ethnicity[,region]");
    const auto it = index.find(std::string(f[0]));
    if (it == index.end()) return;
    NodeAttributes a;
    try {
      a.sex = parse_sex(f[1]);
      a.ethnicity = parse_ethnicity(f[3]);
    } catch (const DataError& e) {
      throw ParseError(line_no, e.what());
    }
    const auto [ptr, ec] = std::from_chars(f[2].data(), f[2].data() + f[2].size(), a.age);
    if (ec != std::errc{} || ptr != f[2].data() + f[2].size()) throw ParseError(line_no, "non-numeric age");
    if (!(a.age >= 18.0 && a.age <= 100.0)) throw ParseError(line_no, "age outside [18, 100]");
    if (f.size() == 5) a.region = std::string(f[4]);
    if (seen[it->second]) throw ParseError(line_no, "duplicate attribute row for " + std::string(f[0]));
    seen[it->second] = true;
    rows[it->second] = std::move(a);
  });
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) throw DataError("node " + node_ids[i] + " has no attribute row");
  }
  return AttributeTable(std::move(rows));
}

void write_attributes(std::ostream& out, const AttributeTable& attrs, std::span<const std::string> node_ids) {
  const bool regions = std::any_of(attrs.rows().begin(), attrs.rows().end(),
                                   [](const NodeAttributes& a) { return !a.region.empty(); });
  out << "node_id,sex,age,ethnicity" << (regions ? ",region" : "") << '\n';
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    const auto& a = attrs[static_cast<NodeId>(i)];
    out << node_ids[i] << ',' << to_string(a.sex) << ',' << format_double(a.age) << ',' << to_string(a.ethnicity);
    if (regions) out << ',' << a.region;
    out << '\n';
  }
}

ContactLog::ContactLog(std::vector<Contact> records) : records_(std::move(records)) {
  std::set<std::pair<NodeId, NodeId>> pairs;
  for (const auto& c : records_) {
    if (c.sender == c.receiver) throw DataError("contact log: sender equals receiver");
    if (!pairs.emplace(c.sender, c.receiver).second) {
      throw DataError("contact log: more than one first contact for an ordered pair");
    }
  }
}

ContactLog load_contacts(std::istream& in, std::span<const std::string> node_ids, std::size_t* skipped) {
  const auto index = index_of(node_ids);
  std::vector<Contact> records;
  for_each_row(in, [&](const std::vector<std::string_view>& f, std::size_t line_no) {
    if (f.size() != 3) throw ParseError(line_no, "expected sender,receiver,replied");
    const auto s = index.find(std::string(f[0]));
    const auto r = index.find(std::string(f[1]));
    if (s == index.end() || r == index.end()) {
      if (!skipped) throw ParseError(line_no, "contact references unknown node");
      ++*skipped;
      return;
    }
    const auto flag = lower(f[2]);
    bool replied = false;
    if (flag == "1" || flag == "true") {
      replied = true;
    } else if (flag != "0" && flag != "false") {
      throw ParseError(line_no, "replied must be 0/1 or true/false");
    }
    records.push_back({s->second, r->second, replied});
  });
  return ContactLog(std::move(records));
}

}  // namespace submarket
