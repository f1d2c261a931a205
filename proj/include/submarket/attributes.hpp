#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "submarket/graph.hpp"

namespace submarket {

enum class Sex : std::uint8_t { male, female };
enum class Ethnicity : std::uint8_t { asian, black, hispanic, white, other };

inline constexpr std::size_t kEthnicityCount = 5;
inline constexpr std::array<Ethnicity, kEthnicityCount> kEthnicities{
    Ethnicity::asian, Ethnicity::black, Ethnicity::hispanic, Ethnicity::white, Ethnicity::other};

std::string_view to_string(Sex s);
std::string_view to_string(Ethnicity e);
Sex parse_sex(std::string_view text);
/// Case-insensitive; multi-ethnic labels ("multi", "mixed", "multiethnic") map to other.
Ethnicity parse_ethnicity(std::string_view text);

struct NodeAttributes {
  Sex sex = Sex::male;
  double age = 18.0;
  Ethnicity ethnicity = Ethnicity::other;
  std::string region;
};

/// Per-node attributes indexed by graph node.
class AttributeTable {
 public:
  AttributeTable() = default;
  explicit AttributeTable(std::vector<NodeAttributes> rows);

  std::size_t size() const noexcept { return rows_.size(); }
  const NodeAttributes& operator[](NodeId i) const { return rows_[i]; }
  std::span<const NodeAttributes> rows() const noexcept { return rows_; }

 private:
  std::vector<NodeAttributes> rows_;
};

/// CSV with header `node_id,sex,age,ethnicity[,region]`. Rows are matched to
/// `node_ids` by id; ids absent from `node_ids` are skipped. Every node must
/// have a row and every age must lie in [18, 100].
AttributeTable load_attributes(std::istream& in, std::span<const std::string> node_ids);
void write_attributes(std::ostream& out, const AttributeTable& attrs, std::span<const std::string> node_ids);

struct Contact {
  NodeId sender;
  NodeId receiver;
  bool replied;
};

/// First contacts: sender != receiver and at most one record per ordered pair.
class ContactLog {
 public:
  ContactLog() = default;
  explicit ContactLog(std::vector<Contact> records);

  std::span<const Contact> records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

 private:
  std::vector<Contact> records_;
};

/// CSV with header `sender,receiver,replied`; replied is 0/1 or true/false.
/// Records naming an id outside `node_ids` are an error, unless `skipped` is
/// given, in which case they are dropped and counted there.
ContactLog load_contacts(std::istream& in, std::span<const std::string> node_ids,
                         std::size_t* skipped = nullptr);

}  // namespace submarket
