#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mgr/dataset.hpp"

namespace mgr {

enum class Comparator { eq, ne, le, gt };

std::string_view to_string(Comparator op);

/// One `column <op> value` clause. The value is kept as text until the
/// predicate is bound to a schema.
struct Atom {
  std::string column;
  Comparator op = Comparator::eq;
  std::string value;

  bool operator==(const Atom&) const = default;
};

/// Named conjunction of atoms. No atoms means the predicate matches every
/// row; the canonical match-all group is named "ALL".
class GroupPredicate {
 public:
  static constexpr std::string_view kAllName = "ALL";

  GroupPredicate() = default;
  GroupPredicate(std::string name, std::vector<Atom> atoms);

  static GroupPredicate all();

  /// Parses `name: col==val & col2<=num`. A body that is empty or `*`
  /// matches everything.
  static GroupPredicate parse(std::string_view text);

  const std::string& name() const { return name_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  bool matches_all() const { return atoms_.empty(); }

  /// Inverse of parse.
  std::string to_string() const;

  bool operator==(const GroupPredicate&) const = default;

 private:
  std::string name_;
  std::vector<Atom> atoms_;
};

/// A predicate resolved against a schema: column indices and comparison
/// values are fixed, so membership is a cheap pure function of a row.
class BoundPredicate {
 public:
  BoundPredicate(const GroupPredicate& predicate, const Schema& schema);

  const std::string& name() const { return name_; }
  bool contains(const FeatureRow& row) const;

 private:
  struct BoundAtom {
    std::size_t column;
    Comparator op;
    double value;  // NaN for a categorical token outside the vocabulary
  };
  std::string name_;
  std::vector<BoundAtom> atoms_;
};

/// Bit i is 1 iff rows[i] satisfies every clause of g.
std::vector<std::uint8_t> group_membership(const GroupPredicate& g,
                                           const Schema& schema,
                                           std::span<const FeatureRow> rows);
std::vector<std::uint8_t> group_membership(const GroupPredicate& g,
                                           const Dataset& data);

/// Ordered, uniquely named groups. ALL is appended unless already present.
class GroupClass {
 public:
  GroupClass() : GroupClass(std::vector<GroupPredicate>{}) {}
  explicit GroupClass(std::vector<GroupPredicate> groups);

  static GroupClass parse(std::span<const std::string> definitions);

  std::size_t size() const { return groups_.size(); }
  const GroupPredicate& operator[](std::size_t i) const { return groups_.at(i); }
  const std::vector<GroupPredicate>& groups() const { return groups_; }
  auto begin() const { return groups_.begin(); }
  auto end() const { return groups_.end(); }

  std::optional<std::size_t> index_of(std::string_view name) const;
  /// Throws ConfigError for unknown names.
  const GroupPredicate& require(std::string_view name) const;

 private:
  std::vector<GroupPredicate> groups_;
};

/// Row indices of `data` inside each group, in row order.
std::vector<std::vector<std::size_t>> group_members(const GroupClass& groups,
                                                    const Dataset& data);

}  // namespace mgr
