#include "mgr/groups.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "mgr/errors.hpp"

namespace mgr {

namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

Atom parse_atom(std::string_view text, std::string_view group_text) {
  struct Op {
    std::string_view token;
    Comparator op;
  };
  // Two-character operators first so "<=" is not read as a bare '>' miss.
  constexpr Op kOps[] = {{"==", Comparator::eq},
                         {"!=", Comparator::ne},
                         {"<=", Comparator::le},
                         {">", Comparator::gt}};
  for (const auto& [token, op] : kOps) {
    const auto pos = text.find(token);
    if (pos == std::string_view::npos) continue;
    const auto column = trim(text.substr(0, pos));
    const auto value = trim(text.substr(pos + token.size()));
    if (column.empty() || value.empty()) break;
    return Atom{std::string(column), op, std::string(value)};
  }
  throw ConfigError("malformed clause '" + std::string(trim(text)) + "' in group '" +
                    std::string(group_text) + "'");
}

}  // namespace

std::string_view to_string(Comparator op) {
  switch (op) {
    case Comparator::eq: return "==";
    case Comparator::ne: return "!=";
    case Comparator::le: return "<=";
    case Comparator::gt: return ">";
  }
  return "?";
}

GroupPredicate::GroupPredicate(std::string name, std::vector<Atom> atoms)
    : name_(std::move(name)), atoms_(std::move(atoms)) {
  if (trim(name_).empty()) throw ConfigError("group predicate needs a name");
}

GroupPredicate GroupPredicate::all() { return GroupPredicate(std::string(kAllName), {}); }

GroupPredicate GroupPredicate::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw ConfigError("group definition lacks 'name:' prefix: " + std::string(text));
  }
  const auto name = trim(text.substr(0, colon));
  auto body = trim(text.substr(colon + 1));
  std::vector<Atom> atoms;
  if (!body.empty() && body != "*") {
    while (true) {
      const auto amp = body.find('&');
      atoms.push_back(parse_atom(body.substr(0, amp), text));
      if (amp == std::string_view::npos) break;
      body = body.substr(amp + 1);
    }
  }
  return GroupPredicate(std::string(name), std::move(atoms));
}

std::string GroupPredicate::to_string() const {
  std::string out = name_ + ":";
  if (atoms_.empty()) return out + " *";
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    out += i == 0 ? " " : " & ";
    out += atoms_[i].column;
    out += mgr::to_string(atoms_[i].op);
    out += atoms_[i].value;
  }
  return out;
}

BoundPredicate::BoundPredicate(const GroupPredicate& predicate, const Schema& schema)
    : name_(predicate.name()) {
  atoms_.reserve(predicate.atoms().size());
  for (const Atom& atom : predicate.atoms()) {
    const std::size_t col = schema.require(atom.column);
    const Column& c = schema.column(col);
    double value = 0.0;
    if (c.kind == ColumnKind::numeric) {
      const auto parsed = parse_number(atom.value);
      if (!parsed) {
        throw SchemaError("group '" + predicate.name() + "': column " + c.name +
                          " is numeric but clause value is '" + atom.value + "'");
      }
      value = *parsed;
    } else {
      if (atom.op == Comparator::le || atom.op == Comparator::gt) {
        throw SchemaError("group '" + predicate.name() + "': ordering comparison on categorical column " +
                          c.name);
      }
      const double code = c.code_of(atom.value);
      value = code == kUnseenCode ? std::numeric_limits<double>::quiet_NaN() : code;
    }
    atoms_.push_back({col, atom.op, value});
  }
}

bool BoundPredicate::contains(const FeatureRow& row) const {
  for (const auto& a : atoms_) {
    const double v = row.values[a.column];
    bool ok = false;
    switch (a.op) {
      case Comparator::eq: ok = v == a.value; break;
      case Comparator::ne: ok = v != a.value; break;
      case Comparator::le: ok = v <= a.value; break;
      case Comparator::gt: ok = v > a.value; break;
    }
    if (!ok) return false;
  }
  return true;
}

std::vector<std::uint8_t> group_membership(const GroupPredicate& g, const Schema& schema,
                                           std::span<const FeatureRow> rows) {
  const BoundPredicate bound(g, schema);
  std::vector<std::uint8_t> bits(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].values.size() != schema.size()) {
      throw SchemaError("row " + std::to_string(i) + " does not conform to schema");
    }
    bits[i] = bound.contains(rows[i]) ? 1 : 0;
  }
  return bits;
}

std::vector<std::uint8_t> group_membership(const GroupPredicate& g, const Dataset& data) {
  return group_membership(g, data.schema(), data.rows());
}

GroupClass::GroupClass(std::vector<GroupPredicate> groups) : groups_(std::move(groups)) {
  for (std::size_t i = 0; i < groups_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (groups_[i].name() == groups_[j].name()) {
        throw ConfigError("duplicate group name: " + groups_[i].name());
      }
    }
  }
  if (!index_of(GroupPredicate::kAllName)) {
    groups_.push_back(GroupPredicate::all());
  } else if (!require(GroupPredicate::kAllName).matches_all()) {
    throw ConfigError("group name ALL is reserved for the match-all group");
  }
}

GroupClass GroupClass::parse(std::span<const std::string> definitions) {
  std::vector<GroupPredicate> groups;
  groups.reserve(definitions.size());
  for (const auto& d : definitions) groups.push_back(GroupPredicate::parse(d));
  return GroupClass(std::move(groups));
}

std::optional<std::size_t> GroupClass::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < groups_.size(); ++i) {
    if (groups_[i].name() == name) return i;
  }
  return std::nullopt;
}

const GroupPredicate& GroupClass::require(std::string_view name) const {
  if (auto i = index_of(name)) return groups_[*i];
  throw ConfigError("unknown group: " + std::string(name));
}

std::vector<std::vector<std::size_t>> group_members(const GroupClass& groups,
                                                    const Dataset& data) {
  std::vector<std::vector<std::size_t>> members;
  members.reserve(groups.size());
  for (const auto& g : groups) {
    const BoundPredicate bound(g, data.schema());
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (bound.contains(data.row(i))) idx.push_back(i);
    }
    members.push_back(std::move(idx));
  }
  return members;
}

}  // namespace mgr
