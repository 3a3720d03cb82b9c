#include "mgr/distance.hpp"

#include <cmath>
#include <map>
#include <unordered_map>

#include "mgr/errors.hpp"

namespace mgr {

namespace {

struct Multiplicity {
  const FeatureRow* row = nullptr;
  std::int64_t left = 0;
  std::int64_t right = 0;
};

// Keyed by canonical row identity; std::map keeps iteration order fixed.
std::map<std::string, Multiplicity> count_rows(const Dataset& s, const Dataset& s2) {
  std::map<std::string, Multiplicity> counts;
  for (const auto& row : s.rows()) {
    auto& m = counts[canonical_key(s.schema(), row)];
    m.row = &row;
    ++m.left;
  }
  for (const auto& row : s2.rows()) {
    auto& m = counts[canonical_key(s.schema(), row)];
    if (!m.row) m.row = &row;
    ++m.right;
  }
  return counts;
}

}  // namespace

std::uint64_t multiset_symmetric_difference(const Dataset& s, const Dataset& s2,
                                            const GroupPredicate& g) {
  require_same_schema(s.schema(), s2.schema());
  const BoundPredicate bound(g, s.schema());
  std::uint64_t total = 0;
  for (const auto& [key, m] : count_rows(s, s2)) {
    if (bound.contains(*m.row)) {
      total += static_cast<std::uint64_t>(std::llabs(m.left - m.right));
    }
  }
  return total;
}

std::vector<std::uint64_t> multiset_symmetric_difference(const Dataset& s, const Dataset& s2,
                                                         const GroupClass& groups) {
  require_same_schema(s.schema(), s2.schema());
  std::vector<BoundPredicate> bound;
  bound.reserve(groups.size());
  for (const auto& g : groups) bound.emplace_back(g, s.schema());
  std::vector<std::uint64_t> totals(groups.size(), 0);
  for (const auto& [key, m] : count_rows(s, s2)) {
    if (m.left == m.right) continue;
    const auto diff = static_cast<std::uint64_t>(std::llabs(m.left - m.right));
    for (std::size_t gi = 0; gi < bound.size(); ++gi) {
      if (bound[gi].contains(*m.row)) totals[gi] += diff;
    }
  }
  return totals;
}

RowDistribution::RowDistribution(std::shared_ptr<const Schema> schema,
                                 std::vector<WeightedRow> entries)
    : schema_(std::move(schema)) {
  if (!schema_) throw SchemaError("distribution without schema");
  std::map<std::string, std::size_t> position;
  double total = 0.0;
  for (auto& e : entries) {
    if (e.row.values.size() != schema_->size()) {
      throw SchemaError("distribution row does not conform to schema");
    }
    if (!(e.probability >= 0.0) || !std::isfinite(e.probability)) {
      throw DataError("negative or non-finite probability");
    }
    total += e.probability;
    const auto key = canonical_key(*schema_, e.row);
    if (auto it = position.find(key); it != position.end()) {
      entries_[it->second].probability += e.probability;
    } else {
      position.emplace(key, entries_.size());
      entries_.push_back(std::move(e));
    }
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw DataError("distribution is not normalized (sum = " + std::to_string(total) + ")");
  }
}

double restricted_statistical_distance(const RowDistribution& d, const RowDistribution& d2,
                                       const GroupPredicate& g) {
  require_same_schema(d.schema(), d2.schema());
  const BoundPredicate bound(g, d.schema());
  struct Mass {
    const FeatureRow* row = nullptr;
    double left = 0.0;
    double right = 0.0;
  };
  std::map<std::string, Mass> mass;
  for (const auto& e : d.entries()) {
    auto& m = mass[canonical_key(d.schema(), e.row)];
    m.row = &e.row;
    m.left += e.probability;
  }
  for (const auto& e : d2.entries()) {
    auto& m = mass[canonical_key(d.schema(), e.row)];
    if (!m.row) m.row = &e.row;
    m.right += e.probability;
  }
  double total = 0.0;
  for (const auto& [key, m] : mass) {
    if (bound.contains(*m.row)) total += std::abs(m.left - m.right);
  }
  return total;
}

}  // namespace mgr
