#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mgr/dataset.hpp"
#include "mgr/groups.hpp"

namespace mgr {

/// Sum over rows x in g of |mu_S(x) - mu_S2(x)|, where mu counts how many
/// times a feature row occurs. Labels are ignored.
std::uint64_t multiset_symmetric_difference(const Dataset& s, const Dataset& s2,
                                            const GroupPredicate& g);

/// Same quantity for every group of a class in one pass over the rows.
std::vector<std::uint64_t> multiset_symmetric_difference(const Dataset& s,
                                                         const Dataset& s2,
                                                         const GroupClass& groups);

struct WeightedRow {
  FeatureRow row;
  double probability = 0.0;
};

/// Discrete distribution over feature rows. Entries with the same row are
/// merged; probabilities must be non-negative and sum to 1 within 1e-9.
class RowDistribution {
 public:
  RowDistribution(std::shared_ptr<const Schema> schema, std::vector<WeightedRow> entries);

  const Schema& schema() const { return *schema_; }
  const std::vector<WeightedRow>& entries() const { return entries_; }

 private:
  std::shared_ptr<const Schema> schema_;
  std::vector<WeightedRow> entries_;
};

/// Sum over support points x in g of |Pr_D[x] - Pr_D2[x]|. Points missing
/// from one support count as probability zero there.
double restricted_statistical_distance(const RowDistribution& d, const RowDistribution& d2,
                                       const GroupPredicate& g);

}  // namespace mgr
