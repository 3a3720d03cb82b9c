#include "mgr/attacks.hpp"

#include <algorithm>
#include <cmath>

#include "mgr/encoding.hpp"
#include "mgr/errors.hpp"
#include "mgr/rng.hpp"

namespace mgr {

FlipTarget flip_target_from_json_value(int value) {
  switch (value) {
    case 0: return FlipTarget::zero;
    case 1: return FlipTarget::one;
    default: throw ConfigError("flip target must be 0, 1 or \"any\"");
  }
}

bool flip_target_matches(FlipTarget t, Label y) {
  switch (t) {
    case FlipTarget::zero: return y == 0;
    case FlipTarget::one: return y == 1;
    case FlipTarget::any: return true;
  }
  return false;
}

Dataset label_change(const Dataset& s, const LabelChangeSpec& spec) {
  if (!(spec.noise_ratio >= 0.0 && spec.noise_ratio <= 1.0)) {
    throw ConfigError("noise ratio must lie in [0, 1]");
  }
  const BoundPredicate group(spec.modify_group, s.schema());
  CounterRng rng(spec.seed);
  std::vector<Label> labels = s.labels();
  for (std::size_t i = 0; i < s.size(); ++i) {
    // Every row consumes one draw so streams stay aligned across noise ratios.
    const double z = rng.uniform();
    if (z < spec.noise_ratio && flip_target_matches(spec.target, labels[i]) &&
        group.contains(s.row(i))) {
      labels[i] = static_cast<Label>(1 - labels[i]);
    }
  }
  return s.with_labels(std::move(labels));
}

DataAdditionResult data_addition(const Dataset& s, const Dataset& aux,
                                 const DataAdditionSpec& spec) {
  if (aux.empty()) throw DataError("data addition needs a non-empty auxiliary set");
  if (spec.noise_factor == 0) throw ConfigError("noise factor must be at least 1");
  require_same_schema(s.schema(), aux.schema());

  const BoundPredicate modify(spec.modify_group, s.schema());
  const BoundPredicate target(spec.target_group, s.schema());
  for (const Dataset* d : {&s, &aux}) {
    for (const auto& row : d->rows()) {
      if (modify.contains(row) && target.contains(row)) {
        throw ConfigError("modify group '" + spec.modify_group.name() + "' and target group '" +
                          spec.target_group.name() + "' overlap");
      }
    }
  }

  const FeatureEncoder encoder = spec.cluster_columns.empty()
                                     ? FeatureEncoder(aux)
                                     : FeatureEncoder(aux, spec.cluster_columns);
  const auto matrix = encoder.encode_all(aux.rows());
  const auto clusters = kmeans(matrix, encoder.dimension(), spec.num_clusters);

  std::vector<std::size_t> target_count(spec.num_clusters, 0);
  for (std::size_t i = 0; i < aux.size(); ++i) {
    if (target.contains(aux.row(i))) ++target_count[clusters.assignments[i]];
  }

  DataAdditionResult out{s, Dataset(s.schema_ptr(), {}, {}), {}};
  std::vector<FeatureRow> rows;
  std::vector<Label> labels;
  for (std::size_t c = 0; c < spec.num_clusters; ++c) {
    if (target_count[c] < spec.cluster_threshold) continue;
    out.qualifying_clusters.push_back(c);
    for (std::size_t i = 0; i < aux.size(); ++i) {
      if (clusters.assignments[i] != c || !modify.contains(aux.row(i))) continue;
      if (!flip_target_matches(spec.target, aux.label(i))) continue;
      const auto flipped = static_cast<Label>(1 - aux.label(i));
      for (std::size_t r = 0; r < spec.noise_factor; ++r) {
        rows.push_back(aux.row(i));
        labels.push_back(flipped);
      }
    }
  }
  out.additions = Dataset(s.schema_ptr(), std::move(rows), std::move(labels));
  out.corrupted = s.concat(out.additions);
  return out;
}

Dataset deletion(const Dataset& s, const DeletionSpec& spec) {
  if (!(spec.fraction >= 0.0 && spec.fraction <= 1.0)) {
    throw ConfigError("deletion fraction must lie in [0, 1]");
  }
  const BoundPredicate group(spec.group, s.schema());
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (group.contains(s.row(i))) members.push_back(i);
  }
  const auto remove =
      static_cast<std::size_t>(std::floor(spec.fraction * static_cast<double>(members.size())));
  // Partial Fisher-Yates: the first `remove` slots become the deleted rows.
  CounterRng rng(spec.seed);
  for (std::size_t r = 0; r < remove; ++r) {
    const std::size_t pick = r + rng.below(members.size() - r);
    std::swap(members[r], members[pick]);
  }
  std::vector<bool> drop(s.size(), false);
  for (std::size_t r = 0; r < remove; ++r) drop[members[r]] = true;
  std::vector<std::size_t> keep;
  keep.reserve(s.size() - remove);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!drop[i]) keep.push_back(i);
  }
  return s.subset(keep);
}

}  // namespace mgr
