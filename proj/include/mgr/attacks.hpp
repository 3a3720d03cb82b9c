#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mgr/dataset.hpp"
#include "mgr/groups.hpp"

namespace mgr {

/// Which labels an attack may flip: only 0s, only 1s, or any.
enum class FlipTarget { zero, one, any };

FlipTarget flip_target_from_json_value(int value);  // 0, 1; anything else is invalid
bool flip_target_matches(FlipTarget t, Label y);

struct LabelChangeSpec {
  FlipTarget target = FlipTarget::zero;
  GroupPredicate modify_group = GroupPredicate::all();
  double noise_ratio = 0.0;
  std::uint64_t seed = 0;
};

/// One uniform draw per row in row order; a row in modify_group whose label
/// matches the target flips when its draw is below the noise ratio. Rows and
/// order are untouched.
Dataset label_change(const Dataset& s, const LabelChangeSpec& spec);

struct KMeansResult {
  std::vector<std::size_t> assignments;
  /// k x dim, row-major
  std::vector<double> centers;
  std::size_t dimension = 0;
  std::size_t iterations = 0;
  /// Total squared distance after each assignment step.
  std::vector<double> distortion_history;
};

/// Lloyd's algorithm on a row-major n x dim matrix with farthest-point
/// initialization: the first center is row 0, each next center is the row
/// farthest from the chosen ones (lowest index on ties). Stops when the
/// assignment is stable or after max_iterations rounds.
KMeansResult kmeans(std::span<const double> points, std::size_t dimension, std::size_t k,
                    std::size_t max_iterations = 100);

struct DataAdditionSpec {
  GroupPredicate modify_group;
  GroupPredicate target_group;
  std::size_t noise_factor = 1;
  std::size_t num_clusters = 10;
  std::size_t cluster_threshold = 5;
  FlipTarget target = FlipTarget::zero;
  /// Columns the clustering sees; empty means all columns.
  std::vector<std::string> cluster_columns;
};

struct DataAdditionResult {
  Dataset corrupted;
  Dataset additions;
  std::vector<std::size_t> qualifying_clusters;
};

/// Clusters aux, and for every cluster holding at least cluster_threshold
/// target-group rows appends each matching modify-group aux row with its
/// label flipped, noise_factor times, after the rows of s.
DataAdditionResult data_addition(const Dataset& s, const Dataset& aux,
                                 const DataAdditionSpec& spec);

struct DeletionSpec {
  GroupPredicate group = GroupPredicate::all();
  double fraction = 0.0;
  std::uint64_t seed = 0;
};

/// Removes floor(fraction * |group rows|) uniformly chosen group rows.
Dataset deletion(const Dataset& s, const DeletionSpec& spec);

}  // namespace mgr
