#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgr/dataset.hpp"

namespace mgr {

struct SyntheticCell {
  /// One token per group column.
  std::vector<std::string> tokens;
  double weight = 0.0;
  double positive_rate = 0.0;
};

/// Desk-scale stand-in for a census-style tabular task: categorical
/// demographic columns drawn from a weighted layout, a label drawn at a
/// per-cell rate, and numeric features that carry label signal.
struct SyntheticSpec {
  std::size_t n = 20000;
  std::vector<std::string> group_columns = {"race", "sex"};
  std::vector<SyntheticCell> layout;
  std::size_t nuisance_features = 4;
  /// Mean separation of the numeric features between the two labels.
  double signal = 0.6;
  std::uint64_t seed = 0;

  /// Race x sex layout with population shares close to a Louisiana census
  /// extract (White 0.71, Black 0.235, Asian 0.02, Male about half).
  static SyntheticSpec census_like(std::size_t n, std::uint64_t seed);
  void validate() const;
};

void from_json(const nlohmann::json& j, SyntheticSpec& spec);
void to_json(nlohmann::json& j, const SyntheticSpec& spec);

Dataset synthesize(const SyntheticSpec& spec);

}  // namespace mgr
