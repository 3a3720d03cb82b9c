#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgr/attacks.hpp"
#include "mgr/learners.hpp"
#include "mgr/ma_boost.hpp"
#include "mgr/synth.hpp"

namespace mgr {

struct DataSourceConfig {
  /// Exactly one of csv / synthetic is set.
  std::optional<std::filesystem::path> csv;
  std::string label_column = "label";
  std::optional<SyntheticSpec> synthetic;
  std::vector<std::string> groups;
};

/// Fractions of the shuffled dataset. A zero validation or test fraction
/// makes that split fall back to the training split.
struct SplitConfig {
  double train = 0.5;
  double validation = 0.15;
  double test = 0.2;
  double aux = 0.15;
  /// Held-out split for post-processing on fresh data.
  double postprocess = 0.0;
  std::uint64_t seed = 0;
};

enum class AttackKind { none, label_change, data_addition, deletion };

struct AttackConfig {
  AttackKind kind = AttackKind::none;
  FlipTarget target = FlipTarget::zero;
  /// label_change, data_addition: modify group; deletion: group to thin out.
  std::string modify_group;
  std::string target_group;
  /// sigma for label_change, alpha for data_addition, fraction for
  /// deletion. Level 0 always means the clean dataset.
  std::vector<double> noise_levels = {0.0};
  std::size_t num_clusters = 10;
  std::size_t cluster_threshold = 5;
  std::vector<std::string> cluster_columns;
};

struct MetricsConfig {
  std::vector<double> gamma_grid;
  double epsilon_slack = 0.05;
};

struct ProbeConfig {
  double epsilon = 0.05;
  /// Nominal |P| for the base learner family.
  double family_size = 1e6;
  double delta = 0.05;
  /// Tolerance for the uniform-convergence deviation.
  double epsilon2 = 0.05;
  /// Tolerance for the accuracy-in-expectation means.
  double expectation_slack = 0.05;
  /// Fresh synthetic sample size for the uniform-convergence probe.
  std::size_t fresh_n = 20000;
};

struct ExperimentConfig {
  DataSourceConfig data;
  SplitConfig splits;
  std::vector<LearnerSpec> learners;
  BoostConfig boost;
  bool fresh_split = false;
  AttackConfig attack;
  MetricsConfig metrics;
  std::size_t trials = 1;
  std::optional<std::filesystem::path> output;
  ProbeConfig probe;

  /// Relative csv paths resolve against base_dir. Throws ConfigError.
  static ExperimentConfig from_json(const nlohmann::json& j,
                                    const std::filesystem::path& base_dir = {});
  static ExperimentConfig load(const std::filesystem::path& path);

  /// Fully resolved config, defaults included.
  nlohmann::json to_json() const;
  void validate() const;
};

}  // namespace mgr
