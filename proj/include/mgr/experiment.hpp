#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgr/config.hpp"
#include "mgr/csv_io.hpp"
#include "mgr/metrics.hpp"

namespace mgr {

inline constexpr const char* kVersion = "0.3.0";

/// Dataset and group class named by the config's data section.
LoadedData load_experiment_data(const ExperimentConfig& cfg);

struct Splits {
  Dataset train;
  Dataset validation;
  Dataset test;
  Dataset aux;
  std::optional<Dataset> postprocess;
};

/// Seeded shuffle of the rows, then consecutive blocks in the order
/// train, validation, test, aux, postprocess. Rounding leftovers go to train.
Splits make_splits(const Dataset& data, const SplitConfig& splits, std::uint64_t trial);

/// Applies the configured attack at one noise level. aux is required for
/// data_addition only.
Dataset apply_attack(const AttackConfig& attack, const GroupClass& groups, const Dataset& train,
                     const Dataset& aux, double level, std::uint64_t seed);

struct TrialResult {
  std::size_t trial = 0;
  std::size_t learner_index = 0;
  std::string learner;
  std::size_t noise_index = 0;
  double noise = 0.0;
  /// "clf" or "clf_pp"
  std::string variant;
  double gamma = 0.5;
  std::size_t boost_iterations = 0;
  /// Rows of the (possibly corrupted) set the model was fitted or boosted on.
  std::size_t train_size = 0;
  double train_l2 = 0.0;
  double test_l2 = 0.0;
  /// max over groups of |MA-err| on the post-processing split.
  double train_max_abs_ma_err = 0.0;
  std::vector<GroupReport> groups;
  /// Against the same variant trained on clean data.
  std::vector<RobustnessCheck> robustness;
};

void to_json(nlohmann::json& j, const TrialResult& r);

/// Runs every (trial, learner, noise level) cell. Results are sorted by
/// (trial, learner, noise, variant) whatever the thread count.
std::vector<TrialResult> run_experiment(const ExperimentConfig& cfg, const LoadedData& loaded,
                                        std::size_t threads = 1);
std::vector<TrialResult> run_experiment(const ExperimentConfig& cfg, std::size_t threads = 1);

/// Manifest line followed by one line per result.
std::string results_jsonl(const ExperimentConfig& cfg, const std::vector<TrialResult>& results);
void write_results(const std::filesystem::path& path, const ExperimentConfig& cfg,
                   const std::vector<TrialResult>& results);

}  // namespace mgr
