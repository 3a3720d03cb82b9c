#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgr/dataset.hpp"
#include "mgr/metrics.hpp"
#include "mgr/predictor.hpp"

namespace mgr {

enum class LearnerKind {
  constant_mean,
  erm_two_constant,
  logistic_regression,
  knn,
  decision_tree,
  external_predictions,
};

std::string_view to_string(LearnerKind kind);
LearnerKind learner_kind_from_string(std::string_view name);

struct LogisticParams {
  double learning_rate = 0.1;
  std::size_t iterations = 500;
  double l2 = 1e-4;
};

struct KnnParams {
  std::size_t k = 5;
};

struct TreeParams {
  /// nullopt grows until leaves are pure or too small to split.
  std::optional<std::size_t> max_depth = 8;
  std::size_t min_leaf = 1;
};

struct ExternalParams {
  std::filesystem::path train_predictions;
  std::optional<std::filesystem::path> eval_predictions;
};

/// Everything a learner needs besides the data. Hyperparameters are fixed
/// up front; identical (spec, dataset) pairs always give identical models.
struct LearnerSpec {
  LearnerKind kind = LearnerKind::constant_mean;
  LogisticParams logistic;
  KnnParams knn;
  TreeParams tree;
  ExternalParams external;
  /// Columns the learner sees; empty means every column.
  std::vector<std::string> features;
  std::uint64_t seed = 0;

  std::string name() const { return std::string(to_string(kind)); }
};

void from_json(const nlohmann::json& j, LearnerSpec& spec);
void to_json(nlohmann::json& j, const LearnerSpec& spec);

/// Train a base model on s. External-prediction specs need the evaluation
/// dataset too; use external_predictions_learner for those.
std::shared_ptr<const Model> fit(const LearnerSpec& spec, const Dataset& s);

/// Builds a patch-free predictor around fit(spec, s).
PatchedPredictor fit_predictor(const LearnerSpec& spec, const Dataset& s);

/// Reads a one-column CSV with header `prediction`.
std::vector<double> read_prediction_file(const std::filesystem::path& path);
void write_prediction_file(const std::filesystem::path& path, std::span<const double> preds);

/// Lookup-backed model keyed by canonical row identity. Each file must be
/// row-aligned with its dataset and hold values in [0, 1]. Predicting a row
/// that appears in neither dataset throws DataError.
std::shared_ptr<const Model> external_predictions_learner(const Dataset& train,
                                                          std::span<const double> train_preds,
                                                          const Dataset* eval = nullptr,
                                                          std::span<const double> eval_preds = {});
std::shared_ptr<const Model> external_predictions_learner(
    const std::filesystem::path& train_predictions, const Dataset& train,
    const std::optional<std::filesystem::path>& eval_predictions = std::nullopt,
    const Dataset* eval = nullptr);

/// The majority-label counterexample: a balanced dataset, the two-constant
/// ERM learner, and a handful of flipped zero labels.
struct ErmFlipDemo {
  double p_before = 0.0;
  double p_after = 0.0;
  RobustnessCheck check_all;
};

ErmFlipDemo erm_flip_demo(std::size_t n, std::size_t flips, double eps);

}  // namespace mgr
