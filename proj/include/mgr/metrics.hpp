#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgr/dataset.hpp"
#include "mgr/distance.hpp"
#include "mgr/groups.hpp"
#include "mgr/predictor.hpp"

namespace mgr {

// MA-err uses the residual p(x) - y, i.e. the negation of the residual in
// the textbook multiaccuracy condition. Theorems are checked on |MA-err|.

/// (1/normalizer) * sum_i (pred_i - y_i) * member_i.
double ma_err(std::span<const double> preds, std::span<const Label> labels,
              std::span<const std::uint8_t> membership, std::size_t normalizer);

/// Normalizer defaults to |data|.
double ma_err(const PatchedPredictor& p, const Dataset& data, const GroupPredicate& g,
              std::optional<std::size_t> normalizer = std::nullopt);

/// Fraction of group rows with 1[pred > gamma] == label; nullopt for an
/// empty group.
std::optional<double> accuracy(std::span<const double> preds, std::span<const Label> labels,
                               std::span<const std::uint8_t> membership, double gamma);

std::optional<double> accuracy(const PatchedPredictor& p, const Dataset& data,
                               const GroupPredicate& g, double gamma);

/// {0.00, 0.01, ..., 1.00}
std::vector<double> default_gamma_grid();

/// Grid value maximizing overall accuracy; ties go to the smallest value.
double optimize_gamma(std::span<const double> preds, std::span<const Label> labels,
                      std::span<const double> grid);
double optimize_gamma(const PatchedPredictor& p, const Dataset& validation,
                      std::span<const double> grid);

struct GroupReport {
  std::string group;
  double ma_err = 0.0;
  double abs_ma_err = 0.0;
  std::optional<double> accuracy;
  std::size_t support = 0;

  bool empty() const { return support == 0; }
};

/// MA-err (normalized by |data|) and accuracy for each group.
std::vector<GroupReport> group_reports(std::span<const double> preds, const Dataset& data,
                                       const GroupClass& groups, double gamma);

struct RobustnessCheck {
  std::string group;
  double lhs = 0.0;
  double label_term = 0.0;
  double sym_diff_term = 0.0;
  double epsilon_slack = 0.0;
  bool satisfied = true;

  double bound() const { return label_term + sym_diff_term + epsilon_slack; }
};

/// Both sides of the dataset-corruption robustness inequality, per group.
/// lhs is estimated on eval_rows as a sample of the feature distribution;
/// both bound terms are normalized by n = |s| as written in the definition.
std::vector<RobustnessCheck> robustness_check(const PatchedPredictor& p,
                                              const PatchedPredictor& p2, const Dataset& s,
                                              const Dataset& s2,
                                              std::span<const FeatureRow> eval_rows,
                                              const GroupClass& groups, double eps);

struct LabeledPoint {
  FeatureRow row;
  Label label = 0;
  double probability = 0.0;
};

/// Discrete distribution over (row, label) pairs; validated on construction.
class LabeledDistribution {
 public:
  LabeledDistribution(std::shared_ptr<const Schema> schema, std::vector<LabeledPoint> points);

  const Schema& schema() const { return *schema_; }
  const std::shared_ptr<const Schema>& schema_ptr() const { return schema_; }
  const std::vector<LabeledPoint>& points() const { return points_; }
  RowDistribution marginal() const;

 private:
  std::shared_ptr<const Schema> schema_;
  std::vector<LabeledPoint> points_;
};

/// Distribution-shift variant: lhs is the exact expectation under the
/// feature marginal of d; the bound is the label-mass gap plus the
/// restricted statistical distance plus eps.
std::vector<RobustnessCheck> distshift_check(const PatchedPredictor& p,
                                             const PatchedPredictor& p2,
                                             const LabeledDistribution& d,
                                             const LabeledDistribution& d2,
                                             const GroupClass& groups, double eps);

void to_json(nlohmann::json& j, const GroupReport& r);
void to_json(nlohmann::json& j, const RobustnessCheck& c);

}  // namespace mgr
