#pragma once

// Multiaccuracy boosting on the empirical distribution.
//
// Starting from a base predictor, repeatedly audit every group on the
// training sample. While some group has |(1/n) sum (p(x_i) - y_i) 1[x_i in C]|
// above epsilon, shift the predictions on that group by epsilon against the
// sign of the residual and clip to [0, 1]. Each step lowers the empirical
// squared error by at least epsilon^2, so the loop ends within 1/epsilon^2
// steps with every group within epsilon.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgr/dataset.hpp"
#include "mgr/groups.hpp"
#include "mgr/predictor.hpp"

namespace mgr {

struct BoostConfig {
  double epsilon = 0.01;
  /// Safety cap only; defaults to iteration_bound(epsilon) + 1.
  std::optional<std::size_t> max_iterations;

  void validate() const;
};

/// ceil(1 / epsilon^2), the most while-loop iterations boosting can take.
std::size_t iteration_bound(double epsilon);

struct AuditFinding {
  std::size_t group_index = 0;
  std::string group;
  /// (1/n) sum (p(x_i) - y_i) 1[x_i in C]
  double violation = 0.0;
};

/// The group with the largest |violation| strictly above eps (earliest
/// group wins ties), or nullopt when every group is within eps.
std::optional<AuditFinding> audit(const PatchedPredictor& p, const Dataset& s,
                                  const GroupClass& groups, double eps);

struct TraceStep {
  std::size_t iteration = 0;
  std::string group;
  double violation = 0.0;
  int sign = 0;
  double loss_before = 0.0;
  double loss_after = 0.0;
};

struct BoostTrace {
  std::vector<TraceStep> steps;
  double initial_loss = 0.0;
  double final_loss = 0.0;

  std::size_t iterations() const { return steps.size(); }
  /// One JSON object per step, newline terminated.
  std::string to_jsonl() const;
};

struct BoostResult {
  PatchedPredictor predictor;
  BoostTrace trace;
};

BoostResult boost(const PatchedPredictor& base, const Dataset& s, const GroupClass& groups,
                  const BoostConfig& config);

/// (1/n) sum (y_i - p(x_i))^2
double empirical_l2(std::span<const double> preds, std::span<const Label> labels);
double empirical_l2(const PatchedPredictor& p, const Dataset& s);

/// Smallest n with n >= ln(|P| (2|C|)^(1/eps^2 + 1) / delta) / (2 eps^2).
std::size_t required_sample_size(double family_size, std::size_t group_count, double eps,
                                 double delta);

void to_json(nlohmann::json& j, const TraceStep& step);

}  // namespace mgr
