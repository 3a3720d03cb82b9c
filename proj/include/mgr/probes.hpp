#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgr/config.hpp"
#include "mgr/csv_io.hpp"
#include "mgr/learners.hpp"

namespace mgr {

/// Mean of p0 = A(all-zero labels) and of 1 - p1 = 1 - A(all-one labels)
/// over eval rows. A learner that is accurate in expectation keeps both
/// near 0.
struct ExpectationProbe {
  std::string learner;
  double mean_p0 = 0.0;
  double mean_one_minus_p1 = 0.0;
  double slack = 0.0;
  bool within_slack = false;
};

ExpectationProbe accuracy_in_expectation_probe(const LearnerSpec& spec, const Dataset& train,
                                               std::span<const FeatureRow> eval_rows,
                                               double slack);

/// Largest gap between empirical and fresh-sample group expectations of
/// p(x) 1[x in C] and y 1[x in C], over every (predictor, group) produced.
struct UniformConvergenceProbe {
  double max_deviation = 0.0;
  std::string worst_predictor;
  std::string worst_group;
  std::size_t predictors = 0;
  double epsilon2 = 0.0;
  bool within_epsilon2 = false;
};

struct SampleSizeProbe {
  double family_size = 0.0;
  std::size_t group_count = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  std::size_t required_n = 0;
  std::size_t available_n = 0;
  bool sufficient = false;
};

struct ProbeReport {
  std::vector<ExpectationProbe> expectation;
  UniformConvergenceProbe uniform;
  SampleSizeProbe sample_size;
};

void to_json(nlohmann::json& j, const ExpectationProbe& p);
void to_json(nlohmann::json& j, const UniformConvergenceProbe& p);
void to_json(nlohmann::json& j, const SampleSizeProbe& p);
void to_json(nlohmann::json& j, const ProbeReport& r);

ProbeReport theory_probes(const ExperimentConfig& cfg, const LoadedData& loaded);

}  // namespace mgr
