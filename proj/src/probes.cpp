#include "mgr/probes.hpp"

#include <algorithm>
#include <cmath>

#include "mgr/errors.hpp"
#include "mgr/experiment.hpp"
#include "mgr/ma_boost.hpp"
#include "mgr/numeric.hpp"
#include "mgr/rng.hpp"
#include "mgr/synth.hpp"

namespace mgr {

namespace {

double mean(std::span<const double> v) {
  return v.empty() ? 0.0 : pairwise_sum(v) / static_cast<double>(v.size());
}

// E[p(x) 1[x in C]] and E[y 1[x in C]] over a dataset.
std::pair<double, double> group_expectations(std::span<const double> preds, const Dataset& data,
                                             std::span<const std::uint8_t> member) {
  std::vector<double> p(data.size());
  std::vector<double> y(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    p[i] = member[i] ? preds[i] : 0.0;
    y[i] = member[i] ? static_cast<double>(data.label(i)) : 0.0;
  }
  return {mean(p), mean(y)};
}

}  // namespace

ExpectationProbe accuracy_in_expectation_probe(const LearnerSpec& spec, const Dataset& train,
                                               std::span<const FeatureRow> eval_rows,
                                               double slack) {
  if (eval_rows.empty()) throw DataError("expectation probe needs evaluation rows");
  const auto zeros = train.with_labels(std::vector<Label>(train.size(), 0));
  const auto ones = train.with_labels(std::vector<Label>(train.size(), 1));
  const auto p0 = fit_predictor(spec, zeros).predict(eval_rows);
  auto p1 = fit_predictor(spec, ones).predict(eval_rows);
  for (auto& v : p1) v = 1.0 - v;
  ExpectationProbe probe;
  probe.learner = spec.name();
  probe.mean_p0 = mean(p0);
  probe.mean_one_minus_p1 = mean(p1);
  probe.slack = slack;
  probe.within_slack = probe.mean_p0 <= slack && probe.mean_one_minus_p1 <= slack;
  return probe;
}

ProbeReport theory_probes(const ExperimentConfig& cfg, const LoadedData& loaded) {
  ProbeReport report;
  const GroupClass& groups = loaded.groups;
  const Splits first = make_splits(loaded.data, cfg.splits, 0);
  for (const auto& spec : cfg.learners) {
    report.expectation.push_back(accuracy_in_expectation_probe(
        spec, first.train, first.test.rows(), cfg.probe.expectation_slack));
  }

  BoostConfig boost_cfg = cfg.boost;
  boost_cfg.epsilon = cfg.probe.epsilon;
  auto& uniform = report.uniform;
  uniform.epsilon2 = cfg.probe.epsilon2;
  for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
    const Splits splits = trial == 0 ? first : make_splits(loaded.data, cfg.splits, trial);
    std::optional<Dataset> fresh_store;
    if (cfg.data.synthetic) {
      SyntheticSpec fresh_spec = *cfg.data.synthetic;
      fresh_spec.n = cfg.probe.fresh_n;
      fresh_spec.seed = derive_seed(fresh_spec.seed, "fresh", trial);
      fresh_store = synthesize(fresh_spec);
    }
    const Dataset& fresh = fresh_store ? *fresh_store : splits.test;
    std::vector<std::vector<std::uint8_t>> train_members;
    std::vector<std::vector<std::uint8_t>> fresh_members;
    for (const auto& g : groups) {
      train_members.push_back(group_membership(g, splits.train));
      fresh_members.push_back(group_membership(g, fresh));
    }

    for (const auto& spec : cfg.learners) {
      const auto base = fit_predictor(spec, splits.train);
      const auto boosted = boost(base, splits.train, groups, boost_cfg).predictor;
      const std::pair<std::string, const PatchedPredictor*> outputs[] = {{"clf", &base},
                                                                         {"clf_pp", &boosted}};
      for (const auto& [variant, predictor] : outputs) {
        const std::string name =
            "trial" + std::to_string(trial) + "/" + spec.name() + "/" + variant;
        const auto train_preds = predictor->predict(splits.train);
        const auto fresh_preds = predictor->predict(fresh);
        ++uniform.predictors;
        for (std::size_t g = 0; g < groups.size(); ++g) {
          const auto [tp, ty] = group_expectations(train_preds, splits.train, train_members[g]);
          const auto [fp, fy] = group_expectations(fresh_preds, fresh, fresh_members[g]);
          const double deviation = std::max(std::abs(tp - fp), std::abs(ty - fy));
          if (deviation > uniform.max_deviation || uniform.worst_predictor.empty()) {
            uniform.max_deviation = deviation;
            uniform.worst_predictor = name;
            uniform.worst_group = groups[g].name();
          }
        }
      }
    }
  }
  uniform.within_epsilon2 = uniform.max_deviation <= uniform.epsilon2;

  auto& size = report.sample_size;
  size.family_size = cfg.probe.family_size;
  size.group_count = groups.size();
  size.epsilon = cfg.probe.epsilon;
  size.delta = cfg.probe.delta;
  size.required_n = required_sample_size(size.family_size, size.group_count, size.epsilon,
                                         size.delta);
  size.available_n = first.train.size();
  size.sufficient = size.available_n >= size.required_n;
  return report;
}

void to_json(nlohmann::json& j, const ExpectationProbe& p) {
  j = nlohmann::json{{"learner", p.learner},
                     {"mean_p0", p.mean_p0},
                     {"mean_one_minus_p1", p.mean_one_minus_p1},
                     {"slack", p.slack},
                     {"within_slack", p.within_slack}};
}

void to_json(nlohmann::json& j, const UniformConvergenceProbe& p) {
  j = nlohmann::json{{"max_deviation", p.max_deviation},
                     {"worst_predictor", p.worst_predictor},
                     {"worst_group", p.worst_group},
                     {"predictors", p.predictors},
                     {"epsilon2", p.epsilon2},
                     {"within_epsilon2", p.within_epsilon2}};
}

void to_json(nlohmann::json& j, const SampleSizeProbe& p) {
  j = nlohmann::json{{"family_size", p.family_size}, {"group_count", p.group_count},
                     {"epsilon", p.epsilon},         {"delta", p.delta},
                     {"required_n", p.required_n},   {"available_n", p.available_n},
                     {"sufficient", p.sufficient}};
}

void to_json(nlohmann::json& j, const ProbeReport& r) {
  j = nlohmann::json{{"record", "probe"},
                     {"expectation", r.expectation},
                     {"uniform_convergence", r.uniform},
                     {"sample_size", r.sample_size}};
}

}  // namespace mgr
