#include "mgr/config.hpp"

#include <cmath>
#include <fstream>

#include "mgr/errors.hpp"
#include "mgr/metrics.hpp"

namespace mgr {

namespace {

constexpr std::pair<AttackKind, std::string_view> kAttackNames[] = {
    {AttackKind::none, "none"},
    {AttackKind::label_change, "label_change"},
    {AttackKind::data_addition, "data_addition"},
    {AttackKind::deletion, "deletion"},
};

std::string_view attack_name(AttackKind kind) {
  for (const auto& [k, name] : kAttackNames) {
    if (k == kind) return name;
  }
  return "none";
}

AttackKind attack_from_string(const std::string& name) {
  for (const auto& [k, n] : kAttackNames) {
    if (n == name) return k;
  }
  throw ConfigError("unknown attack kind: " + name);
}

FlipTarget parse_target(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "any" || s == "*") return FlipTarget::any;
    if (s == "0") return FlipTarget::zero;
    if (s == "1") return FlipTarget::one;
    throw ConfigError("flip target must be 0, 1 or \"any\"");
  }
  return flip_target_from_json_value(j.get<int>());
}

nlohmann::json target_json(FlipTarget t) {
  switch (t) {
    case FlipTarget::zero: return 0;
    case FlipTarget::one: return 1;
    case FlipTarget::any: return "any";
  }
  return nullptr;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j,
                                             const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  try {
    const auto& data = j.at("data");
    if (data.contains("csv")) {
      std::filesystem::path p = data.at("csv").get<std::string>();
      cfg.data.csv = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
    if (data.contains("synthetic")) cfg.data.synthetic = data.at("synthetic").get<SyntheticSpec>();
    cfg.data.label_column = data.value("label_column", cfg.data.label_column);
    cfg.data.groups = data.value("groups", std::vector<std::string>{});

    if (j.contains("splits")) {
      const auto& s = j.at("splits");
      cfg.splits.train = s.value("train", cfg.splits.train);
      cfg.splits.validation = s.value("validation", cfg.splits.validation);
      cfg.splits.test = s.value("test", cfg.splits.test);
      cfg.splits.aux = s.value("aux", cfg.splits.aux);
      cfg.splits.postprocess = s.value("postprocess", cfg.splits.postprocess);
      cfg.splits.seed = s.value("seed", cfg.splits.seed);
    }

    if (j.contains("learners")) {
      cfg.learners = j.at("learners").get<std::vector<LearnerSpec>>();
    } else {
      LearnerSpec lr;
      lr.kind = LearnerKind::logistic_regression;
      cfg.learners.push_back(lr);
    }

    if (j.contains("boost")) {
      const auto& b = j.at("boost");
      cfg.boost.epsilon = b.value("epsilon", cfg.boost.epsilon);
      if (b.contains("max_iterations") && !b.at("max_iterations").is_null()) {
        cfg.boost.max_iterations = b.at("max_iterations").get<std::size_t>();
      }
      cfg.fresh_split = b.value("fresh_split", false);
    }

    if (j.contains("attack")) {
      const auto& a = j.at("attack");
      cfg.attack.kind = attack_from_string(a.value("kind", std::string("none")));
      if (a.contains("target")) cfg.attack.target = parse_target(a.at("target"));
      cfg.attack.modify_group = a.value("modify_group", std::string{});
      cfg.attack.target_group = a.value("target_group", std::string{});
      cfg.attack.noise_levels = a.value("noise_levels", cfg.attack.noise_levels);
      cfg.attack.num_clusters = a.value("num_clusters", cfg.attack.num_clusters);
      cfg.attack.cluster_threshold = a.value("cluster_threshold", cfg.attack.cluster_threshold);
      cfg.attack.cluster_columns = a.value("cluster_columns", std::vector<std::string>{});
    }

    cfg.metrics.gamma_grid = default_gamma_grid();
    if (j.contains("metrics")) {
      const auto& m = j.at("metrics");
      cfg.metrics.gamma_grid = m.value("gamma_grid", cfg.metrics.gamma_grid);
      cfg.metrics.epsilon_slack = m.value("epsilon_slack", cfg.metrics.epsilon_slack);
    }

    cfg.trials = j.value("trials", cfg.trials);
    if (j.contains("output") && !j.at("output").is_null()) {
      cfg.output = j.at("output").get<std::string>();
    }

    if (j.contains("probe")) {
      const auto& p = j.at("probe");
      cfg.probe.epsilon = p.value("epsilon", cfg.probe.epsilon);
      cfg.probe.family_size = p.value("family_size", cfg.probe.family_size);
      cfg.probe.delta = p.value("delta", cfg.probe.delta);
      cfg.probe.epsilon2 = p.value("epsilon2", cfg.probe.epsilon2);
      cfg.probe.expectation_slack = p.value("expectation_slack", cfg.probe.expectation_slack);
      cfg.probe.fresh_n = p.value("fresh_n", cfg.probe.fresh_n);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path());
}

void ExperimentConfig::validate() const {
  if (data.csv.has_value() == data.synthetic.has_value()) {
    throw ConfigError("data needs exactly one of `csv` or `synthetic`");
  }
  const double total =
      splits.train + splits.validation + splits.test + splits.aux + splits.postprocess;
  for (const double f : {splits.train, splits.validation, splits.test, splits.aux,
                         splits.postprocess}) {
    if (!(f >= 0.0)) throw ConfigError("split fractions must be non-negative");
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");
  if (!(splits.train > 0.0)) throw ConfigError("the training split must be non-empty");
  if (learners.empty()) throw ConfigError("at least one learner is required");
  boost.validate();
  if (fresh_split && !(splits.postprocess > 0.0)) {
    throw ConfigError("fresh_split needs a positive `postprocess` split fraction");
  }
  if (trials == 0) throw ConfigError("trials must be positive");
  if (metrics.gamma_grid.empty()) throw ConfigError("gamma grid is empty");
  if (!(metrics.epsilon_slack >= 0.0)) throw ConfigError("epsilon_slack must be non-negative");
  if (attack.noise_levels.empty()) throw ConfigError("attack needs at least one noise level");
  switch (attack.kind) {
    case AttackKind::none:
      break;
    case AttackKind::label_change:
    case AttackKind::deletion:
      if (attack.modify_group.empty()) throw ConfigError("attack needs `modify_group`");
      for (const double level : attack.noise_levels) {
        if (!(level >= 0.0 && level <= 1.0)) throw ConfigError("noise levels must lie in [0, 1]");
      }
      break;
    case AttackKind::data_addition:
      if (attack.modify_group.empty() || attack.target_group.empty()) {
        throw ConfigError("data_addition needs `modify_group` and `target_group`");
      }
      if (!(splits.aux > 0.0)) throw ConfigError("data_addition needs a positive aux split");
      for (const double level : attack.noise_levels) {
        if (!(level >= 0.0) || level != std::floor(level)) {
          throw ConfigError("data_addition noise levels are non-negative integers");
        }
      }
      if (attack.num_clusters == 0) throw ConfigError("num_clusters must be positive");
      break;
  }
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  auto& d = j["data"];
  if (data.csv) d["csv"] = data.csv->generic_string();
  if (data.synthetic) d["synthetic"] = *data.synthetic;
  d["label_column"] = data.label_column;
  d["groups"] = data.groups;
  j["splits"] = {{"train", splits.train},   {"validation", splits.validation},
                 {"test", splits.test},     {"aux", splits.aux},
                 {"postprocess", splits.postprocess}, {"seed", splits.seed}};
  j["learners"] = learners;
  j["boost"] = {{"epsilon", boost.epsilon},
                {"max_iterations",
                 boost.max_iterations ? nlohmann::json(*boost.max_iterations) : nlohmann::json()},
                {"fresh_split", fresh_split}};
  j["attack"] = {{"kind", std::string(attack_name(attack.kind))},
                 {"target", target_json(attack.target)},
                 {"modify_group", attack.modify_group},
                 {"target_group", attack.target_group},
                 {"noise_levels", attack.noise_levels},
                 {"num_clusters", attack.num_clusters},
                 {"cluster_threshold", attack.cluster_threshold},
                 {"cluster_columns", attack.cluster_columns}};
  j["metrics"] = {{"gamma_grid", metrics.gamma_grid}, {"epsilon_slack", metrics.epsilon_slack}};
  j["trials"] = trials;
  j["output"] = output ? nlohmann::json(output->generic_string()) : nlohmann::json();
  j["probe"] = {{"epsilon", probe.epsilon},
                {"family_size", probe.family_size},
                {"delta", probe.delta},
                {"epsilon2", probe.epsilon2},
                {"expectation_slack", probe.expectation_slack},
                {"fresh_n", probe.fresh_n}};
  return j;
}

}  // namespace mgr
