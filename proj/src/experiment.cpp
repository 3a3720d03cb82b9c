#include "mgr/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>
#include <thread>

#include "mgr/attacks.hpp"
#include "mgr/errors.hpp"
#include "mgr/learners.hpp"
#include "mgr/ma_boost.hpp"
#include "mgr/rng.hpp"
#include "mgr/synth.hpp"

namespace mgr {

namespace {

std::string_view attack_purpose(AttackKind kind) {
  switch (kind) {
    case AttackKind::none: return "attack:none";
    case AttackKind::label_change: return "attack:label_change";
    case AttackKind::data_addition: return "attack:data_addition";
    case AttackKind::deletion: return "attack:deletion";
  }
  return "attack";
}

// Rethrows the active mgr error with a context prefix, keeping its type.
[[noreturn]] void rethrow_with_context(const std::string& context) {
  try {
    throw;
  } catch (const ConfigError& e) {
    throw ConfigError(context + ": " + e.what());
  } catch (const SchemaError& e) {
    throw SchemaError(context + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(context + ": " + e.what());
  } catch (const InvariantError& e) {
    throw InvariantError(context + ": " + e.what());
  }
}

struct Fitted {
  PatchedPredictor base;
  PatchedPredictor boosted;
  std::size_t iterations = 0;
};

Fitted fit_and_boost(const LearnerSpec& spec, const Dataset& fit_on, const Dataset& boost_on,
                     const GroupClass& groups, const BoostConfig& config) {
  auto base = fit_predictor(spec, fit_on);
  auto result = boost(base, boost_on, groups, config);
  return Fitted{std::move(base), std::move(result.predictor), result.trace.iterations()};
}

double max_abs_ma_err(std::span<const double> preds, const Dataset& data,
                      const GroupClass& groups) {
  double worst = 0.0;
  for (const auto& g : groups) {
    const auto member = group_membership(g, data);
    worst = std::max(worst, std::abs(ma_err(preds, data.labels(), member, data.size())));
  }
  return worst;
}

TrialResult summarize(const PatchedPredictor& clean, const PatchedPredictor& corrupt,
                      const Dataset& clean_train, const Dataset& corrupt_train,
                      const Dataset& boost_set, const Splits& splits, const GroupClass& groups,
                      double gamma, double epsilon_slack) {
  TrialResult r;
  r.gamma = gamma;
  r.train_size = corrupt_train.size();
  const auto train_preds = corrupt.predict(corrupt_train);
  r.train_l2 = empirical_l2(train_preds, corrupt_train.labels());
  const auto test_preds = corrupt.predict(splits.test);
  r.test_l2 = empirical_l2(test_preds, splits.test.labels());
  r.train_max_abs_ma_err = &boost_set == &corrupt_train
                               ? max_abs_ma_err(train_preds, corrupt_train, groups)
                               : max_abs_ma_err(corrupt.predict(boost_set), boost_set, groups);
  r.groups = group_reports(test_preds, splits.test, groups, gamma);
  r.robustness = robustness_check(clean, corrupt, clean_train, corrupt_train, splits.test.rows(),
                                  groups, epsilon_slack);
  return r;
}

std::vector<TrialResult> run_cell(const ExperimentConfig& cfg, const LoadedData& loaded,
                                  std::size_t trial, std::size_t learner_index) {
  const LearnerSpec& spec = cfg.learners[learner_index];
  const GroupClass& groups = loaded.groups;
  const Splits splits = make_splits(loaded.data, cfg.splits, trial);
  const Dataset& clean_train = splits.train;
  const auto boost_set = [&](const Dataset& train) -> const Dataset& {
    return cfg.fresh_split ? *splits.postprocess : train;
  };

  const Fitted clean = fit_and_boost(spec, clean_train, boost_set(clean_train), groups, cfg.boost);
  const double gamma_clf = optimize_gamma(clean.base, splits.validation, cfg.metrics.gamma_grid);
  const double gamma_pp = optimize_gamma(clean.boosted, splits.validation, cfg.metrics.gamma_grid);
  const std::uint64_t attack_seed =
      derive_seed(cfg.splits.seed, attack_purpose(cfg.attack.kind), trial);

  std::vector<TrialResult> out;
  for (std::size_t noise_index = 0; noise_index < cfg.attack.noise_levels.size(); ++noise_index) {
    const double level = cfg.attack.noise_levels[noise_index];
    const bool attacked = cfg.attack.kind != AttackKind::none && level != 0.0;
    std::optional<Dataset> corrupted_store;
    std::optional<Fitted> corrupted_fit;
    if (attacked) {
      corrupted_store = apply_attack(cfg.attack, groups, clean_train, splits.aux, level, attack_seed);
      corrupted_fit = fit_and_boost(spec, *corrupted_store, boost_set(*corrupted_store), groups,
                                    cfg.boost);
    }
    const Dataset& train = attacked ? *corrupted_store : clean_train;
    const Fitted& fitted = attacked ? *corrupted_fit : clean;

    auto clf = summarize(clean.base, fitted.base, clean_train, train, boost_set(train), splits,
                         groups, gamma_clf, cfg.metrics.epsilon_slack);
    clf.variant = "clf";
    auto pp = summarize(clean.boosted, fitted.boosted, clean_train, train, boost_set(train),
                        splits, groups, gamma_pp, cfg.metrics.epsilon_slack);
    pp.variant = "clf_pp";
    pp.boost_iterations = fitted.iterations;
    for (auto* r : {&clf, &pp}) {
      r->trial = trial;
      r->learner_index = learner_index;
      r->learner = spec.name();
      r->noise_index = noise_index;
      r->noise = level;
      out.push_back(std::move(*r));
    }
  }
  return out;
}

}  // namespace

LoadedData load_experiment_data(const ExperimentConfig& cfg) {
  if (cfg.data.csv) return load_csv(*cfg.data.csv, cfg.data.label_column, cfg.data.groups);
  Dataset data = synthesize(*cfg.data.synthetic);
  GroupClass groups = GroupClass::parse(cfg.data.groups);
  for (const auto& g : groups) BoundPredicate(g, data.schema());
  return LoadedData{std::move(data), std::move(groups)};
}

Splits make_splits(const Dataset& data, const SplitConfig& cfg, std::uint64_t trial) {
  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  CounterRng rng(derive_seed(cfg.seed, "split", trial));
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  const auto count = [n](double fraction) {
    return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  };
  const std::size_t n_val = count(cfg.validation);
  const std::size_t n_test = count(cfg.test);
  const std::size_t n_aux = count(cfg.aux);
  const std::size_t n_post = count(cfg.postprocess);
  if (n_val + n_test + n_aux + n_post >= n) {
    throw DataError("dataset of " + std::to_string(n) + " rows is too small for the splits");
  }
  const std::size_t n_train = n - n_val - n_test - n_aux - n_post;

  std::size_t at = 0;
  const auto take = [&](std::size_t k) {
    std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(at),
                                 order.begin() + static_cast<std::ptrdiff_t>(at + k));
    at += k;
    std::sort(idx.begin(), idx.end());
    return data.subset(idx);
  };
  Dataset train = take(n_train);
  Dataset validation = n_val > 0 ? take(n_val) : train;
  Dataset test = n_test > 0 ? take(n_test) : train;
  Dataset aux = take(n_aux);
  std::optional<Dataset> post;
  if (n_post > 0) post = take(n_post);
  return Splits{std::move(train), std::move(validation), std::move(test), std::move(aux),
                std::move(post)};
}

Dataset apply_attack(const AttackConfig& attack, const GroupClass& groups, const Dataset& train,
                     const Dataset& aux, double level, std::uint64_t seed) {
  if (level == 0.0) return train;
  switch (attack.kind) {
    case AttackKind::none:
      return train;
    case AttackKind::label_change:
      return label_change(train,
                          LabelChangeSpec{attack.target, groups.require(attack.modify_group),
                                          level, seed});
    case AttackKind::data_addition: {
      DataAdditionSpec spec;
      spec.modify_group = groups.require(attack.modify_group);
      spec.target_group = groups.require(attack.target_group);
      spec.noise_factor = static_cast<std::size_t>(level);
      spec.num_clusters = attack.num_clusters;
      spec.cluster_threshold = attack.cluster_threshold;
      spec.target = attack.target;
      spec.cluster_columns = attack.cluster_columns;
      return data_addition(train, aux, spec).corrupted;
    }
    case AttackKind::deletion:
      return deletion(train, DeletionSpec{groups.require(attack.modify_group), level, seed});
  }
  return train;
}

void to_json(nlohmann::json& j, const TrialResult& r) {
  j = nlohmann::json{{"record", "trial"},
                     {"trial", r.trial},
                     {"learner_index", r.learner_index},
                     {"learner", r.learner},
                     {"noise_index", r.noise_index},
                     {"noise", r.noise},
                     {"variant", r.variant},
                     {"gamma", r.gamma},
                     {"boost_iterations", r.boost_iterations},
                     {"train_size", r.train_size},
                     {"train_l2", r.train_l2},
                     {"test_l2", r.test_l2},
                     {"train_max_abs_ma_err", r.train_max_abs_ma_err},
                     {"groups", r.groups},
                     {"robustness", r.robustness}};
}

std::vector<TrialResult> run_experiment(const ExperimentConfig& cfg, const LoadedData& loaded,
                                        std::size_t threads) {
  cfg.validate();
  if (cfg.attack.kind != AttackKind::none) {
    loaded.groups.require(cfg.attack.modify_group);
    if (cfg.attack.kind == AttackKind::data_addition) loaded.groups.require(cfg.attack.target_group);
  }
  for (const auto& spec : cfg.learners) {
    if (spec.kind == LearnerKind::external_predictions) {
      throw ConfigError("external_predictions cannot be refit inside an experiment");
    }
  }

  const std::size_t cells = cfg.trials * cfg.learners.size();
  std::vector<std::vector<TrialResult>> slots(cells);
  std::vector<std::exception_ptr> errors(cells);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t c = next++; c < cells; c = next++) {
      const std::size_t trial = c / cfg.learners.size();
      const std::size_t learner = c % cfg.learners.size();
      try {
        try {
          slots[c] = run_cell(cfg, loaded, trial, learner);
        } catch (const Error&) {
          rethrow_with_context("trial " + std::to_string(trial) + ", learner " +
                               cfg.learners[learner].name());
        }
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(cells, 1));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<TrialResult> results;
  for (auto& slot : slots) {
    for (auto& r : slot) results.push_back(std::move(r));
  }
  std::stable_sort(results.begin(), results.end(), [](const TrialResult& a, const TrialResult& b) {
    return std::tie(a.trial, a.learner_index, a.noise_index) <
           std::tie(b.trial, b.learner_index, b.noise_index);
  });
  return results;
}

std::vector<TrialResult> run_experiment(const ExperimentConfig& cfg, std::size_t threads) {
  return run_experiment(cfg, load_experiment_data(cfg), threads);
}

std::string results_jsonl(const ExperimentConfig& cfg, const std::vector<TrialResult>& results) {
  nlohmann::json config = cfg.to_json();
  config.erase("output");
  const nlohmann::json manifest{{"record", "manifest"},
                                {"version", kVersion},
                                {"rng", std::string(CounterRng::kName)},
                                {"results", results.size()},
                                {"config", config}};
  std::string out = manifest.dump();
  out.push_back('\n');
  for (const auto& r : results) {
    out += nlohmann::json(r).dump();
    out.push_back('\n');
  }
  return out;
}

void write_results(const std::filesystem::path& path, const ExperimentConfig& cfg,
                   const std::vector<TrialResult>& results) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << results_jsonl(cfg, results);
}

}  // namespace mgr
