// mgrobust: multiaccuracy boosting, corruption attacks and experiments.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgr/attacks.hpp"
#include "mgr/config.hpp"
#include "mgr/csv_io.hpp"
#include "mgr/errors.hpp"
#include "mgr/experiment.hpp"
#include "mgr/learners.hpp"
#include "mgr/ma_boost.hpp"
#include "mgr/metrics.hpp"
#include "mgr/probes.hpp"
#include "mgr/rng.hpp"
#include "mgr/synth.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
};

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw mgr::DataError("cannot write " + out);
  f << text;
}

mgr::ExperimentConfig load_config(const Common& c) {
  if (c.config.empty()) throw mgr::ConfigError("--config is required");
  auto cfg = mgr::ExperimentConfig::load(c.config);
  if (c.seed) {
    cfg.splits.seed = *c.seed;
    if (cfg.data.synthetic) cfg.data.synthetic->seed = *c.seed;
  }
  return cfg;
}

mgr::LearnerSpec learner_from_flags(const std::string& kind, const std::string& json_text) {
  if (!json_text.empty()) {
    try {
      return nlohmann::json::parse(json_text).get<mgr::LearnerSpec>();
    } catch (const nlohmann::json::exception& e) {
      throw mgr::ConfigError(std::string("--learner-json: ") + e.what());
    }
  }
  mgr::LearnerSpec spec;
  spec.kind = mgr::learner_kind_from_string(kind);
  return spec;
}

// Base predictor either fitted by a learner or read from a prediction file
// aligned with the training CSV (and optionally the evaluation CSV).
mgr::PatchedPredictor base_predictor(const mgr::Dataset& train, const std::string& learner,
                                     const std::string& learner_json,
                                     const std::string& train_predictions,
                                     const mgr::Dataset* eval,
                                     const std::string& eval_predictions) {
  if (!train_predictions.empty()) {
    std::optional<std::filesystem::path> eval_path;
    if (!eval_predictions.empty()) eval_path = eval_predictions;
    auto model = mgr::external_predictions_learner(train_predictions, train, eval_path,
                                                   eval_path ? eval : nullptr);
    return mgr::PatchedPredictor(std::move(model), train.schema_ptr());
  }
  return mgr::fit_predictor(learner_from_flags(learner, learner_json), train);
}

int run(int argc, char** argv) {
  CLI::App app{"Multigroup-robust post-processing and corruption experiments"};
  app.set_version_flag("--version", std::string(mgr::kVersion));
  app.require_subcommand(1);

  Common common;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "Experiment config (JSON)");
    sub->add_option("--out", common.out, "Output path (default: stdout)");
    sub->add_option("--seed", common.seed, "Override the master seed");
    sub->add_option("--threads", common.threads, "Worker threads")->check(CLI::PositiveNumber);
  };

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic census-like CSV");
  add_common(synth);
  std::size_t synth_n = 20000;
  synth->add_option("--n", synth_n, "Rows (ignored when --config sets a synthetic spec)");

  // shared data flags
  std::string data_path;
  std::string label_column = "label";
  std::vector<std::string> group_defs;
  const auto add_data = [&](CLI::App* sub, const char* help) {
    sub->add_option("--data", data_path, help)->required();
    sub->add_option("--label-column", label_column, "Label column name");
    sub->add_option("--group", group_defs, "Group definition `name: col==val & ...`");
  };
  std::string learner = "logistic_regression";
  std::string learner_json;
  const auto add_learner = [&](CLI::App* sub) {
    sub->add_option("--learner", learner, "Learner kind");
    sub->add_option("--learner-json", learner_json, "Full learner spec as JSON");
  };

  // fit
  auto* fit = app.add_subcommand("fit", "Fit a base learner and write predictions");
  add_common(fit);
  add_data(fit, "Training CSV");
  add_learner(fit);
  std::string eval_path;
  fit->add_option("--eval", eval_path, "CSV to predict (default: the training CSV)");

  // boost
  auto* boost_cmd = app.add_subcommand("boost", "Post-process a base predictor to multiaccuracy");
  add_common(boost_cmd);
  add_data(boost_cmd, "Training CSV");
  add_learner(boost_cmd);
  double epsilon = 0.01;
  std::string train_predictions;
  std::string eval_predictions;
  std::string trace_path;
  boost_cmd->add_option("--epsilon", epsilon, "Multiaccuracy tolerance");
  boost_cmd->add_option("--predictions", train_predictions,
                        "Base predictions for the training CSV instead of a learner");
  boost_cmd->add_option("--eval", eval_path, "CSV to predict (default: the training CSV)");
  boost_cmd->add_option("--eval-predictions", eval_predictions,
                        "Base predictions for the --eval CSV");
  boost_cmd->add_option("--trace", trace_path, "Write the boosting trace as JSON lines");

  // attack
  auto* attack = app.add_subcommand("attack", "Corrupt a CSV with the config's attack");
  add_common(attack);
  std::string attack_in;
  std::string aux_path;
  double level = 0.0;
  attack->add_option("--data", attack_in, "CSV to corrupt")->required();
  attack->add_option("--aux", aux_path, "Auxiliary CSV (data_addition)");
  attack->add_option("--level", level, "Noise level: sigma, alpha or deletion fraction")
      ->required();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Per-group MA-err and accuracy of predictions");
  add_common(evaluate);
  add_data(evaluate, "Labelled CSV");
  std::string predictions;
  double gamma = 0.5;
  evaluate->add_option("--predictions", predictions, "Prediction file aligned with --data")
      ->required();
  evaluate->add_option("--gamma", gamma, "Decision threshold")->check(CLI::Range(0.0, 1.0));

  // experiment / probe
  auto* experiment = app.add_subcommand("experiment", "Run the full pipeline from a config");
  add_common(experiment);
  auto* probe = app.add_subcommand("probe", "Run the theory probes from a config");
  add_common(probe);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (synth->parsed()) {
    mgr::SyntheticSpec spec = mgr::SyntheticSpec::census_like(synth_n, common.seed.value_or(0));
    if (!common.config.empty()) {
      const auto cfg = load_config(common);
      if (!cfg.data.synthetic) throw mgr::ConfigError("config has no synthetic data section");
      spec = *cfg.data.synthetic;
    }
    emit(common.out, mgr::to_csv(mgr::synthesize(spec)));
  } else if (fit->parsed()) {
    const auto loaded = mgr::load_csv(data_path, label_column, group_defs);
    const auto p = mgr::fit_predictor(learner_from_flags(learner, learner_json), loaded.data);
    const auto eval = eval_path.empty()
                          ? loaded.data
                          : mgr::load_csv_with_schema(eval_path, loaded.data.schema_ptr());
    const auto preds = p.predict(eval);
    if (common.out.empty() || common.out == "-") {
      std::cout << "prediction\n";
      for (const double v : preds) std::cout << nlohmann::json(v).dump() << '\n';
    } else {
      mgr::write_prediction_file(common.out, preds);
    }
  } else if (boost_cmd->parsed()) {
    const auto loaded = mgr::load_csv(data_path, label_column, group_defs);
    std::optional<mgr::Dataset> eval;
    if (!eval_path.empty()) eval = mgr::load_csv_with_schema(eval_path, loaded.data.schema_ptr());
    const auto base = base_predictor(loaded.data, learner, learner_json, train_predictions,
                                     eval ? &*eval : nullptr, eval_predictions);
    mgr::BoostConfig cfg;
    cfg.epsilon = epsilon;
    cfg.validate();
    const auto result = mgr::boost(base, loaded.data, loaded.groups, cfg);
    if (!trace_path.empty()) emit(trace_path, result.trace.to_jsonl());
    const auto preds = result.predictor.predict(eval ? *eval : loaded.data);
    if (common.out.empty() || common.out == "-") {
      std::cout << "prediction\n";
      for (const double v : preds) std::cout << nlohmann::json(v).dump() << '\n';
    } else {
      mgr::write_prediction_file(common.out, preds);
    }
    std::cerr << "boosting finished after " << result.trace.iterations() << " iterations\n";
  } else if (attack->parsed()) {
    const auto cfg = load_config(common);
    const auto loaded = mgr::load_csv(attack_in, cfg.data.label_column, cfg.data.groups);
    const auto aux = aux_path.empty()
                         ? loaded.data.subset({})
                         : mgr::load_csv_with_schema(aux_path, loaded.data.schema_ptr());
    const std::uint64_t seed = mgr::derive_seed(cfg.splits.seed, "attack:cli");
    emit(common.out, mgr::to_csv(mgr::apply_attack(cfg.attack, loaded.groups, loaded.data, aux,
                                                   level, seed)));
  } else if (evaluate->parsed()) {
    const auto loaded = mgr::load_csv(data_path, label_column, group_defs);
    const auto preds = mgr::read_prediction_file(predictions);
    if (preds.size() != loaded.data.size()) {
      throw mgr::DataError("prediction file has " + std::to_string(preds.size()) +
                           " rows, data has " + std::to_string(loaded.data.size()));
    }
    const auto reports = mgr::group_reports(preds, loaded.data, loaded.groups, gamma);
    nlohmann::json j{{"record", "evaluation"}, {"gamma", gamma}, {"groups", reports}};
    emit(common.out, j.dump(2) + "\n");
  } else if (experiment->parsed()) {
    const auto cfg = load_config(common);
    const auto results = mgr::run_experiment(cfg, common.threads);
    std::string out = common.out;
    if (out.empty() && cfg.output) out = cfg.output->string();
    emit(out, mgr::results_jsonl(cfg, results));
  } else if (probe->parsed()) {
    const auto cfg = load_config(common);
    const auto report = mgr::theory_probes(cfg, mgr::load_experiment_data(cfg));
    emit(common.out, nlohmann::json(report).dump(2) + "\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const mgr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const mgr::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
