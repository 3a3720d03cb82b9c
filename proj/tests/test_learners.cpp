#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "mgr/csv_io.hpp"
#include "mgr/encoding.hpp"
#include "mgr/errors.hpp"
#include "mgr/learners.hpp"
#include "support.hpp"

using namespace mgr;

namespace {

Dataset one_feature(const std::vector<double>& xs, const std::vector<Label>& labels) {
  auto schema = std::make_shared<const Schema>(
      std::vector<Column>{Column{"x", ColumnKind::numeric, {}}}, "label");
  std::vector<FeatureRow> rows;
  for (double x : xs) rows.push_back(FeatureRow{{x}});
  return Dataset(schema, rows, labels);
}

LearnerSpec spec_of(LearnerKind kind) {
  LearnerSpec s;
  s.kind = kind;
  return s;
}

// Independent gradient descent for one min-max scaled feature with bias.
std::pair<double, double> oracle_logistic(const std::vector<double>& xs,
                                          const std::vector<Label>& y, double rate,
                                          std::size_t iterations, double l2) {
  const double lo = *std::min_element(xs.begin(), xs.end());
  const double hi = *std::max_element(xs.begin(), xs.end());
  std::vector<double> x;
  for (double v : xs) x.push_back(hi > lo ? (v - lo) / (hi - lo) : 0.0);
  double w = 0.0;
  double b = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t it = 0; it < iterations; ++it) {
    double gw = 0.0;
    double gb = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = 1.0 / (1.0 + std::exp(-(b + w * x[i]))) - y[i];
      gw += r * x[i];
      gb += r;
    }
    w -= rate * (gw / n + l2 * w);
    b -= rate * (gb / n);
  }
  return {w, b};
}

}  // namespace

TEST(Learners, ConstantMean) {
  const auto data = test::f1();
  const auto p = fit_predictor(spec_of(LearnerKind::constant_mean), data);
  for (const double v : p.predict(data)) EXPECT_EQ(v, 0.5);
}

TEST(Learners, ErmTwoConstant) {
  const auto data = test::f1();
  const auto spec = spec_of(LearnerKind::erm_two_constant);
  EXPECT_EQ(fit_predictor(spec, data.with_labels({1, 1, 1, 0})).predict(data.row(0)), 1.0);
  EXPECT_EQ(fit_predictor(spec, data).predict(data.row(0)), 0.0);  // tie
  EXPECT_EQ(fit_predictor(spec, data.with_labels({1, 0, 0, 0})).predict(data.row(0)), 0.0);
}

TEST(Learners, EmptyDatasetRejected) {
  const auto data = test::f1();
  EXPECT_THROW(fit(spec_of(LearnerKind::constant_mean), data.subset({})), DataError);
}

TEST(Learners, LogisticMatchesIndependentOracle) {
  const std::vector<double> xs{-3, -2, -1.5, -1, 1, 1.5, 2, 3};
  const std::vector<Label> ys{0, 0, 0, 0, 1, 1, 1, 1};
  const auto data = one_feature(xs, ys);
  LearnerSpec spec = spec_of(LearnerKind::logistic_regression);
  spec.logistic.learning_rate = 1.0;
  spec.logistic.iterations = 3000;
  const auto p = fit_predictor(spec, data);
  const auto [w, b] = oracle_logistic(xs, ys, 1.0, 3000, spec.logistic.l2);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = (xs[i] + 3.0) / 6.0;
    const double want = 1.0 / (1.0 + std::exp(-(b + w * x)));
    EXPECT_NEAR(p.predict(data.row(i)), want, 1e-8);
    if (ys[i] == 1) {
      EXPECT_GT(p.predict(data.row(i)), 0.9);
    } else {
      EXPECT_LT(p.predict(data.row(i)), 0.1);
    }
  }
}

TEST(Learners, LogisticDefaultsMatchOracleOnNoisyData) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> xs;
  std::vector<Label> ys;
  for (int i = 0; i < 300; ++i) {
    const Label y = i % 3 == 0 ? 1 : 0;
    xs.push_back(noise(gen) + 1.2 * y);
    ys.push_back(y);
  }
  const auto data = one_feature(xs, ys);
  const auto spec = spec_of(LearnerKind::logistic_regression);
  const auto p = fit_predictor(spec, data);
  const auto [w, b] = oracle_logistic(xs, ys, 0.1, 500, 1e-4);
  const double lo = *std::min_element(xs.begin(), xs.end());
  const double hi = *std::max_element(xs.begin(), xs.end());
  for (std::size_t i = 0; i < xs.size(); i += 7) {
    const double x = (xs[i] - lo) / (hi - lo);
    EXPECT_NEAR(p.predict(data.row(i)), 1.0 / (1.0 + std::exp(-(b + w * x))), 1e-8);
  }
}

TEST(Learners, KnnOneNeighbourMemorizesDistinctRows) {
  std::mt19937_64 gen(6);
  auto schema = test::random_schema(3);
  auto data = test::random_dataset(gen, schema, 200, 1000);
  std::vector<std::size_t> keep;
  std::vector<FeatureRow> seen;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (std::find(seen.begin(), seen.end(), data.row(i)) == seen.end()) {
      seen.push_back(data.row(i));
      keep.push_back(i);
    }
  }
  data = data.subset(keep);
  LearnerSpec spec = spec_of(LearnerKind::knn);
  spec.knn.k = 1;
  const auto preds = fit_predictor(spec, data).predict(data);
  for (std::size_t i = 0; i < data.size(); ++i) EXPECT_EQ(preds[i], data.label(i));
}

TEST(Learners, KnnTiesBrokenByRowIndex) {
  // Query 1 is equidistant from rows 0 (x=0) and 2 (x=2).
  const auto data = one_feature({0, 10, 2}, {1, 0, 0});
  LearnerSpec spec = spec_of(LearnerKind::knn);
  spec.knn.k = 1;
  const auto p = fit_predictor(spec, data);
  EXPECT_EQ(p.predict(FeatureRow{{1}}), 1.0);
  spec.knn.k = 2;
  EXPECT_EQ(fit_predictor(spec, data).predict(FeatureRow{{1}}), 0.5);
}

TEST(Learners, TreeLeavesAreGroupLabelMeans) {
  std::mt19937_64 gen(10);
  auto schema = std::make_shared<const Schema>(
      std::vector<Column>{Column{"race", ColumnKind::categorical, {"B", "O", "W"}},
                          Column{"sex", ColumnKind::categorical, {"F", "M"}}},
      "label");
  std::uniform_int_distribution<int> race(0, 2);
  std::uniform_int_distribution<int> sex(0, 1);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<FeatureRow> rows;
  std::vector<Label> labels;
  std::map<std::pair<int, int>, std::pair<double, double>> cell;
  for (int i = 0; i < 500; ++i) {
    const int r = race(gen);
    const int s = sex(gen);
    const Label y = u(gen) < 0.2 + 0.2 * r + 0.1 * s ? 1 : 0;
    rows.push_back(FeatureRow{{double(r), double(s)}});
    labels.push_back(y);
    cell[{r, s}].first += y;
    cell[{r, s}].second += 1;
  }
  const Dataset data(schema, rows, labels);
  LearnerSpec spec = spec_of(LearnerKind::decision_tree);
  spec.tree.max_depth = std::nullopt;
  const auto p = fit_predictor(spec, data);
  for (const auto& [key, stats] : cell) {
    EXPECT_NEAR(p.predict(FeatureRow{{double(key.first), double(key.second)}}),
                stats.first / stats.second, 1e-12);
  }
}

TEST(Learners, TreeDepthLimit) {
  const auto data = one_feature({0, 1, 2, 3}, {0, 1, 0, 1});
  LearnerSpec spec = spec_of(LearnerKind::decision_tree);
  spec.tree.max_depth = 0;
  for (const double v : fit_predictor(spec, data).predict(data)) EXPECT_EQ(v, 0.5);
  spec.tree.max_depth = std::nullopt;
  const auto full = fit_predictor(spec, data).predict(data);
  EXPECT_EQ(full, (std::vector<double>{0, 1, 0, 1}));
}

TEST(Learners, PropertyDeterministicAndInUnitInterval) {
  std::mt19937_64 gen(21);
  const LearnerKind kinds[] = {LearnerKind::constant_mean, LearnerKind::erm_two_constant,
                               LearnerKind::logistic_regression, LearnerKind::knn,
                               LearnerKind::decision_tree};
  for (int trial = 0; trial < 10; ++trial) {
    auto schema = test::random_schema(2);
    const auto data = test::random_dataset(gen, schema, 60, 5);
    const auto probe = test::random_dataset(gen, schema, 30, 7);
    for (const auto kind : kinds) {
      const auto a = fit_predictor(spec_of(kind), data).predict(probe);
      const auto b = fit_predictor(spec_of(kind), data).predict(probe);
      EXPECT_EQ(a, b);
      for (const double v : a) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
    }
  }
}

TEST(Learners, FeatureSubsetIgnoresOtherColumns) {
  const auto data = test::f1();
  LearnerSpec spec = spec_of(LearnerKind::knn);
  spec.knn.k = 1;
  spec.features = {"g"};
  const auto p = fit_predictor(spec, data);
  // id is ignored, so rows 0 and 1 are indistinguishable.
  EXPECT_EQ(p.predict(FeatureRow{{0, 99}}), 1.0);
  spec.features = {"nope"};
  EXPECT_THROW(fit(spec, data), SchemaError);
}

TEST(Learners, SpecJsonRoundTrip) {
  const auto spec = nlohmann::json::parse(
                        R"({"kind": "decision_tree", "max_depth": null, "min_leaf": 3,
                            "features": ["a"], "seed": 5})")
                        .get<LearnerSpec>();
  EXPECT_EQ(spec.kind, LearnerKind::decision_tree);
  EXPECT_FALSE(spec.tree.max_depth.has_value());
  EXPECT_EQ(spec.tree.min_leaf, 3u);
  EXPECT_EQ(spec.seed, 5u);
  const nlohmann::json back = spec;
  EXPECT_TRUE(back.at("max_depth").is_null());
  EXPECT_EQ(back.get<LearnerSpec>().features, spec.features);
  EXPECT_THROW(nlohmann::json::parse(R"({"kind": "mlp"})").get<LearnerSpec>(), ConfigError);
  EXPECT_THROW(nlohmann::json::parse(R"({"kind": "knn", "k": 0})").get<LearnerSpec>(),
               ConfigError);
}

TEST(ExternalPredictions, ConstantFileBehavesLikeConstantMean) {
  const auto dir = test::temp_dir("external");
  const auto data = test::f1();
  test::write_text(dir / "train.csv", "prediction\n0.5\n0.5\n0.5\n0.5\n");
  const auto model = external_predictions_learner(dir / "train.csv", data);
  for (const auto& row : data.rows()) EXPECT_EQ(model->predict(row), 0.5);
}

TEST(ExternalPredictions, Rejections) {
  const auto dir = test::temp_dir("external_bad");
  const auto data = test::f1();
  test::write_text(dir / "range.csv", "prediction\n1.3\n0.5\n0.5\n0.5\n");
  EXPECT_THROW(external_predictions_learner(dir / "range.csv", data), DataError);
  test::write_text(dir / "short.csv", "prediction\n0.5\n");
  EXPECT_THROW(external_predictions_learner(dir / "short.csv", data), DataError);
  EXPECT_THROW(external_predictions_learner(dir / "missing.csv", data), DataError);
  const std::vector<double> ok{0.1, 0.2, 0.3, 0.4};
  const auto model = external_predictions_learner(data, ok);
  EXPECT_THROW(model->predict(FeatureRow{{0, 17}}), DataError);
  const auto dup = data.subset(std::vector<std::size_t>{0, 0});
  EXPECT_THROW(external_predictions_learner(dup, std::vector<double>{0.1, 0.2}), DataError);
}

TEST(ExternalPredictions, EvalFileExtendsLookup) {
  const auto data = test::f1();
  auto eval_rows = std::vector<FeatureRow>{FeatureRow{{0, 10}}};
  const Dataset eval(data.schema_ptr(), eval_rows, {1});
  const auto model = external_predictions_learner(data, std::vector<double>{0.1, 0.2, 0.3, 0.4},
                                                  &eval, std::vector<double>{0.9});
  EXPECT_EQ(model->predict(FeatureRow{{0, 10}}), 0.9);
  EXPECT_EQ(model->predict(data.row(2)), 0.3);
}

TEST(PredictionFiles, RoundTrip) {
  const auto dir = test::temp_dir("predfile");
  const std::vector<double> preds{0.1, 1.0 / 3.0, 0.0, 1.0};
  write_prediction_file(dir / "p.csv", preds);
  EXPECT_EQ(read_prediction_file(dir / "p.csv"), preds);
  test::write_text(dir / "bad.csv", "score\n0.1\n");
  EXPECT_THROW(read_prediction_file(dir / "bad.csv"), DataError);
}

TEST(ErmFlipDemo, SmallCase) {
  const auto demo = erm_flip_demo(4, 1, 0.01);
  EXPECT_EQ(demo.p_before, 0.0);
  EXPECT_EQ(demo.p_after, 1.0);
  EXPECT_EQ(demo.check_all.lhs, 1.0);
  EXPECT_DOUBLE_EQ(demo.check_all.bound(), 0.25 + 0.01);
  EXPECT_FALSE(demo.check_all.satisfied);
}

TEST(ErmFlipDemo, NoFlipsIsRobust) {
  const auto demo = erm_flip_demo(10, 0, 0.01);
  EXPECT_EQ(demo.p_before, demo.p_after);
  EXPECT_EQ(demo.check_all.lhs, 0.0);
  EXPECT_TRUE(demo.check_all.satisfied);
}

TEST(ErmFlipDemo, Preconditions) {
  EXPECT_THROW(erm_flip_demo(5, 1, 0.01), ConfigError);
  EXPECT_THROW(erm_flip_demo(4, 3, 0.01), ConfigError);
}

TEST(Encoding, OneHotAndMinMax) {
  const auto data = test::f1();
  const FeatureEncoder enc(data);
  EXPECT_EQ(enc.dimension(), 3u);
  EXPECT_EQ(enc.encode(data.row(3)), (std::vector<double>{0, 1, 1}));
  EXPECT_EQ(enc.encode(FeatureRow{{kUnseenCode, 1.5}}), (std::vector<double>{0, 0, 0.5}));
}
