#include "mgr/learners.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "mgr/csv_io.hpp"
#include "mgr/encoding.hpp"
#include "mgr/errors.hpp"
#include "mgr/numeric.hpp"

namespace mgr {

namespace {

constexpr std::pair<LearnerKind, std::string_view> kKindNames[] = {
    {LearnerKind::constant_mean, "constant_mean"},
    {LearnerKind::erm_two_constant, "erm_two_constant"},
    {LearnerKind::logistic_regression, "logistic_regression"},
    {LearnerKind::knn, "knn"},
    {LearnerKind::decision_tree, "decision_tree"},
    {LearnerKind::external_predictions, "external_predictions"},
};

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::size_t count_positive(const Dataset& s) {
  return static_cast<std::size_t>(std::count(s.labels().begin(), s.labels().end(), Label{1}));
}

// ---------------------------------------------------------------------------

class LogisticModel final : public Model {
 public:
  LogisticModel(FeatureEncoder encoder, std::vector<double> weights, double bias)
      : encoder_(std::move(encoder)), weights_(std::move(weights)), bias_(bias) {}

  double predict(const FeatureRow& row) const override {
    const auto x = encoder_.encode(row);
    double z = bias_;
    for (std::size_t j = 0; j < x.size(); ++j) z += weights_[j] * x[j];
    return sigmoid(z);
  }
  std::string describe() const override { return "logistic_regression"; }

 private:
  FeatureEncoder encoder_;
  std::vector<double> weights_;
  double bias_;
};

FeatureEncoder make_encoder(const LearnerSpec& spec, const Dataset& s) {
  return spec.features.empty() ? FeatureEncoder(s) : FeatureEncoder(s, spec.features);
}

std::shared_ptr<const Model> fit_logistic(const LogisticParams& params, FeatureEncoder encoder,
                                          const Dataset& s) {
  if (!(params.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (params.l2 < 0.0) throw ConfigError("l2 weight must be non-negative");
  const std::size_t n = s.size();
  const std::size_t d = encoder.dimension();

  // Column-major copy so each gradient coordinate is a contiguous reduction.
  const auto row_major = encoder.encode_all(s.rows());
  std::vector<double> cols(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) cols[j * n + i] = row_major[i * d + j];
  }

  std::vector<double> w(d, 0.0);
  double b = 0.0;
  std::vector<double> residual(n);
  std::vector<double> scratch(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t it = 0; it < params.iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double z = b;
      for (std::size_t j = 0; j < d; ++j) z += w[j] * row_major[i * d + j];
      residual[i] = sigmoid(z) - static_cast<double>(s.label(i));
    }
    const double grad_b = pairwise_sum(residual) * inv_n;
    for (std::size_t j = 0; j < d; ++j) {
      const double* col = &cols[j * n];
      for (std::size_t i = 0; i < n; ++i) scratch[i] = residual[i] * col[i];
      const double grad = pairwise_sum(scratch) * inv_n + params.l2 * w[j];
      w[j] -= params.learning_rate * grad;
    }
    b -= params.learning_rate * grad_b;
  }
  return std::make_shared<LogisticModel>(std::move(encoder), std::move(w), b);
}

// ---------------------------------------------------------------------------

class KnnModel final : public Model {
 public:
  KnnModel(FeatureEncoder encoder, std::vector<double> points, std::vector<Label> labels,
           std::size_t k)
      : encoder_(std::move(encoder)),
        points_(std::move(points)),
        labels_(std::move(labels)),
        k_(std::min(k, labels_.size())) {}

  double predict(const FeatureRow& row) const override {
    const auto x = encoder_.encode(row);
    const std::size_t d = encoder_.dimension();
    std::vector<std::pair<double, std::size_t>> dist(labels_.size());
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      double sq = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = points_[i * d + j] - x[j];
        sq += diff * diff;
      }
      dist[i] = {sq, i};
    }
    // Pairs compare by distance then row index, which fixes tie order.
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_), dist.end());
    std::size_t positive = 0;
    for (std::size_t r = 0; r < k_; ++r) positive += labels_[dist[r].second];
    return static_cast<double>(positive) / static_cast<double>(k_);
  }
  std::string describe() const override { return "knn(k=" + std::to_string(k_) + ")"; }

 private:
  FeatureEncoder encoder_;
  std::vector<double> points_;
  std::vector<Label> labels_;
  std::size_t k_;
};

// ---------------------------------------------------------------------------

class TreeModel final : public Model {
 public:
  struct Node {
    bool leaf = true;
    std::size_t feature = 0;
    double threshold = 0.0;
    std::size_t left = 0;
    std::size_t right = 0;
    double value = 0.0;
  };

  TreeModel(FeatureEncoder encoder, std::vector<Node> nodes)
      : encoder_(std::move(encoder)), nodes_(std::move(nodes)) {}

  double predict(const FeatureRow& row) const override {
    const auto x = encoder_.encode(row);
    std::size_t at = 0;
    while (!nodes_[at].leaf) {
      const auto& node = nodes_[at];
      at = x[node.feature] <= node.threshold ? node.left : node.right;
    }
    return nodes_[at].value;
  }
  std::string describe() const override {
    return "decision_tree(" + std::to_string(nodes_.size()) + " nodes)";
  }

 private:
  FeatureEncoder encoder_;
  std::vector<Node> nodes_;
};

class TreeBuilder {
 public:
  TreeBuilder(const TreeParams& params, std::vector<double> x, std::size_t d,
              const std::vector<Label>& y)
      : params_(params), x_(std::move(x)), d_(d), y_(y) {}

  std::vector<TreeModel::Node> build() {
    std::vector<std::size_t> all(y_.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    grow(all, 0);
    return std::move(nodes_);
  }

 private:
  struct Split {
    std::size_t feature;
    double threshold;
    double impurity;
  };

  static double gini(double pos, double total) {
    if (total == 0.0) return 0.0;
    const double p = pos / total;
    return 2.0 * p * (1.0 - p);
  }

  double value(std::size_t i, std::size_t j) const { return x_[i * d_ + j]; }

  std::optional<Split> best_split(std::vector<std::size_t>& idx) const {
    const double total = static_cast<double>(idx.size());
    double total_pos = 0.0;
    for (const auto i : idx) total_pos += y_[i];
    std::optional<Split> best;
    for (std::size_t j = 0; j < d_; ++j) {
      std::stable_sort(idx.begin(), idx.end(),
                       [&](std::size_t a, std::size_t b) { return value(a, j) < value(b, j); });
      double left_pos = 0.0;
      for (std::size_t r = 0; r + 1 < idx.size(); ++r) {
        left_pos += y_[idx[r]];
        const double lo = value(idx[r], j);
        const double hi = value(idx[r + 1], j);
        if (lo == hi) continue;
        const std::size_t left_n = r + 1;
        const std::size_t right_n = idx.size() - left_n;
        if (left_n < params_.min_leaf || right_n < params_.min_leaf) continue;
        const double ln = static_cast<double>(left_n);
        const double rn = static_cast<double>(right_n);
        const double impurity =
            (ln * gini(left_pos, ln) + rn * gini(total_pos - left_pos, rn)) / total;
        if (!best || impurity < best->impurity) best = Split{j, 0.5 * (lo + hi), impurity};
      }
    }
    return best;
  }

  std::size_t grow(std::vector<std::size_t>& idx, std::size_t depth) {
    const std::size_t at = nodes_.size();
    nodes_.emplace_back();
    double pos = 0.0;
    for (const auto i : idx) pos += y_[i];
    nodes_[at].value = pos / static_cast<double>(idx.size());

    const bool pure = pos == 0.0 || pos == static_cast<double>(idx.size());
    const bool depth_left = !params_.max_depth || depth < *params_.max_depth;
    if (pure || !depth_left || idx.size() < 2 * params_.min_leaf) return at;
    const auto split = best_split(idx);
    if (!split) return at;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (const auto i : idx) {
      (value(i, split->feature) <= split->threshold ? left : right).push_back(i);
    }
    std::sort(left.begin(), left.end());
    std::sort(right.begin(), right.end());
    const std::size_t l = grow(left, depth + 1);
    const std::size_t r = grow(right, depth + 1);
    auto& node = nodes_[at];
    node.leaf = false;
    node.feature = split->feature;
    node.threshold = split->threshold;
    node.left = l;
    node.right = r;
    return at;
  }

  const TreeParams& params_;
  std::vector<double> x_;
  std::size_t d_;
  const std::vector<Label>& y_;
  std::vector<TreeModel::Node> nodes_;
};

// ---------------------------------------------------------------------------

class LookupModel final : public Model {
 public:
  LookupModel(std::shared_ptr<const Schema> schema, std::unordered_map<std::string, double> table)
      : schema_(std::move(schema)), table_(std::move(table)) {}

  double predict(const FeatureRow& row) const override {
    const auto key = canonical_key(*schema_, row);
    const auto it = table_.find(key);
    if (it == table_.end()) throw DataError("no external prediction for row '" + key + "'");
    return it->second;
  }
  std::string describe() const override { return "external_predictions"; }

 private:
  std::shared_ptr<const Schema> schema_;
  std::unordered_map<std::string, double> table_;
};

void add_predictions(std::unordered_map<std::string, double>& table, const Dataset& data,
                     std::span<const double> preds, std::string_view what) {
  if (preds.size() != data.size()) {
    throw DataError(std::string(what) + " predictions have " + std::to_string(preds.size()) +
                    " rows, dataset has " + std::to_string(data.size()));
  }
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double v = preds[i];
    if (!(v >= 0.0 && v <= 1.0)) {
      throw DataError(std::string(what) + " prediction " + std::to_string(i) + " outside [0, 1]");
    }
    const auto [it, inserted] = table.emplace(canonical_key(data.schema(), data.row(i)), v);
    if (!inserted && it->second != v) {
      throw DataError(std::string(what) + " predictions disagree on a repeated row");
    }
  }
}

}  // namespace

std::string_view to_string(LearnerKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

LearnerKind learner_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  throw ConfigError("unknown learner kind: " + std::string(name));
}

void from_json(const nlohmann::json& j, LearnerSpec& spec) {
  spec = LearnerSpec{};
  spec.kind = learner_kind_from_string(j.at("kind").get<std::string>());
  spec.logistic.learning_rate = j.value("learning_rate", spec.logistic.learning_rate);
  spec.logistic.iterations = j.value("iterations", spec.logistic.iterations);
  spec.logistic.l2 = j.value("l2", spec.logistic.l2);
  spec.knn.k = j.value("k", spec.knn.k);
  if (j.contains("max_depth")) {
    const auto& depth = j.at("max_depth");
    spec.tree.max_depth =
        depth.is_null() ? std::nullopt : std::optional<std::size_t>(depth.get<std::size_t>());
  }
  spec.tree.min_leaf = j.value("min_leaf", spec.tree.min_leaf);
  if (j.contains("train_predictions")) {
    spec.external.train_predictions = j.at("train_predictions").get<std::string>();
  }
  if (j.contains("eval_predictions")) {
    spec.external.eval_predictions = j.at("eval_predictions").get<std::string>();
  }
  spec.features = j.value("features", spec.features);
  spec.seed = j.value("seed", spec.seed);
  if (spec.knn.k == 0) throw ConfigError("knn k must be positive");
  if (spec.tree.min_leaf == 0) throw ConfigError("min_leaf must be positive");
}

void to_json(nlohmann::json& j, const LearnerSpec& spec) {
  j = nlohmann::json{{"kind", std::string(to_string(spec.kind))}, {"seed", spec.seed}};
  if (!spec.features.empty()) j["features"] = spec.features;
  switch (spec.kind) {
    case LearnerKind::logistic_regression:
      j["learning_rate"] = spec.logistic.learning_rate;
      j["iterations"] = spec.logistic.iterations;
      j["l2"] = spec.logistic.l2;
      break;
    case LearnerKind::knn:
      j["k"] = spec.knn.k;
      break;
    case LearnerKind::decision_tree:
      j["max_depth"] =
          spec.tree.max_depth ? nlohmann::json(*spec.tree.max_depth) : nlohmann::json();
      j["min_leaf"] = spec.tree.min_leaf;
      break;
    case LearnerKind::external_predictions:
      j["train_predictions"] = spec.external.train_predictions.string();
      if (spec.external.eval_predictions) {
        j["eval_predictions"] = spec.external.eval_predictions->string();
      }
      break;
    default:
      break;
  }
}

std::shared_ptr<const Model> fit(const LearnerSpec& spec, const Dataset& s) {
  if (s.empty()) throw DataError("cannot fit a learner on an empty dataset");
  switch (spec.kind) {
    case LearnerKind::constant_mean:
      return std::make_shared<ConstantModel>(static_cast<double>(count_positive(s)) /
                                             static_cast<double>(s.size()));
    case LearnerKind::erm_two_constant: {
      // Squared loss of p0 is the positive count, of p1 the negative count.
      const std::size_t pos = count_positive(s);
      const std::size_t neg = s.size() - pos;
      return std::make_shared<ConstantModel>(neg < pos ? 1.0 : 0.0);
    }
    case LearnerKind::logistic_regression:
      return fit_logistic(spec.logistic, make_encoder(spec, s), s);
    case LearnerKind::knn: {
      auto encoder = make_encoder(spec, s);
      auto points = encoder.encode_all(s.rows());
      return std::make_shared<KnnModel>(std::move(encoder), std::move(points), s.labels(),
                                        spec.knn.k);
    }
    case LearnerKind::decision_tree: {
      auto encoder = make_encoder(spec, s);
      TreeBuilder builder(spec.tree, encoder.encode_all(s.rows()), encoder.dimension(),
                          s.labels());
      auto nodes = builder.build();
      return std::make_shared<TreeModel>(std::move(encoder), std::move(nodes));
    }
    case LearnerKind::external_predictions:
      return external_predictions_learner(spec.external.train_predictions, s);
  }
  throw ConfigError("unsupported learner kind");
}

PatchedPredictor fit_predictor(const LearnerSpec& spec, const Dataset& s) {
  return PatchedPredictor(fit(spec, s), s.schema_ptr());
}

std::vector<double> read_prediction_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open prediction file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const auto table = parse_csv(buf.str());
  if (table.empty() || table.front().size() != 1 || table.front().front() != "prediction") {
    throw DataError(path.string() + ": expected a single `prediction` header column");
  }
  std::vector<double> out;
  out.reserve(table.size() - 1);
  for (std::size_t r = 1; r < table.size(); ++r) {
    const auto& cell = table[r].at(0);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (table[r].size() != 1 || ec != std::errc() || ptr != cell.data() + cell.size()) {
      throw DataError(path.string() + ": malformed prediction at line " + std::to_string(r + 1));
    }
    out.push_back(v);
  }
  return out;
}

void write_prediction_file(const std::filesystem::path& path, std::span<const double> preds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "prediction\n";
  char buf[32];
  for (const double v : preds) {
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, ptr - buf);
    out << '\n';
  }
}

std::shared_ptr<const Model> external_predictions_learner(const Dataset& train,
                                                          std::span<const double> train_preds,
                                                          const Dataset* eval,
                                                          std::span<const double> eval_preds) {
  std::unordered_map<std::string, double> table;
  add_predictions(table, train, train_preds, "train");
  if (eval) {
    require_same_schema(train.schema(), eval->schema());
    add_predictions(table, *eval, eval_preds, "eval");
  }
  return std::make_shared<LookupModel>(train.schema_ptr(), std::move(table));
}

std::shared_ptr<const Model> external_predictions_learner(
    const std::filesystem::path& train_predictions, const Dataset& train,
    const std::optional<std::filesystem::path>& eval_predictions, const Dataset* eval) {
  const auto train_preds = read_prediction_file(train_predictions);
  if (eval_predictions && eval) {
    const auto eval_preds = read_prediction_file(*eval_predictions);
    return external_predictions_learner(train, train_preds, eval, eval_preds);
  }
  return external_predictions_learner(train, train_preds);
}

ErmFlipDemo erm_flip_demo(std::size_t n, std::size_t flips, double eps) {
  if (n == 0 || n % 2 != 0) throw ConfigError("erm_flip_demo needs a positive even n");
  if (flips > n / 2) throw ConfigError("cannot flip more zero labels than exist");
  auto schema = std::make_shared<const Schema>(
      std::vector<Column>{Column{"x", ColumnKind::numeric, {}}}, "label");
  std::vector<FeatureRow> rows(n);
  std::vector<Label> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    rows[i].values = {static_cast<double>(i)};
    labels[i] = i < n / 2 ? 1 : 0;
  }
  const Dataset clean(schema, rows, labels);
  for (std::size_t f = 0; f < flips; ++f) labels[n / 2 + f] = 1;
  const Dataset corrupted(schema, std::move(rows), std::move(labels));

  LearnerSpec spec;
  spec.kind = LearnerKind::erm_two_constant;
  const auto before = fit_predictor(spec, clean);
  const auto after = fit_predictor(spec, corrupted);
  const GroupClass all;
  const auto checks = robustness_check(before, after, clean, corrupted, clean.rows(), all, eps);
  return ErmFlipDemo{before.predict(clean.row(0)), after.predict(clean.row(0)), checks.front()};
}

}  // namespace mgr
