#include "mgr/metrics.hpp"

#include <cmath>

#include "mgr/errors.hpp"

namespace mgr {

namespace {

void require_aligned(std::size_t preds, std::size_t labels, std::size_t membership) {
  if (preds != labels || preds != membership) {
    throw DataError("predictions, labels and membership differ in length");
  }
}

}  // namespace

double ma_err(std::span<const double> preds, std::span<const Label> labels,
              std::span<const std::uint8_t> membership, std::size_t normalizer) {
  require_aligned(preds.size(), labels.size(), membership.size());
  if (normalizer == 0) throw DataError("MA-err normalizer must be positive");
  double sum = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (membership[i]) sum += preds[i] - static_cast<double>(labels[i]);
  }
  return sum / static_cast<double>(normalizer);
}

double ma_err(const PatchedPredictor& p, const Dataset& data, const GroupPredicate& g,
              std::optional<std::size_t> normalizer) {
  const auto preds = p.predict(data);
  const auto member = group_membership(g, data);
  return ma_err(preds, data.labels(), member, normalizer.value_or(data.size()));
}

std::optional<double> accuracy(std::span<const double> preds, std::span<const Label> labels,
                               std::span<const std::uint8_t> membership, double gamma) {
  require_aligned(preds.size(), labels.size(), membership.size());
  std::size_t support = 0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (!membership[i]) continue;
    ++support;
    const Label predicted = preds[i] > gamma ? 1 : 0;
    if (predicted == labels[i]) ++correct;
  }
  if (support == 0) return std::nullopt;
  return static_cast<double>(correct) / static_cast<double>(support);
}

std::optional<double> accuracy(const PatchedPredictor& p, const Dataset& data,
                               const GroupPredicate& g, double gamma) {
  const auto preds = p.predict(data);
  const auto member = group_membership(g, data);
  return accuracy(preds, data.labels(), member, gamma);
}

std::vector<double> default_gamma_grid() {
  std::vector<double> grid(101);
  for (int i = 0; i <= 100; ++i) grid[static_cast<std::size_t>(i)] = i / 100.0;
  return grid;
}

double optimize_gamma(std::span<const double> preds, std::span<const Label> labels,
                      std::span<const double> grid) {
  if (grid.empty()) throw ConfigError("empty gamma grid");
  if (preds.empty()) throw DataError("empty validation set");
  if (preds.size() != labels.size()) throw DataError("predictions and labels differ in length");
  double best_gamma = 0.0;
  std::size_t best_correct = 0;
  bool first = true;
  for (const double gamma : grid) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      if ((preds[i] > gamma ? 1 : 0) == labels[i]) ++correct;
    }
    if (first || correct > best_correct || (correct == best_correct && gamma < best_gamma)) {
      best_gamma = gamma;
      best_correct = correct;
      first = false;
    }
  }
  return best_gamma;
}

double optimize_gamma(const PatchedPredictor& p, const Dataset& validation,
                      std::span<const double> grid) {
  if (validation.empty()) throw DataError("empty validation set");
  const auto preds = p.predict(validation);
  return optimize_gamma(preds, validation.labels(), grid);
}

std::vector<GroupReport> group_reports(std::span<const double> preds, const Dataset& data,
                                       const GroupClass& groups, double gamma) {
  if (data.empty()) throw DataError("cannot report on an empty dataset");
  std::vector<GroupReport> out;
  out.reserve(groups.size());
  for (const auto& g : groups) {
    const auto member = group_membership(g, data);
    GroupReport r;
    r.group = g.name();
    r.ma_err = ma_err(preds, data.labels(), member, data.size());
    r.abs_ma_err = std::abs(r.ma_err);
    r.accuracy = accuracy(preds, data.labels(), member, gamma);
    for (const auto bit : member) r.support += bit;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RobustnessCheck> robustness_check(const PatchedPredictor& p,
                                              const PatchedPredictor& p2, const Dataset& s,
                                              const Dataset& s2,
                                              std::span<const FeatureRow> eval_rows,
                                              const GroupClass& groups, double eps) {
  if (s.empty()) throw DataError("robustness check needs a non-empty clean dataset");
  if (eval_rows.empty()) throw DataError("robustness check needs evaluation rows");
  require_same_schema(s.schema(), s2.schema());
  const double n = static_cast<double>(s.size());
  const auto pred = p.predict(eval_rows);
  const auto pred2 = p2.predict(eval_rows);
  const auto sym = multiset_symmetric_difference(s, s2, groups);

  std::vector<RobustnessCheck> out;
  out.reserve(groups.size());
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const auto& g = groups[gi];
    const auto eval_member = group_membership(g, s.schema(), eval_rows);
    double gap = 0.0;
    for (std::size_t i = 0; i < eval_rows.size(); ++i) {
      if (eval_member[i]) gap += pred[i] - pred2[i];
    }
    const auto m1 = group_membership(g, s);
    const auto m2 = group_membership(g, s2);
    std::int64_t pos1 = 0;
    std::int64_t pos2 = 0;
    for (std::size_t i = 0; i < s.size(); ++i) pos1 += m1[i] * s.label(i);
    for (std::size_t i = 0; i < s2.size(); ++i) pos2 += m2[i] * s2.label(i);

    RobustnessCheck c;
    c.group = g.name();
    c.lhs = std::abs(gap / static_cast<double>(eval_rows.size()));
    c.label_term = static_cast<double>(std::llabs(pos1 - pos2)) / n;
    c.sym_diff_term = static_cast<double>(sym[gi]) / n;
    c.epsilon_slack = eps;
    c.satisfied = c.lhs <= c.bound();
    out.push_back(std::move(c));
  }
  return out;
}

LabeledDistribution::LabeledDistribution(std::shared_ptr<const Schema> schema,
                                         std::vector<LabeledPoint> points)
    : schema_(std::move(schema)), points_(std::move(points)) {
  if (!schema_) throw SchemaError("distribution without schema");
  double total = 0.0;
  for (const auto& pt : points_) {
    if (pt.row.values.size() != schema_->size()) {
      throw SchemaError("distribution row does not conform to schema");
    }
    if (pt.label > 1) throw DataError("non-binary label in distribution");
    if (!(pt.probability >= 0.0) || !std::isfinite(pt.probability)) {
      throw DataError("negative or non-finite probability");
    }
    total += pt.probability;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw DataError("distribution is not normalized (sum = " + std::to_string(total) + ")");
  }
}

RowDistribution LabeledDistribution::marginal() const {
  std::vector<WeightedRow> rows;
  rows.reserve(points_.size());
  for (const auto& pt : points_) rows.push_back({pt.row, pt.probability});
  return RowDistribution(schema_, std::move(rows));
}

std::vector<RobustnessCheck> distshift_check(const PatchedPredictor& p,
                                             const PatchedPredictor& p2,
                                             const LabeledDistribution& d,
                                             const LabeledDistribution& d2,
                                             const GroupClass& groups, double eps) {
  require_same_schema(d.schema(), d2.schema());
  const RowDistribution marginal = d.marginal();
  const RowDistribution marginal2 = d2.marginal();
  std::vector<RobustnessCheck> out;
  out.reserve(groups.size());
  for (const auto& g : groups) {
    const BoundPredicate bound(g, d.schema());
    double gap = 0.0;
    for (const auto& e : marginal.entries()) {
      if (bound.contains(e.row)) gap += e.probability * (p.predict(e.row) - p2.predict(e.row));
    }
    double label_mass = 0.0;
    for (const auto& pt : d.points()) {
      if (pt.label && bound.contains(pt.row)) label_mass += pt.probability;
    }
    double label_mass2 = 0.0;
    for (const auto& pt : d2.points()) {
      if (pt.label && bound.contains(pt.row)) label_mass2 += pt.probability;
    }
    RobustnessCheck c;
    c.group = g.name();
    c.lhs = std::abs(gap);
    c.label_term = std::abs(label_mass - label_mass2);
    c.sym_diff_term = restricted_statistical_distance(marginal, marginal2, g);
    c.epsilon_slack = eps;
    c.satisfied = c.lhs <= c.bound();
    out.push_back(std::move(c));
  }
  return out;
}

void to_json(nlohmann::json& j, const GroupReport& r) {
  j = nlohmann::json{{"group", r.group},
                     {"ma_err", r.ma_err},
                     {"abs_ma_err", r.abs_ma_err},
                     {"accuracy", r.accuracy ? nlohmann::json(*r.accuracy) : nlohmann::json()},
                     {"support", r.support},
                     {"empty", r.empty()}};
}

void to_json(nlohmann::json& j, const RobustnessCheck& c) {
  j = nlohmann::json{{"group", c.group},
                     {"lhs", c.lhs},
                     {"label_term", c.label_term},
                     {"sym_diff_term", c.sym_diff_term},
                     {"epsilon_slack", c.epsilon_slack},
                     {"satisfied", c.satisfied}};
}

}  // namespace mgr
