#include "mgr/ma_boost.hpp"

#include <cmath>
#include <limits>

#include "mgr/errors.hpp"
#include "mgr/numeric.hpp"

namespace mgr {

void BoostConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ConfigError("boost epsilon must lie in (0, 1]");
  if (max_iterations && *max_iterations == 0) throw ConfigError("max_iterations must be positive");
}

std::size_t iteration_bound(double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  // The small offset keeps e.g. 1/0.1^2 = 100.00000000000001 at 100.
  return static_cast<std::size_t>(std::ceil(1.0 / (epsilon * epsilon) - 1e-9));
}

namespace {

/// Per-group signed violations on cached predictions.
std::vector<double> violations(std::span<const double> preds, std::span<const Label> labels,
                               const std::vector<std::vector<std::size_t>>& members) {
  const double n = static_cast<double>(preds.size());
  std::vector<double> out(members.size());
  for (std::size_t g = 0; g < members.size(); ++g) {
    double sum = 0.0;
    for (const std::size_t i : members[g]) sum += preds[i] - static_cast<double>(labels[i]);
    out[g] = sum / n;
  }
  return out;
}

std::optional<std::size_t> worst_group(std::span<const double> v, double eps) {
  std::optional<std::size_t> best;
  for (std::size_t g = 0; g < v.size(); ++g) {
    const double mag = std::abs(v[g]);
    if (mag > eps && (!best || mag > std::abs(v[*best]))) best = g;
  }
  return best;
}

}  // namespace

std::optional<AuditFinding> audit(const PatchedPredictor& p, const Dataset& s,
                                  const GroupClass& groups, double eps) {
  if (s.empty()) throw DataError("cannot audit on an empty dataset");
  const auto preds = p.predict(s);
  const auto v = violations(preds, s.labels(), group_members(groups, s));
  const auto g = worst_group(v, eps);
  if (!g) return std::nullopt;
  return AuditFinding{*g, groups[*g].name(), v[*g]};
}

double empirical_l2(std::span<const double> preds, std::span<const Label> labels) {
  if (preds.empty()) throw DataError("empirical loss of an empty dataset");
  if (preds.size() != labels.size()) throw DataError("predictions and labels differ in length");
  std::vector<double> sq(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double r = static_cast<double>(labels[i]) - preds[i];
    sq[i] = r * r;
  }
  return pairwise_sum(sq) / static_cast<double>(preds.size());
}

double empirical_l2(const PatchedPredictor& p, const Dataset& s) {
  if (s.empty()) throw DataError("empirical loss of an empty dataset");
  return empirical_l2(p.predict(s), s.labels());
}

BoostResult boost(const PatchedPredictor& base, const Dataset& s, const GroupClass& groups,
                  const BoostConfig& config) {
  config.validate();
  if (s.empty()) throw DataError("cannot boost on an empty dataset");
  const double eps = config.epsilon;
  const std::size_t cap = config.max_iterations.value_or(iteration_bound(eps) + 1);

  // Patches act on the cached training predictions; the returned predictor
  // replays the same patch list symbolically, with identical arithmetic.
  std::vector<double> preds = base.predict(s);
  const auto& labels = s.labels();
  const auto members = group_members(groups, s);

  BoostTrace trace;
  std::vector<Patch> patches = base.patches();
  double loss = empirical_l2(preds, labels);
  trace.initial_loss = loss;

  while (true) {
    const auto v = violations(preds, labels, members);
    const auto g = worst_group(v, eps);
    if (!g) break;
    if (trace.steps.size() >= cap) {
      throw InvariantError("boosting exceeded " + std::to_string(cap) +
                           " iterations; the stopping bound was violated");
    }
    const int sign = v[*g] > 0.0 ? 1 : -1;
    const double delta = sign * eps;
    for (const std::size_t i : members[*g]) preds[i] = clip01(preds[i] - delta);

    const double next_loss = empirical_l2(preds, labels);
    trace.steps.push_back(
        TraceStep{trace.steps.size(), groups[*g].name(), v[*g], sign, loss, next_loss});
    patches.push_back(Patch{groups[*g], delta});
    loss = next_loss;
  }
  trace.final_loss = loss;
  PatchedPredictor boosted(base.base(), base.schema_ptr(), std::move(patches));
  return BoostResult{std::move(boosted), std::move(trace)};
}

std::size_t required_sample_size(double family_size, std::size_t group_count, double eps,
                                 double delta) {
  if (!(family_size >= 1.0)) throw ConfigError("predictor family size must be at least 1");
  if (group_count == 0) throw ConfigError("group count must be positive");
  if (!(eps > 0.0)) throw ConfigError("epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  const double inv = 1.0 / (eps * eps);
  const double log_term = std::log(family_size) +
                          (inv + 1.0) * std::log(2.0 * static_cast<double>(group_count)) -
                          std::log(delta);
  const double n = log_term / (2.0 * eps * eps);
  return static_cast<std::size_t>(std::ceil(n));
}

std::string BoostTrace::to_jsonl() const {
  std::string out;
  for (const auto& step : steps) {
    out += nlohmann::json(step).dump();
    out += '\n';
  }
  return out;
}

void to_json(nlohmann::json& j, const TraceStep& step) {
  j = nlohmann::json{{"iteration", step.iteration},     {"group", step.group},
                     {"violation", step.violation},     {"sign", step.sign},
                     {"loss_before", step.loss_before}, {"loss_after", step.loss_after}};
}

}  // namespace mgr
