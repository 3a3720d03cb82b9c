#include "mgr/synth.hpp"

#include <cmath>
#include <set>

#include "mgr/errors.hpp"
#include "mgr/rng.hpp"

namespace mgr {

SyntheticSpec SyntheticSpec::census_like(std::size_t n, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.n = n;
  spec.seed = seed;
  spec.layout = {
      {{"White", "Male"}, 0.360, 0.45},   {{"White", "Female"}, 0.350, 0.30},
      {{"Black", "Male"}, 0.115, 0.22},   {{"Black", "Female"}, 0.120, 0.14},
      {{"Asian", "Male"}, 0.010, 0.45},   {{"Asian", "Female"}, 0.010, 0.35},
      {{"Other", "Male"}, 0.018, 0.30},   {{"Other", "Female"}, 0.017, 0.20},
  };
  return spec;
}

void SyntheticSpec::validate() const {
  if (n == 0) throw ConfigError("synthetic n must be positive");
  if (layout.empty()) throw ConfigError("synthetic layout is empty");
  double total = 0.0;
  for (const auto& cell : layout) {
    if (cell.tokens.size() != group_columns.size()) {
      throw ConfigError("synthetic layout cell has " + std::to_string(cell.tokens.size()) +
                        " tokens for " + std::to_string(group_columns.size()) + " columns");
    }
    if (!(cell.weight >= 0.0)) throw ConfigError("synthetic weights must be non-negative");
    if (!(cell.positive_rate >= 0.0 && cell.positive_rate <= 1.0)) {
      throw ConfigError("synthetic positive rates must lie in [0, 1]");
    }
    total += cell.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("synthetic weights must sum to 1");
  if (!std::isfinite(signal)) throw ConfigError("synthetic signal must be finite");
}

void from_json(const nlohmann::json& j, SyntheticSpec& spec) {
  const auto n = j.value("n", std::size_t{20000});
  const auto seed = j.value("seed", std::uint64_t{0});
  spec = SyntheticSpec::census_like(n, seed);
  if (j.contains("group_columns")) {
    spec.group_columns = j.at("group_columns").get<std::vector<std::string>>();
  }
  if (j.contains("layout")) {
    spec.layout.clear();
    for (const auto& cell : j.at("layout")) {
      spec.layout.push_back({cell.at("tokens").get<std::vector<std::string>>(),
                             cell.at("weight").get<double>(),
                             cell.at("positive_rate").get<double>()});
    }
  }
  spec.nuisance_features = j.value("nuisance_features", spec.nuisance_features);
  spec.signal = j.value("signal", spec.signal);
  spec.validate();
}

void to_json(nlohmann::json& j, const SyntheticSpec& spec) {
  nlohmann::json layout = nlohmann::json::array();
  for (const auto& cell : spec.layout) {
    layout.push_back(
        {{"tokens", cell.tokens}, {"weight", cell.weight}, {"positive_rate", cell.positive_rate}});
  }
  j = nlohmann::json{{"n", spec.n},
                     {"group_columns", spec.group_columns},
                     {"layout", layout},
                     {"nuisance_features", spec.nuisance_features},
                     {"signal", spec.signal},
                     {"seed", spec.seed}};
}

// Per row: pick a layout cell by weight, draw y ~ Bernoulli(cell rate), then
// for feature j = 0..k-1 draw f_j = s_j * y + N(0, 1) with
// s_j = signal * (k - j) / k, rounded to two decimals. The label log-odds
// are thus linear in the features given the cell, with decreasing strength.
Dataset synthesize(const SyntheticSpec& spec) {
  spec.validate();
  std::vector<Column> columns;
  for (std::size_t c = 0; c < spec.group_columns.size(); ++c) {
    std::set<std::string> vocab;
    for (const auto& cell : spec.layout) vocab.insert(cell.tokens[c]);
    columns.push_back(
        Column{spec.group_columns[c], ColumnKind::categorical, {vocab.begin(), vocab.end()}});
  }
  for (std::size_t j = 0; j < spec.nuisance_features; ++j) {
    columns.push_back(Column{"f" + std::to_string(j + 1), ColumnKind::numeric, {}});
  }
  auto schema = std::make_shared<const Schema>(std::move(columns), "label");

  std::vector<std::vector<double>> codes(spec.layout.size());
  for (std::size_t l = 0; l < spec.layout.size(); ++l) {
    for (std::size_t c = 0; c < spec.group_columns.size(); ++c) {
      codes[l].push_back(schema->column(c).code_of(spec.layout[l].tokens[c]));
    }
  }

  CounterRng rng(derive_seed(spec.seed, "synthesize"));
  std::vector<FeatureRow> rows(spec.n);
  std::vector<Label> labels(spec.n);
  const double k = static_cast<double>(spec.nuisance_features);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double u = rng.uniform();
    std::size_t cell = spec.layout.size() - 1;
    double cumulative = 0.0;
    for (std::size_t l = 0; l < spec.layout.size(); ++l) {
      cumulative += spec.layout[l].weight;
      if (u < cumulative) {
        cell = l;
        break;
      }
    }
    const Label y = rng.uniform() < spec.layout[cell].positive_rate ? 1 : 0;
    auto& row = rows[i].values;
    row = codes[cell];
    for (std::size_t j = 0; j < spec.nuisance_features; ++j) {
      const double shift = spec.signal * (k - static_cast<double>(j)) / k;
      const double v = shift * y + rng.normal();
      row.push_back(std::round(v * 100.0) / 100.0);
    }
    labels[i] = y;
  }
  return Dataset(std::move(schema), std::move(rows), std::move(labels));
}

}  // namespace mgr
