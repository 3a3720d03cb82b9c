// Fixtures, random generators and brute-force oracles shared by the tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "mgr/dataset.hpp"
#include "mgr/distance.hpp"
#include "mgr/groups.hpp"
#include "mgr/predictor.hpp"

namespace mgr::test {

// F1: four rows, labels [1,1,0,0], A = rows 0-1, B = rows 2-3.
inline std::shared_ptr<const Schema> f1_schema() {
  return std::make_shared<const Schema>(
      std::vector<Column>{Column{"g", ColumnKind::categorical, {"A", "B"}},
                          Column{"id", ColumnKind::numeric, {}}},
      "label");
}

inline Dataset f1() {
  auto schema = f1_schema();
  std::vector<FeatureRow> rows{{{0, 0}}, {{0, 1}}, {{1, 2}}, {{1, 3}}};
  return Dataset(schema, rows, {1, 1, 0, 0});
}

inline GroupClass f1_groups() {
  return GroupClass({GroupPredicate::parse("A: g==A"), GroupPredicate::parse("B: g==B")});
}

inline PatchedPredictor constant(double v, std::shared_ptr<const Schema> schema) {
  return PatchedPredictor(std::make_shared<ConstantModel>(v), std::move(schema));
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("mgrobust_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

// Random instances: numeric columns x0..x{c-1} with small integer values so
// duplicates are common, plus a categorical column "c" over {p, q, r}.
struct RandomInstance {
  Dataset data;
  GroupClass groups;
  std::vector<double> preds;
};

inline std::shared_ptr<const Schema> random_schema(std::size_t numeric_columns) {
  std::vector<Column> cols;
  for (std::size_t j = 0; j < numeric_columns; ++j) {
    cols.push_back(Column{"x" + std::to_string(j), ColumnKind::numeric, {}});
  }
  cols.push_back(Column{"c", ColumnKind::categorical, {"p", "q", "r"}});
  return std::make_shared<const Schema>(std::move(cols), "label");
}

inline Dataset random_dataset(std::mt19937_64& gen, std::shared_ptr<const Schema> schema,
                              std::size_t n, int value_range) {
  std::uniform_int_distribution<int> value(0, value_range);
  std::uniform_int_distribution<int> cat(0, 2);
  std::bernoulli_distribution coin(0.5);
  std::vector<FeatureRow> rows(n);
  std::vector<Label> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j + 1 < schema->size(); ++j) rows[i].values.push_back(value(gen));
    rows[i].values.push_back(cat(gen));
    labels[i] = coin(gen) ? 1 : 0;
  }
  return Dataset(std::move(schema), std::move(rows), std::move(labels));
}

// Up to max_groups random conjunctions of one or two atoms; groups overlap.
inline GroupClass random_groups(std::mt19937_64& gen, const Schema& schema,
                                std::size_t max_groups, int value_range) {
  std::uniform_int_distribution<std::size_t> count(1, max_groups);
  std::uniform_int_distribution<std::size_t> numeric_col(0, schema.size() - 2);
  std::uniform_int_distribution<int> value(0, value_range);
  std::uniform_int_distribution<int> op(0, 3);
  std::uniform_int_distribution<int> cat(0, 2);
  std::bernoulli_distribution two_atoms(0.4);
  std::bernoulli_distribution use_cat(0.3);
  const char* tokens[] = {"p", "q", "r"};
  const Comparator ops[] = {Comparator::eq, Comparator::ne, Comparator::le, Comparator::gt};
  std::vector<GroupPredicate> groups;
  const std::size_t k = count(gen);
  for (std::size_t g = 0; g < k; ++g) {
    std::vector<Atom> atoms;
    const std::size_t n_atoms = two_atoms(gen) ? 2 : 1;
    for (std::size_t a = 0; a < n_atoms; ++a) {
      if (use_cat(gen)) {
        atoms.push_back(Atom{"c", cat(gen) == 0 ? Comparator::ne : Comparator::eq,
                             tokens[cat(gen)]});
      } else {
        atoms.push_back(Atom{schema.column(numeric_col(gen)).name, ops[op(gen)],
                             std::to_string(value(gen))});
      }
    }
    groups.emplace_back("g" + std::to_string(g), std::move(atoms));
  }
  return GroupClass(std::move(groups));
}

inline std::vector<double> random_predictions(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::bernoulli_distribution snap(0.1);
  std::vector<double> p(n);
  for (auto& v : p) v = snap(gen) ? (u(gen) < 0.5 ? 0.0 : 1.0) : u(gen);
  return p;
}

// ---------------------------------------------------------------------------
// Brute-force oracles: naive loops, no shared code with the library beyond
// the row representation.

inline bool oracle_atom(const Schema& schema, const Atom& atom, const FeatureRow& row) {
  std::size_t col = 0;
  while (schema.column(col).name != atom.column) ++col;
  const Column& c = schema.column(col);
  const double v = row.values[col];
  if (c.kind == ColumnKind::categorical) {
    const bool equal = v >= 0 && c.vocabulary[static_cast<std::size_t>(v)] == atom.value;
    return atom.op == Comparator::eq ? equal : !equal;
  }
  const double ref = std::stod(atom.value);
  switch (atom.op) {
    case Comparator::eq: return v == ref;
    case Comparator::ne: return v != ref;
    case Comparator::le: return v <= ref;
    case Comparator::gt: return v > ref;
  }
  return false;
}

inline bool oracle_member(const Schema& schema, const GroupPredicate& g, const FeatureRow& row) {
  for (const auto& atom : g.atoms()) {
    if (!oracle_atom(schema, atom, row)) return false;
  }
  return true;
}

inline double oracle_ma_err(const std::vector<double>& p, const Dataset& d,
                            const GroupPredicate& g) {
  double total = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (oracle_member(d.schema(), g, d.row(i))) total += p[i] - d.label(i);
  }
  return total / static_cast<double>(d.size());
}

inline std::optional<double> oracle_accuracy(const std::vector<double>& p, const Dataset& d,
                                             const GroupPredicate& g, double gamma) {
  std::size_t hit = 0;
  std::size_t support = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!oracle_member(d.schema(), g, d.row(i))) continue;
    ++support;
    if ((p[i] > gamma ? 1 : 0) == d.label(i)) ++hit;
  }
  if (support == 0) return std::nullopt;
  return static_cast<double>(hit) / static_cast<double>(support);
}

inline double oracle_l2(const std::vector<double>& p, const Dataset& d) {
  double total = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double r = d.label(i) - p[i];
    total += r * r;
  }
  return total / static_cast<double>(d.size());
}

// Counts multiplicities by pairwise comparison of feature values.
inline std::uint64_t oracle_sym_diff(const Dataset& s, const Dataset& s2,
                                     const GroupPredicate& g) {
  std::vector<FeatureRow> distinct;
  for (const auto* d : {&s, &s2}) {
    for (const auto& row : d->rows()) {
      if (std::find(distinct.begin(), distinct.end(), row) == distinct.end()) {
        distinct.push_back(row);
      }
    }
  }
  std::uint64_t total = 0;
  for (const auto& x : distinct) {
    if (!oracle_member(s.schema(), g, x)) continue;
    const auto a = std::count(s.rows().begin(), s.rows().end(), x);
    const auto b = std::count(s2.rows().begin(), s2.rows().end(), x);
    total += static_cast<std::uint64_t>(a > b ? a - b : b - a);
  }
  return total;
}

inline double oracle_rsd(const Schema& schema, const std::vector<WeightedRow>& d,
                         const std::vector<WeightedRow>& d2, const GroupPredicate& g) {
  std::vector<FeatureRow> distinct;
  for (const auto* dist : {&d, &d2}) {
    for (const auto& e : *dist) {
      if (std::find(distinct.begin(), distinct.end(), e.row) == distinct.end()) {
        distinct.push_back(e.row);
      }
    }
  }
  double total = 0.0;
  for (const auto& x : distinct) {
    if (!oracle_member(schema, g, x)) continue;
    double a = 0.0;
    double b = 0.0;
    for (const auto& e : d) {
      if (e.row == x) a += e.probability;
    }
    for (const auto& e : d2) {
      if (e.row == x) b += e.probability;
    }
    total += std::abs(a - b);
  }
  return total;
}

// Random distribution over rows of a dataset; repeated rows stay separate
// entries so merging is exercised.
inline std::vector<WeightedRow> random_distribution(std::mt19937_64& gen, const Dataset& d) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<WeightedRow> out;
  double total = 0.0;
  for (const auto& row : d.rows()) {
    const double w = u(gen);
    out.push_back(WeightedRow{row, w});
    total += w;
  }
  for (auto& e : out) e.probability /= total;
  return out;
}

}  // namespace mgr::test
