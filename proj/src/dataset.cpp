#include "mgr/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mgr/errors.hpp"

namespace mgr {

double Column::code_of(std::string_view token) const {
  const auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), token);
  if (it == vocabulary.end() || *it != token) return kUnseenCode;
  return static_cast<double>(it - vocabulary.begin());
}

std::string_view Column::token_of(double code) const {
  if (code == kUnseenCode) return kUnseenToken;
  return vocabulary.at(static_cast<std::size_t>(code));
}

Schema::Schema(std::vector<Column> columns, std::string label_name)
    : columns_(std::move(columns)), label_name_(std::move(label_name)) {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    auto& c = columns_[i];
    if (c.name.empty()) throw SchemaError("column " + std::to_string(i) + " has no name");
    if (c.name == label_name_) throw SchemaError("feature column shadows label: " + c.name);
    for (std::size_t j = 0; j < i; ++j) {
      if (columns_[j].name == c.name) throw SchemaError("duplicate column: " + c.name);
    }
    if (c.kind == ColumnKind::categorical) {
      std::sort(c.vocabulary.begin(), c.vocabulary.end());
      c.vocabulary.erase(std::unique(c.vocabulary.begin(), c.vocabulary.end()),
                         c.vocabulary.end());
    } else if (!c.vocabulary.empty()) {
      throw SchemaError("numeric column with vocabulary: " + c.name);
    }
  }
}

std::optional<std::size_t> Schema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Schema::require(std::string_view name) const {
  if (auto i = index_of(name)) return *i;
  throw SchemaError("unknown column: " + std::string(name));
}

std::string canonical_key(const Schema& schema, const FeatureRow& row) {
  std::string key;
  key.reserve(row.values.size() * 8);
  char buf[32];
  for (std::size_t j = 0; j < row.values.size(); ++j) {
    if (j > 0) key.push_back('\x1f');
    const Column& c = schema.column(j);
    if (c.kind == ColumnKind::categorical) {
      key.append(c.token_of(row.values[j]));
    } else {
      const int len = std::snprintf(buf, sizeof buf, "%.17g", row.values[j]);
      key.append(buf, static_cast<std::size_t>(len));
    }
  }
  return key;
}

namespace {

void validate_row(const Schema& schema, const FeatureRow& row, std::size_t index) {
  if (row.values.size() != schema.size()) {
    throw SchemaError("row " + std::to_string(index) + " has " +
                      std::to_string(row.values.size()) + " cells, schema has " +
                      std::to_string(schema.size()));
  }
  for (std::size_t j = 0; j < row.values.size(); ++j) {
    const double v = row.values[j];
    const Column& c = schema.column(j);
    if (c.kind == ColumnKind::numeric) {
      if (!std::isfinite(v)) {
        throw DataError("non-finite value in column " + c.name + " at row " +
                        std::to_string(index));
      }
      continue;
    }
    const bool valid = v == kUnseenCode ||
                       (v >= 0.0 && v < static_cast<double>(c.vocabulary.size()) &&
                        v == std::floor(v));
    if (!valid) {
      throw SchemaError("invalid category code in column " + c.name + " at row " +
                        std::to_string(index));
    }
  }
}

}  // namespace

Dataset::Dataset(std::shared_ptr<const Schema> schema, std::vector<FeatureRow> rows,
                 std::vector<Label> labels)
    : schema_(std::move(schema)), rows_(std::move(rows)), labels_(std::move(labels)) {
  if (!schema_) throw SchemaError("dataset without schema");
  if (rows_.size() != labels_.size()) {
    throw DataError("row count " + std::to_string(rows_.size()) + " != label count " +
                    std::to_string(labels_.size()));
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (labels_[i] > 1) throw DataError("non-binary label at row " + std::to_string(i));
    validate_row(*schema_, rows_[i], i);
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<FeatureRow> rows;
  std::vector<Label> labels;
  rows.reserve(indices.size());
  labels.reserve(indices.size());
  for (const std::size_t i : indices) {
    rows.push_back(rows_.at(i));
    labels.push_back(labels_.at(i));
  }
  return Dataset(schema_, std::move(rows), std::move(labels));
}

Dataset Dataset::with_labels(std::vector<Label> labels) const {
  return Dataset(schema_, rows_, std::move(labels));
}

Dataset Dataset::concat(const Dataset& tail) const {
  require_same_schema(*schema_, tail.schema());
  std::vector<FeatureRow> rows = rows_;
  std::vector<Label> labels = labels_;
  rows.insert(rows.end(), tail.rows_.begin(), tail.rows_.end());
  labels.insert(labels.end(), tail.labels_.begin(), tail.labels_.end());
  return Dataset(schema_, std::move(rows), std::move(labels));
}

void require_same_schema(const Schema& a, const Schema& b) {
  if (&a == &b) return;
  if (a.columns() != b.columns()) throw SchemaError("schema mismatch");
}

}  // namespace mgr
