#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mgr {

enum class ColumnKind { numeric, categorical };

/// Categorical cells hold the index of their token in the column
/// vocabulary; tokens outside the vocabulary collapse to this code.
inline constexpr double kUnseenCode = -1.0;
inline constexpr std::string_view kUnseenToken = "<unseen>";

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  /// Sorted, unique. Empty for numeric columns.
  std::vector<std::string> vocabulary;

  /// Code for a token, or kUnseenCode when the token is not in the vocabulary.
  double code_of(std::string_view token) const;
  /// Token for a code; kUnseenToken for the unseen code.
  std::string_view token_of(double code) const;

  bool operator==(const Column&) const = default;
};

class Schema {
 public:
  Schema() = default;
  Schema(std::vector<Column> columns, std::string label_name);

  std::size_t size() const { return columns_.size(); }
  const Column& column(std::size_t i) const { return columns_.at(i); }
  const std::vector<Column>& columns() const { return columns_; }
  const std::string& label_name() const { return label_name_; }

  std::optional<std::size_t> index_of(std::string_view name) const;
  /// Like index_of but throws SchemaError for unknown names.
  std::size_t require(std::string_view name) const;

  bool operator==(const Schema&) const = default;

 private:
  std::vector<Column> columns_;
  std::string label_name_;
};

/// One domain point. values[j] is the numeric value of column j, or the
/// vocabulary code for categorical columns.
struct FeatureRow {
  std::vector<double> values;

  bool operator==(const FeatureRow&) const = default;
};

/// Canonical text identity of a row: columns in schema order joined by
/// '\x1f', numbers printed with 17 significant digits, categoricals as
/// their token. Labels never participate.
std::string canonical_key(const Schema& schema, const FeatureRow& row);

using Label = std::uint8_t;

/// Labelled multiset of rows. Immutable; derived datasets share the schema.
class Dataset {
 public:
  Dataset(std::shared_ptr<const Schema> schema, std::vector<FeatureRow> rows,
          std::vector<Label> labels);

  const Schema& schema() const { return *schema_; }
  const std::shared_ptr<const Schema>& schema_ptr() const { return schema_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

  const std::vector<FeatureRow>& rows() const { return rows_; }
  const std::vector<Label>& labels() const { return labels_; }
  const FeatureRow& row(std::size_t i) const { return rows_.at(i); }
  Label label(std::size_t i) const { return labels_.at(i); }

  Dataset subset(std::span<const std::size_t> indices) const;
  Dataset with_labels(std::vector<Label> labels) const;
  /// Rows of this dataset followed by rows of `tail`; schemas must match.
  Dataset concat(const Dataset& tail) const;

 private:
  std::shared_ptr<const Schema> schema_;
  std::vector<FeatureRow> rows_;
  std::vector<Label> labels_;
};

/// Throws SchemaError unless both schemas describe the same columns.
void require_same_schema(const Schema& a, const Schema& b);

}  // namespace mgr
