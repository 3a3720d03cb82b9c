#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mgr/dataset.hpp"

namespace mgr {

/// Maps rows to dense real vectors: one-hot for categorical columns (the
/// unseen code maps to all zeros) and min-max scaling for numeric columns,
/// with ranges taken from the fitting dataset. Constant columns map to 0.
class FeatureEncoder {
 public:
  /// Encodes every column of the schema.
  explicit FeatureEncoder(const Dataset& fit_on);
  /// Encodes only the named columns, in the given order.
  FeatureEncoder(const Dataset& fit_on, std::span<const std::string> columns);

  std::size_t dimension() const { return dimension_; }
  std::vector<double> encode(const FeatureRow& row) const;
  void encode_into(const FeatureRow& row, std::span<double> out) const;
  /// Row-major n x dimension matrix.
  std::vector<double> encode_all(std::span<const FeatureRow> rows) const;

 private:
  struct Slot {
    std::size_t column;
    bool categorical;
    std::size_t offset;
    std::size_t width;
    double min;
    double range;
  };
  void fit(const Dataset& data, std::span<const std::size_t> columns);

  std::vector<Slot> slots_;
  std::size_t dimension_ = 0;
};

}  // namespace mgr
