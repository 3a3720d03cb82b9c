#include "mgr/encoding.hpp"

#include <algorithm>
#include <numeric>

#include "mgr/errors.hpp"

namespace mgr {

FeatureEncoder::FeatureEncoder(const Dataset& fit_on) {
  std::vector<std::size_t> columns(fit_on.schema().size());
  std::iota(columns.begin(), columns.end(), std::size_t{0});
  fit(fit_on, columns);
}

FeatureEncoder::FeatureEncoder(const Dataset& fit_on, std::span<const std::string> columns) {
  std::vector<std::size_t> idx;
  idx.reserve(columns.size());
  for (const auto& name : columns) idx.push_back(fit_on.schema().require(name));
  fit(fit_on, idx);
}

void FeatureEncoder::fit(const Dataset& data, std::span<const std::size_t> columns) {
  if (data.empty()) throw DataError("cannot fit a feature encoding on an empty dataset");
  std::size_t offset = 0;
  for (const std::size_t col : columns) {
    const Column& c = data.schema().column(col);
    Slot slot{col, c.kind == ColumnKind::categorical, offset, 1, 0.0, 0.0};
    if (slot.categorical) {
      slot.width = c.vocabulary.size();
    } else {
      double lo = data.row(0).values[col];
      double hi = lo;
      for (const auto& row : data.rows()) {
        lo = std::min(lo, row.values[col]);
        hi = std::max(hi, row.values[col]);
      }
      slot.min = lo;
      slot.range = hi - lo;
    }
    offset += slot.width;
    slots_.push_back(slot);
  }
  dimension_ = offset;
}

void FeatureEncoder::encode_into(const FeatureRow& row, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& s : slots_) {
    const double v = row.values[s.column];
    if (s.categorical) {
      if (v != kUnseenCode) out[s.offset + static_cast<std::size_t>(v)] = 1.0;
    } else if (s.range > 0.0) {
      out[s.offset] = (v - s.min) / s.range;
    }
  }
}

std::vector<double> FeatureEncoder::encode(const FeatureRow& row) const {
  std::vector<double> out(dimension_);
  encode_into(row, out);
  return out;
}

std::vector<double> FeatureEncoder::encode_all(std::span<const FeatureRow> rows) const {
  std::vector<double> out(rows.size() * dimension_);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    encode_into(rows[i], std::span<double>(out).subspan(i * dimension_, dimension_));
  }
  return out;
}

}  // namespace mgr
