#include "mgr/predictor.hpp"

#include <cstdio>

#include "mgr/errors.hpp"
#include "mgr/numeric.hpp"

namespace mgr {

ConstantModel::ConstantModel(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) throw DataError("constant prediction outside [0, 1]");
}

std::string ConstantModel::describe() const {
  char buf[48];
  std::snprintf(buf, sizeof buf, "constant(%.17g)", value_);
  return buf;
}

FunctionModel::FunctionModel(std::function<double(const FeatureRow&)> fn, std::string name)
    : fn_(std::move(fn)), name_(std::move(name)) {}

PatchedPredictor::PatchedPredictor(std::shared_ptr<const Model> base,
                                   std::shared_ptr<const Schema> schema,
                                   std::vector<Patch> patches)
    : base_(std::move(base)), schema_(std::move(schema)), patches_(std::move(patches)) {
  if (!base_) throw ConfigError("predictor without base model");
  if (!schema_) throw SchemaError("predictor without schema");
  bound_.reserve(patches_.size());
  for (const auto& p : patches_) bound_.emplace_back(p.group, *schema_);
}

double PatchedPredictor::predict(const FeatureRow& row) const {
  double p = base_->predict(row);
  for (std::size_t i = 0; i < patches_.size(); ++i) {
    if (bound_[i].contains(row)) p = clip01(p - patches_[i].delta);
  }
  return p;
}

std::vector<double> PatchedPredictor::predict(std::span<const FeatureRow> rows) const {
  std::vector<double> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = predict(rows[i]);
  return out;
}

std::vector<double> PatchedPredictor::predict(const Dataset& data) const {
  require_same_schema(*schema_, data.schema());
  return predict(std::span<const FeatureRow>(data.rows()));
}

PatchedPredictor PatchedPredictor::with_patch(Patch patch) const {
  PatchedPredictor next = *this;
  next.bound_.emplace_back(patch.group, *schema_);
  next.patches_.push_back(std::move(patch));
  return next;
}

}  // namespace mgr
