#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mgr/dataset.hpp"
#include "mgr/groups.hpp"

namespace mgr {

/// A fitted base predictor: a pure function from rows to [0, 1].
class Model {
 public:
  virtual ~Model() = default;
  virtual double predict(const FeatureRow& row) const = 0;
  virtual std::string describe() const = 0;
};

class ConstantModel final : public Model {
 public:
  explicit ConstantModel(double value);
  double predict(const FeatureRow&) const override { return value_; }
  std::string describe() const override;
  double value() const { return value_; }

 private:
  double value_;
};

/// Wraps an arbitrary callable. Used by tests and adapters.
class FunctionModel final : public Model {
 public:
  FunctionModel(std::function<double(const FeatureRow&)> fn, std::string name);
  double predict(const FeatureRow& row) const override { return fn_(row); }
  std::string describe() const override { return name_; }

 private:
  std::function<double(const FeatureRow&)> fn_;
  std::string name_;
};

/// One boosting update: rows in `group` move by -delta, then clip.
/// delta is the signed step sgn(violation) * epsilon as applied.
struct Patch {
  GroupPredicate group;
  double delta = 0.0;
};

/// Base model plus an ordered list of patches. Evaluation replays the
/// patches in order and clips to [0, 1] after each one.
class PatchedPredictor {
 public:
  PatchedPredictor(std::shared_ptr<const Model> base,
                   std::shared_ptr<const Schema> schema,
                   std::vector<Patch> patches = {});

  double predict(const FeatureRow& row) const;
  std::vector<double> predict(std::span<const FeatureRow> rows) const;
  /// Checks that the dataset schema matches the predictor's.
  std::vector<double> predict(const Dataset& data) const;

  PatchedPredictor with_patch(Patch patch) const;

  const std::vector<Patch>& patches() const { return patches_; }
  const std::shared_ptr<const Model>& base() const { return base_; }
  const Schema& schema() const { return *schema_; }
  const std::shared_ptr<const Schema>& schema_ptr() const { return schema_; }

 private:
  std::shared_ptr<const Model> base_;
  std::shared_ptr<const Schema> schema_;
  std::vector<Patch> patches_;
  std::vector<BoundPredicate> bound_;
};

}  // namespace mgr
