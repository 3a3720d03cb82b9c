#pragma once

#include <span>

namespace mgr {

/// Pairwise (cascade) summation with a fixed split order, so the result is
/// independent of threading and stable across platforms.
double pairwise_sum(std::span<const double> values);

inline double clip01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

}  // namespace mgr
