#pragma once

#include <span>
#include <vector>

#include "foldscan/features.hpp"

namespace foldscan {

// Per-dimension z-scoring fitted on training data. Dimensions with zero
// spread divide by 1.
struct Standardization {
  std::vector<double> mean;
  std::vector<double> stdev;

  static Standardization fit(std::span<const FeatureVector> data);
  std::vector<double> apply(std::span<const double> x) const;
  std::size_t dimension() const { return mean.size(); }
};

}  // namespace foldscan
