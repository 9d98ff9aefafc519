#pragma once

// Reference computations used to check the library. Deliberately written
// along different lines from the production code paths.

#include <span>
#include <vector>

#include "foldscan/features.hpp"
#include "foldscan/image.hpp"
#include "foldscan/kernel.hpp"
#include "foldscan/knn.hpp"

namespace foldscan::testing {

struct DualOracleResult {
  std::vector<double> alpha;
  double objective = 0.0;
};

// Accelerated projected-gradient ascent on the SVM dual over the dense Q
// matrix, with exact (bisection) projection onto the box-and-hyperplane set.
DualOracleResult dual_qp_oracle(const std::vector<std::vector<double>>& Q, std::span<const int> y,
                                std::span<const double> upper, int max_iterations = 60000);

std::vector<std::vector<double>> dense_q(const std::vector<std::vector<double>>& x,
                                         std::span<const int> y, const KernelSpec& spec);
double dual_objective(const std::vector<std::vector<double>>& Q, std::span<const double> alpha);

// Population z-scoring written out longhand.
std::vector<std::vector<double>> zscore(std::span<const FeatureVector> data);

// Full sort of all distances; first k after (distance, index) ordering.
Label knn_oracle(const std::vector<std::vector<double>>& points, const std::vector<Label>& labels,
                 std::size_t k, Metric metric, std::span<const double> q);

// Accuracy of leave-one-source-out nearest-centroid classification on the
// identity variants.
double nearest_centroid_loo_accuracy(std::span<const FeatureVector> data);

// Every grid cell counted by hand: cell area relative to window^2.
std::vector<Rect> tile_oracle(int width, int height, int window);

}  // namespace foldscan::testing
