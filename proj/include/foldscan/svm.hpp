#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "foldscan/features.hpp"
#include "foldscan/kernel.hpp"
#include "foldscan/standardize.hpp"

namespace foldscan {

struct SvmOptions {
  KernelSpec kernel;
  double C = 1.0;
  // Box constraint multipliers; C_i = C * weight of y_i's class.
  double weight_folded = 1.0;
  double weight_normal = 1.0;
  // Stop once the maximal KKT violation m(a) - M(a) drops below tol.
  double tol = 1e-3;
  std::size_t max_iterations = 1'000'000;
  std::size_t cache_bytes = std::size_t{256} << 20;
};

struct SmoReport {
  std::size_t iterations = 0;
  bool converged = false;
  double max_violation = 0.0;
  double dual_objective = 0.0;  // sum(a) - 1/2 a'Qa
};

struct DualSolution {
  std::vector<double> alpha;
  double bias = 0.0;
  SmoReport report;
};

// Solves  max sum(a) - 1/2 sum_ij a_i a_j y_i y_j K(x_i, x_j)
//         s.t. 0 <= a_i <= upper_i, sum a_i y_i = 0
// by SMO with maximal-violating-pair working set selection. y_i in {-1,+1}.
DualSolution solve_dual(const std::vector<std::vector<double>>& x, std::span<const int> y,
                        std::span<const double> upper, const SvmOptions& options);

struct SvmModel {
  KernelSpec kernel_spec;
  double C = 1.0;
  double weight_folded = 1.0;
  double weight_normal = 1.0;
  Standardization standardization;
  // Standardized support vectors with a > 0.
  std::vector<std::vector<double>> support_vectors;
  std::vector<int> labels;  // +1 folded, -1 normal
  std::vector<double> alphas;
  double bias = 0.0;
  SmoReport training;

  std::size_t dimension() const { return standardization.dimension(); }
  // sum a_i y_i K(s_i, z) + b on the standardized query z.
  double decision(std::span<const double> raw) const;
  Label predict(std::span<const double> raw) const;
};

// Throws Error for single-class data, unknown labels, non-finite values
// or mixed dimensions.
SvmModel train_svm(std::span<const FeatureVector> data, const SvmOptions& options);

}  // namespace foldscan
