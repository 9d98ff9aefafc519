#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "foldscan/features.hpp"

namespace foldscan {

struct TreeNode {
  // Internal nodes: x[dim] < threshold goes left. Leaves have dim == -1.
  int dim = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double p_folded = 0.0;
  std::size_t count = 0;

  bool is_leaf() const { return dim < 0; }
};

// CART classifier with Gini impurity, grown breadth-first under a split budget.
struct TreeModel {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::size_t max_splits = 1;
  std::size_t dimension_ = 0;

  std::size_t dimension() const { return dimension_; }
  std::size_t split_count() const;
  const TreeNode& leaf_for(std::span<const double> x) const;
  // Leaf folded probability minus 1/2.
  double decision(std::span<const double> x) const;
  Label predict(std::span<const double> x) const;
};

// Throws Error on empty data; std::invalid_argument if max_splits < 1.
TreeModel train_tree(std::span<const FeatureVector> data, std::size_t max_splits);

}  // namespace foldscan
