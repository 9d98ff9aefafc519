#include "foldscan/tree.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "foldscan/error.hpp"

namespace foldscan {

namespace {

struct Split {
  int dim = -1;
  double threshold = 0.0;
  double impurity = std::numeric_limits<double>::infinity();
};

// n * Gini for a node holding `pos` folded out of `n`.
double scaled_gini(double pos, double n) {
  if (n == 0) return 0.0;
  const double neg = n - pos;
  return n - (pos * pos + neg * neg) / n;
}

Split best_split(std::span<const FeatureVector> data, const std::vector<std::size_t>& idx,
                 std::size_t dims) {
  Split best;
  const double n = static_cast<double>(idx.size());
  double total_pos = 0;
  for (auto i : idx)
    if (data[i].label == Label::folded) ++total_pos;

  std::vector<std::size_t> order(idx);
  for (std::size_t d = 0; d < dims; ++d) {
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double va = data[a].values[d], vb = data[b].values[d];
      return va < vb || (va == vb && a < b);
    });
    double left_pos = 0;
    for (std::size_t r = 0; r + 1 < order.size(); ++r) {
      if (data[order[r]].label == Label::folded) ++left_pos;
      const double lo = data[order[r]].values[d];
      const double hi = data[order[r + 1]].values[d];
      if (!(lo < hi)) continue;
      const double nl = static_cast<double>(r + 1);
      const double impurity =
          scaled_gini(left_pos, nl) + scaled_gini(total_pos - left_pos, n - nl);
      if (impurity < best.impurity) {
        double thr = lo + (hi - lo) / 2.0;
        if (!(thr > lo)) thr = hi;  // adjacent doubles
        best = {static_cast<int>(d), thr, impurity};
      }
    }
  }
  return best;
}

}  // namespace

std::size_t TreeModel::split_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return !n.is_leaf(); }));
}

const TreeNode& TreeModel::leaf_for(std::span<const double> x) const {
  if (nodes.empty()) throw std::logic_error("empty tree");
  if (x.size() != dimension_)
    throw std::invalid_argument("query dimension " + std::to_string(x.size()) + " != model " +
                                std::to_string(dimension_));
  const TreeNode* node = &nodes.front();
  while (!node->is_leaf())
    node = &nodes[static_cast<std::size_t>(x[node->dim] < node->threshold ? node->left : node->right)];
  return *node;
}

double TreeModel::decision(std::span<const double> x) const { return leaf_for(x).p_folded - 0.5; }

Label TreeModel::predict(std::span<const double> x) const {
  return decision(x) >= 0.0 ? Label::folded : Label::normal;
}

TreeModel train_tree(std::span<const FeatureVector> data, std::size_t max_splits) {
  if (data.empty()) throw Error("tree training needs at least one vector");
  if (max_splits < 1) throw std::invalid_argument("max_splits must be >= 1");
  const std::size_t dims = uniform_dimension(data);
  for (const auto& v : data)
    if (v.label != Label::folded && v.label != Label::normal)
      throw Error("training data contains an unlabeled vector (source '" + v.source_id + "')");

  TreeModel model;
  model.max_splits = max_splits;
  model.dimension_ = dims;

  auto make_leaf = [&](const std::vector<std::size_t>& idx) {
    TreeNode node;
    std::size_t pos = 0;
    for (auto i : idx)
      if (data[i].label == Label::folded) ++pos;
    node.count = idx.size();
    node.p_folded = static_cast<double>(pos) / static_cast<double>(idx.size());
    model.nodes.push_back(node);
    return static_cast<int>(model.nodes.size() - 1);
  };

  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), 0);
  make_leaf(all);

  // Breadth-first: a smaller budget always yields a prefix of the same growth.
  std::deque<std::pair<int, std::vector<std::size_t>>> queue;
  queue.emplace_back(0, std::move(all));
  std::size_t splits = 0;
  while (!queue.empty() && splits < max_splits) {
    auto [id, idx] = std::move(queue.front());
    queue.pop_front();
    const double p = model.nodes[static_cast<std::size_t>(id)].p_folded;
    if (p == 0.0 || p == 1.0) continue;
    const Split s = best_split(data, idx, dims);
    if (s.dim < 0) continue;

    std::vector<std::size_t> left, right;
    for (auto i : idx) (data[i].values[static_cast<std::size_t>(s.dim)] < s.threshold ? left : right).push_back(i);
    const int l = make_leaf(left);
    const int r = make_leaf(right);
    auto& node = model.nodes[static_cast<std::size_t>(id)];
    node.dim = s.dim;
    node.threshold = s.threshold;
    node.left = l;
    node.right = r;
    ++splits;
    queue.emplace_back(l, std::move(left));
    queue.emplace_back(r, std::move(right));
  }
  return model;
}

}  // namespace foldscan
