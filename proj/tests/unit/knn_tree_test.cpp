#include <gtest/gtest.h>

#include <random>

#include "foldscan/error.hpp"
#include "foldscan/knn.hpp"
#include "foldscan/tree.hpp"
#include "oracles.hpp"

using namespace foldscan;

namespace {

FeatureVector fv(std::vector<double> v, Label l) { return {std::move(v), l, "s", "identity+noflip+L-orig"}; }

double accuracy(const TreeModel& m, const std::vector<FeatureVector>& data) {
  int ok = 0;
  for (const auto& v : data) ok += m.predict(v.values) == v.label;
  return static_cast<double>(ok) / data.size();
}

std::vector<FeatureVector> noisy_xor_data(std::mt19937_64& rng, int n, int d) {
  std::normal_distribution<double> g(0, 1);
  std::vector<FeatureVector> out;
  for (int i = 0; i < n; ++i) {
    std::vector<double> x(d);
    for (auto& v : x) v = g(rng);
    out.push_back(fv(x, g(rng) + x[0] * x[1] > 0 ? Label::folded : Label::normal));
  }
  return out;
}

}  // namespace

TEST(Knn, QueryOnTrainingPoint) {
  const std::vector<FeatureVector> data{fv({0, 0}, Label::folded), fv({5, 5}, Label::normal)};
  const auto m = train_knn(data, 1, Metric::euclidean);
  EXPECT_EQ(m.predict(std::vector<double>{5, 5}), Label::normal);
  EXPECT_EQ(m.predict(std::vector<double>{0, 0}), Label::folded);
}

TEST(Knn, ThreeNearest) {
  const std::vector<FeatureVector> data{fv({0, 0}, Label::folded), fv({1, 0}, Label::folded),
                                        fv({10, 10}, Label::normal)};
  const auto m = train_knn(data, 3, Metric::euclidean);
  EXPECT_EQ(m.predict(std::vector<double>{0.4, 0}), Label::folded);
  EXPECT_EQ(m.neighbors(std::vector<double>{0.4, 0}), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_NEAR(m.decision(std::vector<double>{0.4, 0}), 2.0 / 3.0 - 0.5, 1e-15);
}

TEST(Knn, CosineScaleInvariance) {
  EXPECT_NEAR(distance(Metric::cosine, std::vector<double>{5, 10}, std::vector<double>{1, 2}), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(distance(Metric::cosine, std::vector<double>{0, 0}, std::vector<double>{1, 2}), 1.0);
  EXPECT_DOUBLE_EQ(distance(Metric::cosine, std::vector<double>{1, 0}, std::vector<double>{0, 0}), 1.0);
  std::mt19937_64 rng(3);
  const auto data = noisy_xor_data(rng, 60, 4);
  const auto m = train_knn(data, 5, Metric::cosine);
  std::uniform_real_distribution<double> c(0.01, 100);
  for (const auto& v : noisy_xor_data(rng, 100, 4)) {
    auto s = v.values;
    const double k = c(rng);
    for (auto& x : s) x *= k;
    EXPECT_EQ(m.predict(v.values), m.predict(s));
  }
}

TEST(Knn, TiesBrokenByIndexAndTowardFolded) {
  // Equidistant neighbors: the lower index wins.
  const std::vector<FeatureVector> data{fv({1}, Label::normal), fv({-1}, Label::folded)};
  EXPECT_EQ(train_knn(data, 1, Metric::euclidean).predict(std::vector<double>{0}), Label::normal);
  // Even label split goes to folded.
  EXPECT_EQ(train_knn(data, 2, Metric::euclidean).predict(std::vector<double>{0}), Label::folded);
}

TEST(Knn, KCappedAtTrainingSize) {
  const std::vector<FeatureVector> data{fv({0}, Label::normal), fv({1}, Label::normal), fv({2}, Label::folded)};
  const auto m = train_knn(data, 10, Metric::euclidean);
  EXPECT_EQ(m.k, 3u);
  EXPECT_EQ(m.predict(std::vector<double>{2}), Label::normal);
  EXPECT_THROW(train_knn(std::vector<FeatureVector>{}, 1, Metric::euclidean), Error);
}

TEST(Knn, FineIsPerfectOnTrainingSet) {
  std::mt19937_64 rng(4);
  const auto data = noisy_xor_data(rng, 200, 3);
  const auto m = train_knn(data, 1, Metric::euclidean);
  for (const auto& v : data) EXPECT_EQ(m.predict(v.values), v.label);
}

TEST(Knn, MatchesExhaustiveOracle) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> grid(-3, 3);  // coarse grid forces distance ties
  std::vector<FeatureVector> data;
  for (int i = 0; i < 80; ++i) data.push_back(fv({double(grid(rng)), double(grid(rng))}, i % 3 ? Label::normal : Label::folded));
  std::vector<std::vector<double>> points;
  std::vector<Label> labels;
  for (const auto& v : data) {
    points.push_back(v.values);
    labels.push_back(v.label);
  }
  for (std::size_t k : {1u, 2u, 4u, 7u})
    for (auto metric : {Metric::euclidean, Metric::cosine}) {
      const auto m = train_knn(data, k, metric);
      for (int q = 0; q < 200; ++q) {
        const std::vector<double> x{double(grid(rng)), double(grid(rng))};
        ASSERT_EQ(m.predict(x), foldscan::testing::knn_oracle(points, labels, k, metric, x));
      }
    }
}

TEST(Tree, PureDataIsSingleLeaf) {
  const std::vector<FeatureVector> data{fv({0}, Label::normal), fv({3}, Label::normal)};
  const auto m = train_tree(data, 4);
  EXPECT_EQ(m.split_count(), 0u);
  EXPECT_EQ(m.nodes.size(), 1u);
  EXPECT_EQ(m.predict(std::vector<double>{100}), Label::normal);
}

TEST(Tree, OneDimensionalSplit) {
  const std::vector<FeatureVector> data{fv({0}, Label::normal), fv({1}, Label::normal),
                                        fv({10}, Label::folded), fv({11}, Label::folded)};
  const auto m = train_tree(data, 4);
  EXPECT_EQ(m.split_count(), 1u);
  EXPECT_GT(m.nodes[0].threshold, 1.0);
  EXPECT_LT(m.nodes[0].threshold, 10.0);
  EXPECT_DOUBLE_EQ(accuracy(m, data), 1.0);
}

TEST(Tree, SingleSplitCannotSolveXor) {
  const std::vector<FeatureVector> data{fv({0, 0}, Label::normal), fv({1, 1}, Label::normal),
                                        fv({0, 1}, Label::folded), fv({1, 0}, Label::folded)};
  const auto one = train_tree(data, 1);
  EXPECT_LE(accuracy(one, data), 0.75);
  EXPECT_DOUBLE_EQ(accuracy(train_tree(data, 3), data), 1.0);
}

TEST(Tree, LeafTieGoesToFolded) {
  const std::vector<FeatureVector> data{fv({0}, Label::normal), fv({0}, Label::folded)};
  const auto m = train_tree(data, 2);
  EXPECT_EQ(m.split_count(), 0u);
  EXPECT_EQ(m.predict(std::vector<double>{0}), Label::folded);
  EXPECT_DOUBLE_EQ(m.decision(std::vector<double>{0}), 0.0);
}

TEST(Tree, AccuracyNondecreasingInBudget) {
  std::mt19937_64 rng(6);
  for (int ds = 0; ds < 10; ++ds) {
    const auto data = noisy_xor_data(rng, 80, 3);
    double prev = 0;
    for (std::size_t s = 1; s <= 40; ++s) {
      const auto m = train_tree(data, s);
      EXPECT_LE(m.split_count(), s);
      const double acc = accuracy(m, data);
      EXPECT_GE(acc, prev) << "dataset " << ds << " splits " << s;
      prev = acc;
    }
  }
}

TEST(Tree, PreconditionsAndDimension) {
  EXPECT_THROW(train_tree(std::vector<FeatureVector>{}, 1), Error);
  const std::vector<FeatureVector> data{fv({0, 1}, Label::normal), fv({1, 0}, Label::folded)};
  EXPECT_THROW(train_tree(data, 0), std::invalid_argument);
  const auto m = train_tree(data, 1);
  EXPECT_EQ(m.dimension(), 2u);
  EXPECT_THROW(m.predict(std::vector<double>{1}), std::invalid_argument);
}
