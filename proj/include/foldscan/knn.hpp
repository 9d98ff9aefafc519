#pragma once

#include <span>
#include <string>
#include <vector>

#include "foldscan/features.hpp"

namespace foldscan {

enum class Metric { euclidean, cosine };

std::string to_string(Metric m);
Metric parse_metric(const std::string& s);

// cosine distance is 1 - x.t / (|x||t|), and 1 when either norm is zero.
double distance(Metric m, std::span<const double> x, std::span<const double> t);

// Raw (unstandardized) training vectors.
struct KnnModel {
  std::size_t k = 1;
  Metric metric = Metric::euclidean;
  std::vector<std::vector<double>> points;
  std::vector<Label> labels;

  std::size_t dimension() const { return points.empty() ? 0 : points.front().size(); }
  // Indices of the k nearest points, nearest first; ties go to lower index.
  std::vector<std::size_t> neighbors(std::span<const double> x) const;
  // Folded fraction among the neighbors minus 1/2.
  double decision(std::span<const double> x) const;
  // Majority label; an even split goes to folded.
  Label predict(std::span<const double> x) const;
};

// k is capped at the number of training vectors. Throws Error on empty data.
KnnModel train_knn(std::span<const FeatureVector> data, std::size_t k, Metric metric);

}  // namespace foldscan
