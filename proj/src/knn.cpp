#include "foldscan/knn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "foldscan/error.hpp"

namespace foldscan {

std::string to_string(Metric m) { return m == Metric::euclidean ? "euclidean" : "cosine"; }

Metric parse_metric(const std::string& s) {
  if (s == "euclidean") return Metric::euclidean;
  if (s == "cosine") return Metric::cosine;
  throw std::invalid_argument("unknown metric '" + s + "'");
}

double distance(Metric m, std::span<const double> x, std::span<const double> t) {
  if (x.size() != t.size()) throw std::invalid_argument("distance arguments differ in dimension");
  if (m == Metric::euclidean) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double d = x[k] - t[k];
      d2 += d * d;
    }
    return std::sqrt(d2);
  }
  double dot = 0.0, nx = 0.0, nt = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    dot += x[k] * t[k];
    nx += x[k] * x[k];
    nt += t[k] * t[k];
  }
  if (nx == 0.0 || nt == 0.0) return 1.0;
  return 1.0 - dot / (std::sqrt(nx) * std::sqrt(nt));
}

std::vector<std::size_t> KnnModel::neighbors(std::span<const double> x) const {
  if (points.empty()) throw std::logic_error("kNN model has no training points");
  if (x.size() != dimension())
    throw std::invalid_argument("query dimension " + std::to_string(x.size()) + " != model " +
                                std::to_string(dimension()));
  std::vector<double> d(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) d[i] = distance(metric, x, points[i]);
  std::vector<std::size_t> idx(points.size());
  std::iota(idx.begin(), idx.end(), 0);
  const std::size_t kk = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(kk), idx.end(),
                    [&](std::size_t a, std::size_t b) { return d[a] < d[b] || (d[a] == d[b] && a < b); });
  idx.resize(kk);
  return idx;
}

double KnnModel::decision(std::span<const double> x) const {
  const auto nn = neighbors(x);
  std::size_t folded = 0;
  for (auto i : nn)
    if (labels[i] == Label::folded) ++folded;
  return static_cast<double>(folded) / static_cast<double>(nn.size()) - 0.5;
}

Label KnnModel::predict(std::span<const double> x) const {
  return decision(x) >= 0.0 ? Label::folded : Label::normal;
}

KnnModel train_knn(std::span<const FeatureVector> data, std::size_t k, Metric metric) {
  if (data.empty()) throw Error("kNN needs at least one training vector");
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  uniform_dimension(data);
  KnnModel m;
  m.k = std::min(k, data.size());
  m.metric = metric;
  for (const auto& v : data) {
    if (v.label != Label::folded && v.label != Label::normal)
      throw Error("training data contains an unlabeled vector (source '" + v.source_id + "')");
    m.points.push_back(v.values);
    m.labels.push_back(v.label);
  }
  return m;
}

}  // namespace foldscan
