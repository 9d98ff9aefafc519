#include "foldscan/standardize.hpp"

#include <cmath>
#include <stdexcept>

namespace foldscan {

Standardization Standardization::fit(std::span<const FeatureVector> data) {
  const std::size_t d = uniform_dimension(data);
  Standardization s;
  s.mean.assign(d, 0.0);
  s.stdev.assign(d, 0.0);
  for (const auto& v : data)
    for (std::size_t k = 0; k < d; ++k) s.mean[k] += v.values[k];
  for (auto& m : s.mean) m /= static_cast<double>(data.size());
  for (const auto& v : data)
    for (std::size_t k = 0; k < d; ++k) {
      const double dev = v.values[k] - s.mean[k];
      s.stdev[k] += dev * dev;
    }
  for (auto& sd : s.stdev) {
    sd = std::sqrt(sd / static_cast<double>(data.size()));
    if (!(sd > 0.0)) sd = 1.0;
  }
  return s;
}

std::vector<double> Standardization::apply(std::span<const double> x) const {
  if (x.size() != mean.size())
    throw std::invalid_argument("expected dimension " + std::to_string(mean.size()) + ", got " +
                                std::to_string(x.size()));
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = (x[k] - mean[k]) / stdev[k];
  return out;
}

}  // namespace foldscan
