#include "foldscan/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace foldscan {

void KernelSpec::validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw std::invalid_argument("kernel scale must be positive");
  if (!std::isfinite(offset)) throw std::invalid_argument("kernel offset must be finite");
}

std::string to_string(KernelKind k) { return k == KernelKind::quadratic ? "quadratic" : "gaussian"; }

KernelKind parse_kernel_kind(const std::string& s) {
  if (s == "quadratic") return KernelKind::quadratic;
  if (s == "gaussian") return KernelKind::gaussian;
  throw std::invalid_argument("unknown kernel kind '" + s + "'");
}

double kernel(const KernelSpec& spec, std::span<const double> x, std::span<const double> z) {
  if (x.size() != z.size())
    throw std::invalid_argument("kernel arguments differ in dimension (" + std::to_string(x.size()) +
                                " vs " + std::to_string(z.size()) + ")");
  const double s2 = spec.scale * spec.scale;
  if (spec.kind == KernelKind::quadratic) {
    double dot = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) dot += x[k] * z[k];
    const double t = spec.offset + dot / s2;
    return t * t;
  }
  double d2 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - z[k];
    d2 += d * d;
  }
  return std::exp(-d2 / (2.0 * s2));
}

}  // namespace foldscan
