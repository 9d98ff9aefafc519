#pragma once

#include <span>
#include <string>

namespace foldscan {

enum class KernelKind { quadratic, gaussian };

// quadratic: (offset + x.z / scale^2)^2
// gaussian:  exp(-|x - z|^2 / (2 scale^2))
struct KernelSpec {
  KernelKind kind = KernelKind::quadratic;
  double scale = 1.0;
  double offset = 1.0;

  void validate() const;  // throws std::invalid_argument unless scale > 0
};

std::string to_string(KernelKind k);
KernelKind parse_kernel_kind(const std::string& s);

// Throws std::invalid_argument on dimension mismatch.
double kernel(const KernelSpec& spec, std::span<const double> x, std::span<const double> z);

}  // namespace foldscan
