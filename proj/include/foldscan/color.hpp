#pragma once

#include <array>
#include <vector>

#include "foldscan/image.hpp"

namespace foldscan {

// CIELAB raster (D65 white, sRGB transfer curve). Pixel layout matches Patch.
struct LabPatch {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;  // L, a, b interleaved
};

struct Lab {
  double L = 0;
  double a = 0;
  double b = 0;
};

Lab srgb_to_lab(std::uint8_t r, std::uint8_t g, std::uint8_t b);
// Components are rounded and clamped to [0, 255].
std::array<std::uint8_t, 3> lab_to_srgb(const Lab& lab);

LabPatch rgb_to_lab(const Patch& p);
Patch lab_to_rgb(const LabPatch& p);

// Scales L by factor (clamped to [0, 100]) and converts back to RGB.
// Throws std::invalid_argument if factor <= 0.
Patch adjust_luminance(const Patch& p, double factor);

// Fraction of pixels whose HSI saturation minus intensity exceeds threshold.
// I = (R+G+B)/3 and S = 1 - min(R,G,B)/I on [0,1] samples, with S = 0 at I = 0.
double color_fold_baseline(const Patch& p, double threshold);

}  // namespace foldscan
