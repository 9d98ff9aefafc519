#include "foldscan/color.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace foldscan {

namespace {

// sRGB primaries, D65 white (IEC 61966-2-1).
constexpr double kRgbToXyz[3][3] = {
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
};

struct Matrix3 {
  double m[3][3];
};

Matrix3 invert(const double (&a)[3][3]) {
  const double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                     a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                     a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  Matrix3 r{};
  r.m[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) / det;
  r.m[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) / det;
  r.m[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) / det;
  r.m[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) / det;
  r.m[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) / det;
  r.m[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) / det;
  r.m[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) / det;
  r.m[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) / det;
  r.m[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) / det;
  return r;
}

const Matrix3& xyz_to_rgb() {
  static const Matrix3 inv = invert(kRgbToXyz);
  return inv;
}

// White point taken from the matrix itself so that (255,255,255) maps to
// a = b = 0 up to rounding.
constexpr double kWhite[3] = {
    kRgbToXyz[0][0] + kRgbToXyz[0][1] + kRgbToXyz[0][2],
    kRgbToXyz[1][0] + kRgbToXyz[1][1] + kRgbToXyz[1][2],
    kRgbToXyz[2][0] + kRgbToXyz[2][1] + kRgbToXyz[2][2],
};

constexpr double kDelta = 6.0 / 29.0;

double decode_gamma(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double encode_gamma(double v) {
  return v <= 0.0031308 ? 12.92 * v : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

const std::array<double, 256>& linear_lut() {
  static const std::array<double, 256> lut = [] {
    std::array<double, 256> t{};
    for (int i = 0; i < 256; ++i) t[i] = decode_gamma(i / 255.0);
    return t;
  }();
  return lut;
}

double lab_f(double t) {
  return t > kDelta * kDelta * kDelta ? std::cbrt(t) : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

double lab_finv(double t) {
  return t > kDelta ? t * t * t : 3.0 * kDelta * kDelta * (t - 4.0 / 29.0);
}

std::uint8_t to_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v * 255.0), 0L, 255L));
}

}  // namespace

Lab srgb_to_lab(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
  const auto& lut = linear_lut();
  const double rgb[3] = {lut[r8], lut[g8], lut[b8]};
  double xyz[3];
  for (int i = 0; i < 3; ++i)
    xyz[i] = kRgbToXyz[i][0] * rgb[0] + kRgbToXyz[i][1] * rgb[1] + kRgbToXyz[i][2] * rgb[2];
  const double fx = lab_f(xyz[0] / kWhite[0]);
  const double fy = lab_f(xyz[1] / kWhite[1]);
  const double fz = lab_f(xyz[2] / kWhite[2]);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

std::array<std::uint8_t, 3> lab_to_srgb(const Lab& lab) {
  const double fy = (lab.L + 16.0) / 116.0;
  const double fx = fy + lab.a / 500.0;
  const double fz = fy - lab.b / 200.0;
  const double xyz[3] = {kWhite[0] * lab_finv(fx), kWhite[1] * lab_finv(fy),
                         kWhite[2] * lab_finv(fz)};
  const auto& m = xyz_to_rgb().m;
  std::array<std::uint8_t, 3> out{};
  for (int i = 0; i < 3; ++i) {
    const double lin = m[i][0] * xyz[0] + m[i][1] * xyz[1] + m[i][2] * xyz[2];
    out[i] = to_u8(encode_gamma(std::clamp(lin, 0.0, 1.0)));
  }
  return out;
}

LabPatch rgb_to_lab(const Patch& p) {
  LabPatch out{p.width(), p.height(), std::vector<double>(p.sample_count())};
  const std::uint8_t* src = p.data();
  for (std::size_t i = 0; i < p.sample_count(); i += 3) {
    const Lab lab = srgb_to_lab(src[i], src[i + 1], src[i + 2]);
    out.pixels[i] = lab.L;
    out.pixels[i + 1] = lab.a;
    out.pixels[i + 2] = lab.b;
  }
  return out;
}

Patch lab_to_rgb(const LabPatch& p) {
  Patch out(p.width, p.height);
  std::uint8_t* dst = out.data();
  for (std::size_t i = 0; i < p.pixels.size(); i += 3) {
    const auto rgb = lab_to_srgb({p.pixels[i], p.pixels[i + 1], p.pixels[i + 2]});
    dst[i] = rgb[0];
    dst[i + 1] = rgb[1];
    dst[i + 2] = rgb[2];
  }
  return out;
}

Patch adjust_luminance(const Patch& p, double factor) {
  if (!(factor > 0.0)) throw std::invalid_argument("luminance factor must be positive");
  Patch out(p.width(), p.height());
  const std::uint8_t* src = p.data();
  std::uint8_t* dst = out.data();
  for (std::size_t i = 0; i < p.sample_count(); i += 3) {
    Lab lab = srgb_to_lab(src[i], src[i + 1], src[i + 2]);
    lab.L = std::clamp(lab.L * factor, 0.0, 100.0);
    const auto rgb = lab_to_srgb(lab);
    dst[i] = rgb[0];
    dst[i + 1] = rgb[1];
    dst[i + 2] = rgb[2];
  }
  out.source_id = p.source_id;
  out.rect = p.rect;
  out.augmentation = p.augmentation;
  return out;
}

double color_fold_baseline(const Patch& p, double threshold) {
  if (!(threshold >= -1.0 && threshold <= 1.0))
    throw std::invalid_argument("baseline threshold must lie in [-1, 1]");
  std::size_t hits = 0;
  const std::uint8_t* px = p.data();
  const std::size_t n = p.sample_count() / 3;
  for (std::size_t i = 0; i < n; ++i) {
    const int r = px[3 * i], g = px[3 * i + 1], b = px[3 * i + 2];
    const int sum = r + g + b;
    const double intensity = sum / (3.0 * 255.0);
    const double saturation = sum == 0 ? 0.0 : 1.0 - 3.0 * std::min({r, g, b}) / sum;
    if (saturation - intensity > threshold) ++hits;
  }
  return n == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(n);
}

}  // namespace foldscan
