#include "foldscan/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "foldscan/error.hpp"

namespace foldscan {

namespace {

constexpr std::array<const char*, 2> kRotationNames{"identity", "rot90"};
constexpr std::array<const char*, 2> kFlipNames{"noflip", "hflip"};
constexpr std::array<const char*, 3> kLuminanceNames{"L-orig", "L-amp", "L-sup"};

template <std::size_t N>
int index_of(const std::array<const char*, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i)
    if (s == names[i]) return static_cast<int>(i);
  return -1;
}

Patch with_provenance(Patch out, const Patch& from) {
  out.source_id = from.source_id;
  out.rect = from.rect;
  out.augmentation = from.augmentation;
  return out;
}

}  // namespace

bool overlaps(const Rect& a, const Rect& b) {
  return a.x < b.x + b.w && b.x < a.x + a.w && a.y < b.y + b.h && b.y < a.y + a.h;
}

double luminance_factor(Luminance l) {
  switch (l) {
    case Luminance::orig: return 1.0;
    case Luminance::amp: return kLuminanceAmplify;
    case Luminance::sup: return kLuminanceSuppress;
  }
  return 1.0;
}

std::string AugmentationTag::str() const {
  std::string s = kRotationNames[static_cast<int>(rotation)];
  s += '+';
  s += kFlipNames[static_cast<int>(flip)];
  s += '+';
  s += kLuminanceNames[static_cast<int>(luminance)];
  return s;
}

std::optional<AugmentationTag> AugmentationTag::parse(std::string_view text) {
  const auto p1 = text.find('+');
  if (p1 == std::string_view::npos) return std::nullopt;
  const auto p2 = text.find('+', p1 + 1);
  if (p2 == std::string_view::npos) return std::nullopt;
  const int r = index_of(kRotationNames, text.substr(0, p1));
  const int f = index_of(kFlipNames, text.substr(p1 + 1, p2 - p1 - 1));
  const int l = index_of(kLuminanceNames, text.substr(p2 + 1));
  if (r < 0 || f < 0 || l < 0) return std::nullopt;
  return AugmentationTag{static_cast<Rotation>(r), static_cast<Flip>(f), static_cast<Luminance>(l)};
}

Patch::Patch(int width, int height)
    : Patch(width, height,
            std::vector<std::uint8_t>(width > 0 && height > 0
                                          ? static_cast<std::size_t>(width) * height * 3
                                          : 0)) {}

Patch::Patch(int width, int height, std::vector<std::uint8_t> pixels)
    : rect{0, 0, width, height}, width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width < 1 || height < 1) throw std::invalid_argument("patch dimensions must be >= 1");
  if (pixels_.size() != static_cast<std::size_t>(width) * height * 3)
    throw std::invalid_argument("pixel buffer does not match patch dimensions");
}

Patch Patch::filled(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  Patch p(width, height);
  for (std::size_t i = 0; i < p.pixels_.size(); i += 3) {
    p.pixels_[i] = r;
    p.pixels_[i + 1] = g;
    p.pixels_[i + 2] = b;
  }
  return p;
}

Patch load_image(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec))
    throw Error("cannot read image '" + path.string() + "': no such file");
  cv::Mat raw = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (raw.empty()) throw Error("cannot decode image '" + path.string() + "'");
  if (raw.depth() != CV_8U)
    throw Error("unsupported bit depth in '" + path.string() + "' (8-bit required)");
  if (raw.cols < 1 || raw.rows < 1) throw Error("zero-sized image '" + path.string() + "'");

  cv::Mat rgb;
  switch (raw.channels()) {
    case 1: cv::cvtColor(raw, rgb, cv::COLOR_GRAY2RGB); break;
    case 3: cv::cvtColor(raw, rgb, cv::COLOR_BGR2RGB); break;
    case 4: cv::cvtColor(raw, rgb, cv::COLOR_BGRA2RGB); break;
    default:
      throw Error("unsupported channel count " + std::to_string(raw.channels()) + " in '" +
                  path.string() + "'");
  }
  Patch p(rgb.cols, rgb.rows);
  for (int y = 0; y < rgb.rows; ++y)
    std::copy_n(rgb.ptr<std::uint8_t>(y), static_cast<std::size_t>(rgb.cols) * 3,
                p.data() + static_cast<std::size_t>(y) * rgb.cols * 3);
  p.source_id = path.stem().string();
  return p;
}

void save_image(const Patch& image, const std::filesystem::path& path) {
  cv::Mat rgb(image.height(), image.width(), CV_8UC3, const_cast<std::uint8_t*>(image.data()));
  cv::Mat bgr;
  cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), bgr);
  } catch (const cv::Exception& e) {
    throw Error("cannot write image '" + path.string() + "': " + e.what());
  }
  if (!ok) throw Error("cannot write image '" + path.string() + "'");
}

Patch resize(const Patch& p, int width, int height) {
  if (width < 1 || height < 1) throw std::invalid_argument("resize target must be >= 1");
  if (width == p.width() && height == p.height()) return p;

  const double sx = static_cast<double>(p.width()) / width;
  const double sy = static_cast<double>(p.height()) / height;

  struct Tap {
    int i0, i1;
    double f;
  };
  auto taps = [](int n_out, int n_in, double scale) {
    std::vector<Tap> t(n_out);
    for (int o = 0; o < n_out; ++o) {
      double src = (o + 0.5) * scale - 0.5;
      src = std::clamp(src, 0.0, static_cast<double>(n_in - 1));
      const int i0 = static_cast<int>(std::floor(src));
      const int i1 = std::min(i0 + 1, n_in - 1);
      t[o] = {i0, i1, src - i0};
    }
    return t;
  };
  const auto tx = taps(width, p.width(), sx);
  const auto ty = taps(height, p.height(), sy);

  Patch out(width, height);
  for (int y = 0; y < height; ++y) {
    const auto& vy = ty[y];
    for (int x = 0; x < width; ++x) {
      const auto& vx = tx[x];
      for (int c = 0; c < 3; ++c) {
        const double top = p.at(vx.i0, vy.i0, c) * (1.0 - vx.f) + p.at(vx.i1, vy.i0, c) * vx.f;
        const double bot = p.at(vx.i0, vy.i1, c) * (1.0 - vx.f) + p.at(vx.i1, vy.i1, c) * vx.f;
        const double v = top * (1.0 - vy.f) + bot * vy.f;
        out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return with_provenance(std::move(out), p);
}

Patch rotate90(const Patch& p) {
  const int w = p.height(), h = p.width();
  Patch out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = p.at(y, p.height() - 1 - x, c);
  return with_provenance(std::move(out), p);
}

Patch rotate90_ccw(const Patch& p) {
  const int w = p.height(), h = p.width();
  Patch out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = p.at(p.width() - 1 - y, x, c);
  return with_provenance(std::move(out), p);
}

Patch hflip(const Patch& p) {
  Patch out(p.width(), p.height());
  for (int y = 0; y < p.height(); ++y)
    for (int x = 0; x < p.width(); ++x)
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = p.at(p.width() - 1 - x, y, c);
  return with_provenance(std::move(out), p);
}

Patch crop(const Patch& p, const Rect& r) {
  if (r.w < 1 || r.h < 1 || r.x < 0 || r.y < 0 || r.x + r.w > p.width() || r.y + r.h > p.height())
    throw std::out_of_range("crop rectangle outside image");
  Patch out(r.w, r.h);
  for (int y = 0; y < r.h; ++y)
    std::copy_n(p.data() + (static_cast<std::size_t>(r.y + y) * p.width() + r.x) * 3,
                static_cast<std::size_t>(r.w) * 3,
                out.data() + static_cast<std::size_t>(y) * r.w * 3);
  out.source_id = p.source_id;
  out.augmentation = p.augmentation;
  out.rect = Rect{p.rect.x + r.x, p.rect.y + r.y, r.w, r.h};
  return out;
}

}  // namespace foldscan
