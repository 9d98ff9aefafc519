#include "foldscan/patch_pipeline.hpp"

#include <stdexcept>

#include "foldscan/color.hpp"

namespace foldscan {

namespace {

Patch apply_geometry(const Patch& p, Rotation r, Flip f) {
  Patch out = r == Rotation::rot90 ? rotate90(p) : p;
  if (f == Flip::hflip) out = hflip(out);
  return out;
}

}  // namespace

const std::vector<AugmentationTag>& all_augmentation_tags() {
  static const std::vector<AugmentationTag> tags = [] {
    std::vector<AugmentationTag> t;
    for (auto r : {Rotation::identity, Rotation::rot90})
      for (auto f : {Flip::noflip, Flip::hflip})
        for (auto l : {Luminance::orig, Luminance::amp, Luminance::sup}) t.push_back({r, f, l});
    return t;
  }();
  return tags;
}

Patch apply_augmentation(const Patch& p, const AugmentationTag& tag) {
  Patch out = tag.luminance == Luminance::orig ? p
                                               : adjust_luminance(p, luminance_factor(tag.luminance));
  out = apply_geometry(out, tag.rotation, tag.flip);
  out.augmentation = tag;
  return out;
}

std::vector<Patch> augment(const Patch& p) {
  if (!p.augmentation.is_identity())
    throw std::invalid_argument("patch is already augmented (" + p.augmentation.str() + ")");

  // Color changes commute with the pixel permutations, so each luminance
  // level is computed once.
  const Patch amp = adjust_luminance(p, kLuminanceAmplify);
  const Patch sup = adjust_luminance(p, kLuminanceSuppress);

  std::vector<Patch> out;
  out.reserve(12);
  for (const auto& tag : all_augmentation_tags()) {
    const Patch& base = tag.luminance == Luminance::orig  ? p
                        : tag.luminance == Luminance::amp ? amp
                                                          : sup;
    Patch v = apply_geometry(base, tag.rotation, tag.flip);
    v.augmentation = tag;
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<Rect> tile_rects(int image_width, int image_height, int window, int origin) {
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  std::vector<Rect> rects;
  const long long full = static_cast<long long>(window) * window;
  for (int y = origin; y < image_height; y += window) {
    const int h = std::min(window, image_height - y);
    for (int x = origin; x < image_width; x += window) {
      const int w = std::min(window, image_width - x);
      const Rect r{x, y, w, h};
      if (2 * r.area() >= full) rects.push_back(r);
    }
  }
  return rects;
}

std::vector<Tile> tile(const Patch& image, int window) {
  std::vector<Tile> tiles;
  for (const Rect& r : tile_rects(image.width(), image.height(), window))
    tiles.push_back({r, crop(image, r)});
  return tiles;
}

}  // namespace foldscan
