#pragma once

#include <vector>

#include "foldscan/image.hpp"

namespace foldscan {

// Produces the 12 variants {identity, rot90} x {noflip, hflip} x
// {L x1, L x1.25, L x0.75}, rotation-major and luminance-minor. The first
// element is a verbatim copy of p. Throws std::invalid_argument if p already
// carries a non-identity tag.
std::vector<Patch> augment(const Patch& p);

// Applies the geometric and luminance parts of a single tag.
Patch apply_augmentation(const Patch& p, const AugmentationTag& tag);

// All 12 tags in augment() order.
const std::vector<AugmentationTag>& all_augmentation_tags();

// Non-overlapping window x window grid anchored at (0, 0). Edge cells clipped
// by the image border are kept when their area is at least half a window.
// A nonzero origin shifts the grid to start at (origin, origin).
std::vector<Rect> tile_rects(int image_width, int image_height, int window, int origin = 0);

struct Tile {
  Rect rect;
  Patch patch;
};

std::vector<Tile> tile(const Patch& image, int window);

}  // namespace foldscan
