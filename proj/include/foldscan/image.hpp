#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace foldscan {

struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  long long area() const { return static_cast<long long>(w) * h; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

bool overlaps(const Rect& a, const Rect& b);

enum class Rotation { identity, rot90 };
enum class Flip { noflip, hflip };
enum class Luminance { orig, amp, sup };

// Luminance factors applied to the CIELAB L channel.
inline constexpr double kLuminanceAmplify = 1.25;
inline constexpr double kLuminanceSuppress = 0.75;

double luminance_factor(Luminance l);

// One of the 12 augmentation variants. Textual form is
// "<rotation>+<flip>+<luminance>", e.g. "rot90+hflip+L-amp".
struct AugmentationTag {
  Rotation rotation = Rotation::identity;
  Flip flip = Flip::noflip;
  Luminance luminance = Luminance::orig;

  bool is_identity() const {
    return rotation == Rotation::identity && flip == Flip::noflip && luminance == Luminance::orig;
  }
  std::string str() const;
  static std::optional<AugmentationTag> parse(std::string_view text);

  friend bool operator==(const AugmentationTag&, const AugmentationTag&) = default;
};

inline const std::string kIdentityTag = AugmentationTag{}.str();

// Interleaved 8-bit RGB raster with provenance. Pixel (x, y) channel c lives
// at pixels[(y * width + x) * 3 + c].
class Patch {
 public:
  Patch() = default;
  // Zero-filled raster; throws std::invalid_argument if width or height < 1.
  Patch(int width, int height);
  Patch(int width, int height, std::vector<std::uint8_t> pixels);

  static Patch filled(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return pixels_.empty(); }

  std::uint8_t* data() { return pixels_.data(); }
  const std::uint8_t* data() const { return pixels_.data(); }
  const std::vector<std::uint8_t>& pixels() const { return pixels_; }
  std::size_t sample_count() const { return pixels_.size(); }

  std::uint8_t& at(int x, int y, int c) {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * 3 + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * 3 + c];
  }

  std::string source_id;
  Rect rect;  // region of the source image this patch was taken from
  AugmentationTag augmentation;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

// Decodes PNG/TIFF (or anything imgcodecs reads) as 8-bit RGB. Grayscale is
// replicated to three channels and alpha is dropped. Throws Error for
// unreadable files, bit depths other than 8 and empty images.
Patch load_image(const std::filesystem::path& path);

// Writes an 8-bit RGB image; format follows the file extension.
void save_image(const Patch& image, const std::filesystem::path& path);

// Bilinear resampling with pixel-center alignment. Provenance is copied.
Patch resize(const Patch& p, int width, int height);

// Clockwise quarter turn.
Patch rotate90(const Patch& p);
// Inverse of rotate90.
Patch rotate90_ccw(const Patch& p);
// Mirror about the vertical axis.
Patch hflip(const Patch& p);

// Copy of the sub-image at r (in p's pixel coordinates). The result's rect is
// expressed in source coordinates. Throws std::out_of_range if r leaves p.
Patch crop(const Patch& p, const Rect& r);

}  // namespace foldscan
