#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "foldscan/features.hpp"
#include "foldscan/image.hpp"
#include "foldscan/knn.hpp"

namespace foldscan::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::filesystem::path data_dir();

// Mean colors of the synthetic tissue textures.
inline constexpr std::uint8_t kNormalRgb[3] = {236, 188, 214};
inline constexpr std::uint8_t kFoldedRgb[3] = {112, 42, 118};

// Tissue-like texture: base color plus uniform noise in [-amp, amp].
Patch textured_patch(int width, int height, const std::uint8_t (&rgb)[3], int amp,
                     std::mt19937_64& rng);
void paint_texture(Patch& image, const Rect& r, const std::uint8_t (&rgb)[3], int amp,
                   std::mt19937_64& rng);

// Two Gaussian classes whose centers lie `separation` sigmas apart along the
// main diagonal. Each source
// carries all 12 augmentation tags as small jitters around its center.
std::vector<FeatureVector> two_cluster_features(int sources_per_class, int dims, double separation,
                                                std::uint64_t seed, bool with_variants = true);

// Writes <dir>/images/*.png plus <dir>/manifest.json with the given counts.
std::filesystem::path write_patch_manifest(const std::filesystem::path& dir, int folded, int normal,
                                           int size, std::uint64_t seed);

// Sidecar for the mean-pool toy model (features are mean RGB in [0, 1]).
void write_meanpool_backend(const std::filesystem::path& dir);

// 1-NN classifier in mean-color space with one prototype per class.
KnnModel color_prototype_model();

}  // namespace foldscan::testing
