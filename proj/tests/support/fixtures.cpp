#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "foldscan/patch_pipeline.hpp"

namespace foldscan::testing {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
  static std::mt19937_64 rng{std::random_device{}()};
  path_ = fs::temp_directory_path() / ("foldscan_" + tag + "_" + std::to_string(rng()));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

fs::path data_dir() { return FOLDSCAN_TEST_DATA; }

void paint_texture(Patch& image, const Rect& r, const std::uint8_t (&rgb)[3], int amp,
                   std::mt19937_64& rng) {
  std::uniform_int_distribution<int> noise(-amp, amp);
  for (int y = r.y; y < r.y + r.h; ++y)
    for (int x = r.x; x < r.x + r.w; ++x)
      for (int c = 0; c < 3; ++c)
        image.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(rgb[c] + noise(rng), 0, 255));
}

Patch textured_patch(int width, int height, const std::uint8_t (&rgb)[3], int amp,
                     std::mt19937_64& rng) {
  Patch p(width, height);
  paint_texture(p, {0, 0, width, height}, rgb, amp, rng);
  return p;
}

std::vector<FeatureVector> two_cluster_features(int sources_per_class, int dims, double separation,
                                                std::uint64_t seed, bool with_variants) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<FeatureVector> out;
  for (int cls = 0; cls < 2; ++cls) {
    const double offset = (cls == 0 ? 0.5 : -0.5) * separation;
    const Label label = cls == 0 ? Label::folded : Label::normal;
    for (int s = 0; s < sources_per_class; ++s) {
      std::vector<double> center(static_cast<std::size_t>(dims));
      for (auto& c : center) c = unit(rng);
      // Shift along the main diagonal so no single feature carries the split.
      for (auto& c : center) c += offset / std::sqrt(static_cast<double>(dims));
      const std::string id = (cls == 0 ? "fold" : "norm") + std::to_string(1000 + s);
      const auto& tags = all_augmentation_tags();
      const std::size_t variants = with_variants ? tags.size() : 1;
      for (std::size_t t = 0; t < variants; ++t) {
        FeatureVector v;
        v.values = center;
        if (t > 0)
          for (auto& x : v.values) x += 0.05 * unit(rng);
        v.label = label;
        v.source_id = id;
        v.augmentation = tags[t].str();
        out.push_back(std::move(v));
      }
    }
  }
  return out;
}

fs::path write_patch_manifest(const fs::path& dir, int folded, int normal, int size,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  fs::create_directories(dir / "images");
  nlohmann::json entries = nlohmann::json::array();
  auto emit = [&](const char* prefix, int count, const std::uint8_t (&rgb)[3], const char* label) {
    for (int i = 0; i < count; ++i) {
      const std::string id = std::string(prefix) + std::to_string(1000 + i);
      save_image(textured_patch(size, size, rgb, 18, rng), dir / "images" / (id + ".png"));
      entries.push_back({{"path", "images/" + id + ".png"}, {"label", label}, {"source_id", id}});
    }
  };
  emit("fold", folded, kFoldedRgb, "folded");
  emit("norm", normal, kNormalRgb, "normal");
  const auto manifest = dir / "manifest.json";
  std::ofstream(manifest) << nlohmann::json{{"entries", entries}, {"magnification", "synthetic"}}.dump(1);
  return manifest;
}

void write_meanpool_backend(const fs::path& dir) {
  fs::create_directories(dir);
  fs::copy_file(data_dir() / "toy_meanpool.onnx", dir / "toy_meanpool.onnx",
                fs::copy_options::overwrite_existing);
  std::ofstream(dir / "toy_meanpool.meta.json")
      << R"({"embedding_output": "embedding", "mean": 0, "scale": 255, "channel_order": "rgb"})";
}

KnnModel color_prototype_model() {
  KnnModel m;
  m.k = 1;
  m.metric = Metric::euclidean;
  m.points = {{kNormalRgb[0] / 255.0, kNormalRgb[1] / 255.0, kNormalRgb[2] / 255.0},
              {kFoldedRgb[0] / 255.0, kFoldedRgb[1] / 255.0, kFoldedRgb[2] / 255.0}};
  m.labels = {Label::normal, Label::folded};
  return m;
}

}  // namespace foldscan::testing
