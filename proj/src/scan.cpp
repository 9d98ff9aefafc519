#include "foldscan/scan.hpp"

#include <algorithm>
#include <chrono>

#include "foldscan/color.hpp"
#include "foldscan/error.hpp"
#include "foldscan/parallel.hpp"
#include "foldscan/patch_pipeline.hpp"

namespace foldscan {

using nlohmann::json;

namespace {

std::string rect_text(const Rect& r) {
  return "(" + std::to_string(r.x) + ", " + std::to_string(r.y) + ", " + std::to_string(r.w) + ", " +
         std::to_string(r.h) + ")";
}

template <typename Classify>
std::vector<WindowVerdict> classify_windows(const Patch& image, const std::vector<Rect>& rects,
                                            unsigned jobs, Classify&& classify) {
  std::vector<WindowVerdict> out(rects.size());
  parallel_for(rects.size(), jobs, [&](std::size_t i) {
    out[i].rect = rects[i];
    out[i].score = classify(crop(image, rects[i]));
  });
  return out;
}

template <typename Classify>
SlideReport run_scan(const Patch& image, int window, const ScanOptions& options,
                     double cutoff, Classify&& classify) {
  const auto start = std::chrono::steady_clock::now();
  SlideReport report;
  report.slide_id = image.source_id;
  report.window = window;
  auto label_all = [&](std::vector<WindowVerdict>& ws) {
    for (auto& w : ws) w.label = classify.is_folded(w.score, cutoff) ? Label::folded : Label::normal;
  };
  report.windows = classify_windows(image, tile_rects(image.width(), image.height(), window),
                                    options.jobs, classify);
  label_all(report.windows);
  if (options.offset_pass && window > 1) {
    report.offset_windows =
        classify_windows(image, tile_rects(image.width(), image.height(), window, window / 2),
                         options.jobs, classify);
    label_all(report.offset_windows);
  }
  report.flagged = report.folded_count() > 0;
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

struct LearnedClassifier {
  const Model& model;
  const Embedder& backend;

  double operator()(const Patch& window) const {
    FeatureVector v;
    try {
      v = extract(backend, window);
    } catch (const std::exception& e) {
      throw Error("embedding failed for window " + rect_text(window.rect) + ": " + e.what());
    }
    return decision(model, v.values);
  }
  static bool is_folded(double score, double) { return score >= 0.0; }
};

struct BaselineClassifier {
  double threshold;

  double operator()(const Patch& window) const { return color_fold_baseline(window, threshold); }
  static bool is_folded(double fraction, double cutoff) { return fraction > cutoff; }
};

void draw_frame(Patch& img, const Rect& r, std::uint8_t red, std::uint8_t green, std::uint8_t blue) {
  const int t = kOverlayBorder;
  for (int y = r.y; y < r.y + r.h; ++y) {
    const bool edge_row = y < r.y + t || y >= r.y + r.h - t;
    for (int x = r.x; x < r.x + r.w; ++x) {
      if (!edge_row && x >= r.x + t && x < r.x + r.w - t) continue;
      img.at(x, y, 0) = red;
      img.at(x, y, 1) = green;
      img.at(x, y, 2) = blue;
    }
  }
}

json windows_json(const std::vector<WindowVerdict>& ws) {
  json arr = json::array();
  for (const auto& w : ws)
    arr.push_back({{"x", w.rect.x},
                   {"y", w.rect.y},
                   {"w", w.rect.w},
                   {"h", w.rect.h},
                   {"label", to_string(w.label)},
                   {"score", w.score}});
  return arr;
}

}  // namespace

std::size_t SlideReport::folded_count() const {
  auto folded = [](const WindowVerdict& w) { return w.label == Label::folded; };
  return static_cast<std::size_t>(std::count_if(windows.begin(), windows.end(), folded) +
                                  std::count_if(offset_windows.begin(), offset_windows.end(), folded));
}

SlideReport scan_slide(const Patch& image, const Model& model, const Embedder& backend, int window,
                       const ScanOptions& options) {
  if (model_dimension(model) != backend.dimension())
    throw Error("model expects " + std::to_string(model_dimension(model)) +
                "-dimensional features but the backend produces " +
                std::to_string(backend.dimension()));
  return run_scan(image, window, options, 0.0, LearnedClassifier{model, backend});
}

SlideReport baseline_scan(const Patch& image, int window, double threshold, double fraction_cutoff,
                          const ScanOptions& options) {
  if (!(fraction_cutoff >= 0.0 && fraction_cutoff <= 1.0))
    throw std::invalid_argument("fraction cutoff must lie in [0, 1]");
  if (!(threshold >= -1.0 && threshold <= 1.0))
    throw std::invalid_argument("baseline threshold must lie in [-1, 1]");
  return run_scan(image, window, options, fraction_cutoff, BaselineClassifier{threshold});
}

Patch render_overlay(const Patch& image, const SlideReport& report) {
  Patch out = image;
  auto draw_all = [&](const std::vector<WindowVerdict>& ws, Label which) {
    for (const auto& w : ws) {
      if (w.label != which) continue;
      if (w.rect.x < 0 || w.rect.y < 0 || w.rect.x + w.rect.w > out.width() ||
          w.rect.y + w.rect.h > out.height())
        throw std::out_of_range("report window " + rect_text(w.rect) + " lies outside the image");
      if (which == Label::folded)
        draw_frame(out, w.rect, 0, 0, 255);
      else
        draw_frame(out, w.rect, 255, 255, 0);
    }
  };
  draw_all(report.windows, Label::normal);
  draw_all(report.windows, Label::folded);
  draw_all(report.offset_windows, Label::folded);
  return out;
}

json to_json(const SlideReport& r, bool include_timing) {
  json j = {{"slide_id", r.slide_id}, {"window", r.window}, {"windows", windows_json(r.windows)}};
  if (!r.offset_windows.empty()) j["offset_windows"] = windows_json(r.offset_windows);
  j["flagged"] = r.flagged;
  if (include_timing) j["seconds"] = r.seconds;
  return j;
}

}  // namespace foldscan
