#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "foldscan/backend.hpp"
#include "foldscan/image.hpp"
#include "foldscan/model.hpp"

namespace foldscan {

struct WindowVerdict {
  Rect rect;
  Label label = Label::normal;
  double score = 0.0;
};

struct SlideReport {
  std::string slide_id;
  int window = 0;
  std::vector<WindowVerdict> windows;         // row-major, disjoint
  std::vector<WindowVerdict> offset_windows;  // half-window shifted pass, if run
  bool flagged = false;
  double seconds = 0.0;

  std::size_t folded_count() const;
};

struct ScanOptions {
  unsigned jobs = 1;
  bool offset_pass = false;
};

// Tiles the slide, embeds every kept window and classifies it; a single
// folded window flags the slide. Throws Error when the model and backend
// dimensions differ, or naming the rect whose embedding failed.
SlideReport scan_slide(const Patch& image, const Model& model, const Embedder& backend, int window,
                       const ScanOptions& options = {});

// Same report shape, labeling a window folded when its color-baseline
// fraction exceeds fraction_cutoff. Score is the fraction itself.
SlideReport baseline_scan(const Patch& image, int window, double threshold, double fraction_cutoff,
                          const ScanOptions& options = {});

inline constexpr int kOverlayBorder = 3;

// Draws 3-pixel frames inside each window: blue for folded, yellow for
// normal. Interior pixels are untouched.
Patch render_overlay(const Patch& image, const SlideReport& report);

// Wall-clock time is the only nondeterministic field; leave it out for
// byte-reproducible reports.
nlohmann::json to_json(const SlideReport& r, bool include_timing = true);

}  // namespace foldscan
