#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "foldscan/features.hpp"
#include "foldscan/model.hpp"

namespace foldscan {

struct ConfusionMatrix {
  long long tp = 0;
  long long fn = 0;
  long long fp = 0;
  long long tn = 0;

  long long total() const { return tp + fn + fp + tn; }
  ConfusionMatrix& operator+=(const ConfusionMatrix& o);
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

// Undefined ratios (0/0) are empty.
struct Metrics {
  std::optional<double> accuracy;
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::optional<double> precision;
};

// Truths must be folded or normal. Throws std::invalid_argument on length
// mismatch or unknown labels.
ConfusionMatrix confusion(std::span<const Label> predictions, std::span<const Label> truths);
Metrics metrics(const ConfusionMatrix& cm);

using Trainer = std::function<Model(std::span<const FeatureVector>)>;

struct LooOptions {
  // Score the held-out source by majority vote over all its variants
  // (ties to folded) instead of the identity variant alone.
  bool vote_augmented = false;
  // Restrict the data to identity variants first (no-augmentation protocol).
  bool identity_only = false;
  unsigned jobs = 1;
};

struct FoldRecord {
  std::string source_id;
  Label truth = Label::unknown;
  Label prediction = Label::unknown;
  double score = 0.0;
  std::size_t train_size = 0;
  std::size_t evaluated_variants = 0;
};

struct SkippedFold {
  std::string source_id;
  std::string reason;
};

struct LooResult {
  ConfusionMatrix matrix;
  std::vector<FoldRecord> folds;
  std::vector<SkippedFold> skipped;
};

// Input sorted by (source_id, augmentation, label, values); fold results are
// independent of the caller's ordering.
std::vector<FeatureVector> canonical_order(std::span<const FeatureVector> features);

struct Fold {
  std::string source_id;
  std::vector<FeatureVector> train;
  std::vector<FeatureVector> held_out;
};

// Builds the fold that holds out every vector of source_id. Throws
// InvariantViolation if a training vector shares the held-out source.
Fold build_fold(std::span<const FeatureVector> canonical, const std::string& source_id);

// One fold per distinct source_id (grouped leave-one-out). Throws Error if
// fewer than two groups exist.
LooResult loo_evaluate(std::span<const FeatureVector> features, const Trainer& trainer,
                       const LooOptions& options = {});
LooResult loo_evaluate(std::span<const FeatureVector> features, Preset preset,
                       const LooOptions& options = {}, const TrainOptions& train = {});

struct PresetRow {
  Preset preset;
  std::optional<LooResult> result;
  std::optional<Metrics> metrics;
  std::string error;
};

// Evaluates each preset on the same folds. Rows sorted by accuracy
// (descending, failures last), ties kept in request order.
std::vector<PresetRow> compare_presets(std::span<const FeatureVector> features,
                                       std::span<const Preset> presets,
                                       const LooOptions& options = {},
                                       const TrainOptions& train = {});

nlohmann::json to_json(const ConfusionMatrix& cm);
nlohmann::json to_json(const Metrics& m);
nlohmann::json to_json(const LooResult& r);

}  // namespace foldscan
