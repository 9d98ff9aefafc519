#include "foldscan/evaluation.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>

#include "foldscan/error.hpp"
#include "foldscan/image.hpp"
#include "foldscan/parallel.hpp"

namespace foldscan {

using nlohmann::json;

namespace {

std::optional<double> ratio(long long num, long long den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

bool has_both_classes(std::span<const FeatureVector> data) {
  bool folded = false, normal = false;
  for (const auto& v : data) {
    folded |= v.label == Label::folded;
    normal |= v.label == Label::normal;
  }
  return folded && normal;
}

// Either an evaluated fold or a reason it was skipped.
struct FoldOutcome {
  std::optional<FoldRecord> record;
  std::optional<SkippedFold> skipped;
};

FoldOutcome run_fold(std::span<const FeatureVector> canonical, const std::string& source_id,
                     const Trainer& trainer, const LooOptions& options) {
  Fold fold = build_fold(canonical, source_id);
  FoldOutcome out;

  const FeatureVector* identity = nullptr;
  for (const auto& v : fold.held_out)
    if (v.augmentation == kIdentityTag) {
      identity = &v;
      break;
    }
  if (!identity && !options.vote_augmented) {
    out.skipped = SkippedFold{source_id, "no identity variant to score"};
    return out;
  }
  const Label truth = identity ? identity->label : fold.held_out.front().label;
  if (truth != Label::folded && truth != Label::normal) {
    out.skipped = SkippedFold{source_id, "held-out source is unlabeled"};
    return out;
  }
  // A single-class training set is only fatal to trainers that need both
  // classes; those folds are recorded as skipped.
  std::optional<Model> trained;
  try {
    trained = trainer(fold.train);
  } catch (const Error& e) {
    if (has_both_classes(fold.train)) throw;
    out.skipped = SkippedFold{source_id, std::string("training set is single-class without this source: ") + e.what()};
    return out;
  }
  const Model& model = *trained;
  FoldRecord rec;
  rec.source_id = source_id;
  rec.truth = truth;
  rec.train_size = fold.train.size();
  if (options.vote_augmented) {
    std::size_t folded_votes = 0;
    double score_sum = 0.0;
    for (const auto& v : fold.held_out) {
      const double s = decision(model, v.values);
      score_sum += s;
      if (s >= 0.0) ++folded_votes;
    }
    rec.evaluated_variants = fold.held_out.size();
    rec.score = score_sum / static_cast<double>(fold.held_out.size());
    rec.prediction = 2 * folded_votes >= fold.held_out.size() ? Label::folded : Label::normal;
  } else {
    rec.evaluated_variants = 1;
    rec.score = decision(model, identity->values);
    rec.prediction = rec.score >= 0.0 ? Label::folded : Label::normal;
  }
  out.record = std::move(rec);
  return out;
}

}  // namespace

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o) {
  tp += o.tp;
  fn += o.fn;
  fp += o.fp;
  tn += o.tn;
  return *this;
}

ConfusionMatrix confusion(std::span<const Label> predictions, std::span<const Label> truths) {
  if (predictions.size() != truths.size())
    throw std::invalid_argument("predictions and truths differ in length");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const Label p = predictions[i], t = truths[i];
    if (t == Label::unknown || p == Label::unknown)
      throw std::invalid_argument("confusion matrix entries must be folded or normal");
    if (t == Label::folded)
      (p == Label::folded ? cm.tp : cm.fn)++;
    else
      (p == Label::folded ? cm.fp : cm.tn)++;
  }
  return cm;
}

Metrics metrics(const ConfusionMatrix& cm) {
  return {ratio(cm.tp + cm.tn, cm.total()), ratio(cm.tp, cm.tp + cm.fn),
          ratio(cm.tn, cm.tn + cm.fp), ratio(cm.tp, cm.tp + cm.fp)};
}

std::vector<FeatureVector> canonical_order(std::span<const FeatureVector> features) {
  std::vector<FeatureVector> out(features.begin(), features.end());
  std::sort(out.begin(), out.end(), [](const FeatureVector& a, const FeatureVector& b) {
    if (a.source_id != b.source_id) return a.source_id < b.source_id;
    if (a.augmentation != b.augmentation) return a.augmentation < b.augmentation;
    if (a.label != b.label) return a.label < b.label;
    return a.values < b.values;
  });
  return out;
}

Fold build_fold(std::span<const FeatureVector> canonical, const std::string& source_id) {
  Fold fold;
  fold.source_id = source_id;
  for (const auto& v : canonical) (v.source_id == source_id ? fold.held_out : fold.train).push_back(v);
  for (const auto& v : fold.train)
    if (v.source_id == source_id)
      throw InvariantViolation("leakage: training fold contains held-out source '" + source_id + "'");
  return fold;
}

LooResult loo_evaluate(std::span<const FeatureVector> features, const Trainer& trainer,
                       const LooOptions& options) {
  std::vector<FeatureVector> data = canonical_order(features);
  if (options.identity_only)
    std::erase_if(data, [](const FeatureVector& v) { return v.augmentation != kIdentityTag; });

  std::vector<std::string> groups;
  for (const auto& v : data)
    if (groups.empty() || groups.back() != v.source_id) groups.push_back(v.source_id);
  if (groups.size() < 2)
    throw Error("leave-one-out needs at least two distinct source_id groups, found " +
                std::to_string(groups.size()));

  std::vector<FoldOutcome> outcomes(groups.size());
  parallel_for(groups.size(), options.jobs, [&](std::size_t g) {
    outcomes[g] = run_fold(data, groups[g], trainer, options);
  });

  LooResult result;
  for (auto& o : outcomes) {
    if (o.skipped) {
      result.skipped.push_back(std::move(*o.skipped));
      continue;
    }
    const Label p[] = {o.record->prediction};
    const Label t[] = {o.record->truth};
    result.matrix += confusion(p, t);
    result.folds.push_back(std::move(*o.record));
  }
  return result;
}

LooResult loo_evaluate(std::span<const FeatureVector> features, Preset preset,
                       const LooOptions& options, const TrainOptions& train) {
  return loo_evaluate(
      features, [&](std::span<const FeatureVector> d) { return train_preset(preset, d, train); },
      options);
}

std::vector<PresetRow> compare_presets(std::span<const FeatureVector> features,
                                       std::span<const Preset> presets, const LooOptions& options,
                                       const TrainOptions& train) {
  std::vector<PresetRow> rows;
  for (Preset p : presets) {
    PresetRow row{p, std::nullopt, std::nullopt, {}};
    try {
      row.result = loo_evaluate(features, p, options, train);
      row.metrics = metrics(row.result->matrix);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const PresetRow& a, const PresetRow& b) {
    const double aa = a.metrics && a.metrics->accuracy ? *a.metrics->accuracy : -1.0;
    const double bb = b.metrics && b.metrics->accuracy ? *b.metrics->accuracy : -1.0;
    return aa > bb;
  });
  return rows;
}

json to_json(const ConfusionMatrix& cm) {
  return {{"tp", cm.tp}, {"fn", cm.fn}, {"fp", cm.fp}, {"tn", cm.tn}};
}

json to_json(const Metrics& m) {
  return {{"accuracy", optional_json(m.accuracy)},
          {"sensitivity", optional_json(m.sensitivity)},
          {"specificity", optional_json(m.specificity)},
          {"precision", optional_json(m.precision)}};
}

json to_json(const LooResult& r) {
  json folds = json::array();
  for (const auto& f : r.folds)
    folds.push_back({{"source_id", f.source_id},
                     {"truth", to_string(f.truth)},
                     {"prediction", to_string(f.prediction)},
                     {"score", f.score},
                     {"train_size", f.train_size},
                     {"evaluated_variants", f.evaluated_variants}});
  json skipped = json::array();
  for (const auto& s : r.skipped) skipped.push_back({{"source_id", s.source_id}, {"reason", s.reason}});
  return {{"confusion_matrix", to_json(r.matrix)},
          {"metrics", to_json(metrics(r.matrix))},
          {"folds", std::move(folds)},
          {"skipped_folds", std::move(skipped)}};
}

}  // namespace foldscan
