// foldscan: command-line front end for the tissue-fold detection pipeline.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "foldscan/backend.hpp"
#include "foldscan/dataset.hpp"
#include "foldscan/error.hpp"
#include "foldscan/evaluation.hpp"
#include "foldscan/features.hpp"
#include "foldscan/model.hpp"
#include "foldscan/patch_pipeline.hpp"
#include "foldscan/scan.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitFlagged = 2;
constexpr int kExitUsage = 64;

constexpr std::uint64_t kDefaultSeed = 1337;
constexpr std::size_t kExtractChunk = 256;

// key=value lines on stderr.
class Log {
 public:
  explicit Log(const char* level) { line_ << "level=" << level; }
  ~Log() { std::cerr << line_.str() << '\n'; }
  template <typename T>
  Log& kv(const char* key, const T& value) {
    line_ << ' ' << key << '=' << value;
    return *this;
  }
  Log& msg(const std::string& m) {
    line_ << " msg=\"" << m << '"';
    return *this;
  }

 private:
  std::ostringstream line_;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Values shared by several subcommands. Precedence: flag > config file > default.
struct RunConfig {
  unsigned jobs = 0;
  std::uint64_t seed = kDefaultSeed;
  std::string classifier = "svm-quadratic";
  std::vector<std::string> classifiers;
  int window = 1500;
  std::vector<int> window_sizes;
  double threshold = 0.3;
  double cutoff = 0.5;
  bool augment = false;
  bool vote_augmented = false;
  bool identity_only = false;
  bool offset_pass = false;
  bool balance_classes = false;
  bool timing = false;
  double svm_tol = 1e-3;

  fs::path config, manifest, out, model, patches, features, report, image, backend, overlay;
};

template <typename T>
void from_config(const CLI::App& app, const std::string& flag, const json& cfg, const char* key,
                 T& target) {
  bool given = false;
  for (const auto* sub = &app; sub != nullptr;) {
    for (const auto* opt : sub->get_options())
      if (opt->check_name(flag) && opt->count() > 0) given = true;
    const auto subs = sub->get_subcommands();
    sub = subs.empty() ? nullptr : subs.front();
  }
  if (given || !cfg.contains(key)) return;
  try {
    target = cfg.at(key).get<T>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("config key '") + key + "': " + e.what());
  }
}

void apply_config(const CLI::App& app, RunConfig& rc) {
  if (rc.config.empty()) return;
  std::ifstream in(rc.config);
  if (!in) throw UsageError("cannot open config file '" + rc.config.string() + "'");
  json cfg;
  try {
    in >> cfg;
  } catch (const json::exception& e) {
    throw UsageError("malformed config file: " + std::string(e.what()));
  }
  from_config(app, "--jobs", cfg, "jobs", rc.jobs);
  from_config(app, "--seed", cfg, "seed", rc.seed);
  from_config(app, "--classifier", cfg, "classifier", rc.classifier);
  from_config(app, "--classifiers", cfg, "classifiers", rc.classifiers);
  from_config(app, "--window", cfg, "window", rc.window);
  from_config(app, "--window-sizes", cfg, "window_sizes", rc.window_sizes);
  from_config(app, "--threshold", cfg, "threshold", rc.threshold);
  from_config(app, "--cutoff", cfg, "cutoff", rc.cutoff);
  from_config(app, "--augment", cfg, "augment", rc.augment);
  from_config(app, "--vote-augmented", cfg, "vote_augmented", rc.vote_augmented);
  from_config(app, "--no-augmentation", cfg, "no_augmentation", rc.identity_only);
  from_config(app, "--offset-pass", cfg, "offset_pass", rc.offset_pass);
  from_config(app, "--timing", cfg, "timing", rc.timing);
  from_config(app, "--balance-classes", cfg, "balance_classes", rc.balance_classes);
  from_config(app, "--svm-tol", cfg, "svm_tol", rc.svm_tol);
}

void require_file(const fs::path& p, const char* what) {
  std::error_code ec;
  if (!fs::is_regular_file(p, ec)) throw UsageError(std::string(what) + " '" + p.string() + "' not found");
}

void require_dir(const fs::path& p, const char* what) {
  std::error_code ec;
  if (!fs::is_directory(p, ec)) throw UsageError(std::string(what) + " '" + p.string() + "' is not a directory");
}

void require_output(const fs::path& p) {
  const auto parent = p.parent_path();
  std::error_code ec;
  if (!parent.empty() && !fs::is_directory(parent, ec))
    throw UsageError("output directory '" + parent.string() + "' does not exist");
}

void write_json(const json& j, const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw foldscan::Error("cannot write '" + p.string() + "'");
  out << j.dump(2) << '\n';
}

fs::path with_suffix(const fs::path& p, const std::string& suffix) {
  auto out = p;
  out.replace_filename(p.stem().string() + suffix + p.extension().string());
  return out;
}

foldscan::TrainOptions train_options(const RunConfig& rc) {
  foldscan::TrainOptions t;
  t.balance_classes = rc.balance_classes;
  t.svm_tol = rc.svm_tol;
  return t;
}

// --- dataset build -------------------------------------------------------

int cmd_dataset_build(const RunConfig& rc) {
  require_file(rc.manifest, "manifest");
  const auto manifest = foldscan::load_manifest(rc.manifest);
  fs::create_directories(rc.out);

  json index = json::array();
  std::size_t folded = 0, normal = 0;
  foldscan::ingest_dataset(
      manifest, rc.augment,
      [&](foldscan::LabeledPatch&& lp) {
        const std::string tag = lp.patch.augmentation.str();
        const std::string file = lp.patch.source_id + "__" + tag + ".png";
        foldscan::save_image(lp.patch, rc.out / file);
        index.push_back({{"file", file},
                         {"source_id", lp.patch.source_id},
                         {"augmentation", tag},
                         {"label", foldscan::to_string(lp.label)}});
        (lp.label == foldscan::Label::folded ? folded : normal)++;
      },
      rc.jobs);
  write_json({{"entries", index}}, rc.out / "index.json");
  Log("info").msg("dataset written").kv("folded", folded).kv("normal", normal).kv("out", rc.out.string());
  return kExitOk;
}

// --- features extract ----------------------------------------------------

struct PatchFile {
  fs::path path;
  std::string source_id;
  std::string augmentation;
  foldscan::Label label = foldscan::Label::unknown;
};

std::vector<PatchFile> list_patch_files(const fs::path& dir) {
  std::vector<PatchFile> files;
  const auto index_path = dir / "index.json";
  if (fs::exists(index_path)) {
    std::ifstream in(index_path);
    json j;
    try {
      in >> j;
      for (const auto& e : j.at("entries")) {
        const auto label = foldscan::parse_label(e.at("label").get<std::string>());
        if (!label) throw foldscan::Error("bad label in " + index_path.string());
        files.push_back({dir / e.at("file").get<std::string>(), e.at("source_id").get<std::string>(),
                         e.at("augmentation").get<std::string>(), *label});
      }
    } catch (const json::exception& e) {
      throw foldscan::Error("malformed patch index '" + index_path.string() + "': " + e.what());
    }
    return files;
  }
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext != ".png" && ext != ".tif" && ext != ".tiff") continue;
    const std::string stem = entry.path().stem().string();
    PatchFile pf{entry.path(), stem, foldscan::kIdentityTag, foldscan::Label::unknown};
    if (const auto sep = stem.rfind("__"); sep != std::string::npos) {
      if (foldscan::AugmentationTag::parse(stem.substr(sep + 2))) {
        pf.source_id = stem.substr(0, sep);
        pf.augmentation = stem.substr(sep + 2);
      }
    }
    files.push_back(std::move(pf));
  }
  std::sort(files.begin(), files.end(), [](const PatchFile& a, const PatchFile& b) { return a.path < b.path; });
  return files;
}

int cmd_features_extract(const RunConfig& rc) {
  require_file(rc.model, "model");
  require_dir(rc.patches, "patch directory");
  require_output(rc.out);
  const auto backend = foldscan::OnnxBackend::load(rc.model);
  Log("info").msg("backend loaded").kv("dimension", backend->dimension())
      .kv("input", std::to_string(backend->input_size().width) + "x" + std::to_string(backend->input_size().height));

  const auto files = list_patch_files(rc.patches);
  std::vector<foldscan::FeatureVector> features;
  features.reserve(files.size());
  for (std::size_t start = 0; start < files.size(); start += kExtractChunk) {
    const std::size_t count = std::min(kExtractChunk, files.size() - start);
    std::vector<foldscan::Patch> patches;
    for (std::size_t i = 0; i < count; ++i) {
      const auto& f = files[start + i];
      auto p = foldscan::load_image(f.path);
      p.source_id = f.source_id;
      patches.push_back(std::move(p));
    }
    auto batch = foldscan::extract_batch(*backend, patches, rc.jobs);
    for (std::size_t i = 0; i < count; ++i) {
      batch[i].augmentation = files[start + i].augmentation;
      batch[i].label = files[start + i].label;
      features.push_back(std::move(batch[i]));
    }
  }
  foldscan::export_features(features, rc.out);
  Log("info").msg("features written").kv("count", features.size()).kv("out", rc.out.string());
  return kExitOk;
}

// --- train / eval / compare ----------------------------------------------

int cmd_train(const RunConfig& rc) {
  require_file(rc.features, "feature table");
  require_output(rc.out);
  const auto preset = foldscan::parse_preset(rc.classifier);
  const auto data = foldscan::import_features(rc.features);
  const auto model = foldscan::train_preset(preset, data, train_options(rc));
  if (const auto* svm = std::get_if<foldscan::SvmModel>(&model)) {
    Log(svm->training.converged ? "info" : "warn")
        .msg(svm->training.converged ? "SMO converged" : "SMO hit iteration cap")
        .kv("iterations", svm->training.iterations)
        .kv("max_violation", svm->training.max_violation)
        .kv("support_vectors", svm->support_vectors.size());
  }
  foldscan::save_model(model, rc.out);
  Log("info").msg("model written").kv("classifier", rc.classifier).kv("out", rc.out.string());
  return kExitOk;
}

foldscan::LooOptions loo_options(const RunConfig& rc) {
  foldscan::LooOptions o;
  o.vote_augmented = rc.vote_augmented;
  o.identity_only = rc.identity_only;
  o.jobs = rc.jobs;
  return o;
}

int cmd_eval_loo(const RunConfig& rc) {
  require_file(rc.features, "feature table");
  require_output(rc.report);
  const auto preset = foldscan::parse_preset(rc.classifier);
  const auto data = foldscan::import_features(rc.features);
  const auto result = foldscan::loo_evaluate(data, preset, loo_options(rc), train_options(rc));
  json report = foldscan::to_json(result);
  report["classifier"] = rc.classifier;
  report["vote_augmented"] = rc.vote_augmented;
  report["identity_only"] = rc.identity_only;
  report["seed"] = rc.seed;
  write_json(report, rc.report);
  for (const auto& s : result.skipped) Log("warn").msg("fold skipped").kv("source_id", s.source_id).kv("reason", "\"" + s.reason + "\"");
  const auto m = foldscan::metrics(result.matrix);
  Log("info").msg("leave-one-out done").kv("folds", result.folds.size())
      .kv("accuracy", m.accuracy ? std::to_string(*m.accuracy) : "n/a");
  return kExitOk;
}

int cmd_compare(const RunConfig& rc) {
  require_file(rc.features, "feature table");
  if (!rc.report.empty()) require_output(rc.report);
  std::vector<foldscan::Preset> presets;
  if (rc.classifiers.empty())
    presets = foldscan::all_presets();
  else
    for (const auto& c : rc.classifiers) presets.push_back(foldscan::parse_preset(c));
  const auto data = foldscan::import_features(rc.features);
  const auto rows = foldscan::compare_presets(data, presets, loo_options(rc), train_options(rc));

  json out = json::array();
  std::cout << "classifier       accuracy  sensitivity  specificity  precision\n";
  auto cell = [](const std::optional<double>& v) {
    char buf[16];
    if (v)
      std::snprintf(buf, sizeof buf, "%8.4f", *v);
    else
      std::snprintf(buf, sizeof buf, "%8s", "n/a");
    return std::string(buf);
  };
  for (const auto& row : rows) {
    json r = {{"classifier", foldscan::to_string(row.preset)}};
    std::string name = foldscan::to_string(row.preset);
    name.resize(16, ' ');
    if (row.metrics) {
      r["metrics"] = foldscan::to_json(*row.metrics);
      r["confusion_matrix"] = foldscan::to_json(row.result->matrix);
      r["skipped_folds"] = row.result->skipped.size();
      std::cout << name << ' ' << cell(row.metrics->accuracy) << "     " << cell(row.metrics->sensitivity)
                << "     " << cell(row.metrics->specificity) << "   " << cell(row.metrics->precision) << '\n';
    } else {
      r["error"] = row.error;
      std::cout << name << " error: " << row.error << '\n';
    }
    out.push_back(std::move(r));
  }
  if (!rc.report.empty())
    write_json({{"rows", out}, {"seed", rc.seed}, {"vote_augmented", rc.vote_augmented},
                {"identity_only", rc.identity_only}},
               rc.report);
  return kExitOk;
}

// --- scan / baseline-scan ------------------------------------------------

std::vector<int> scan_windows(const RunConfig& rc) {
  std::vector<int> sizes = rc.window_sizes.empty() ? std::vector<int>{rc.window} : rc.window_sizes;
  for (int w : sizes)
    if (w < 1) throw UsageError("window sizes must be >= 1");
  return sizes;
}

template <typename ScanFn>
int run_scans(const RunConfig& rc, const foldscan::Patch& image, ScanFn&& scan) {
  const auto sizes = scan_windows(rc);
  bool flagged = false;
  for (int w : sizes) {
    const auto report = scan(w);
    const std::string suffix = sizes.size() > 1 ? "_w" + std::to_string(w) : "";
    if (!rc.report.empty()) write_json(foldscan::to_json(report, rc.timing), with_suffix(rc.report, suffix));
    if (!rc.overlay.empty())
      foldscan::save_image(foldscan::render_overlay(image, report), with_suffix(rc.overlay, suffix));
    Log("info").msg("slide scanned").kv("slide", report.slide_id).kv("window", w)
        .kv("windows", report.windows.size()).kv("folded", report.folded_count())
        .kv("flagged", report.flagged ? "true" : "false").kv("seconds", report.seconds);
    flagged |= report.flagged;
  }
  return flagged ? kExitFlagged : kExitOk;
}

int cmd_scan(const RunConfig& rc) {
  require_file(rc.image, "image");
  require_file(rc.model, "model");
  require_file(rc.backend, "backend");
  if (!rc.report.empty()) require_output(rc.report);
  if (!rc.overlay.empty()) require_output(rc.overlay);
  const auto model = foldscan::load_model(rc.model);
  const auto backend = foldscan::OnnxBackend::load(rc.backend);
  const auto image = foldscan::load_image(rc.image);
  foldscan::ScanOptions opts{rc.jobs, rc.offset_pass};
  return run_scans(rc, image, [&](int w) { return foldscan::scan_slide(image, model, *backend, w, opts); });
}

int cmd_baseline_scan(const RunConfig& rc) {
  require_file(rc.image, "image");
  if (!rc.report.empty()) require_output(rc.report);
  if (!rc.overlay.empty()) require_output(rc.overlay);
  if (rc.threshold < -1.0 || rc.threshold > 1.0) throw UsageError("--threshold must lie in [-1, 1]");
  if (rc.cutoff < 0.0 || rc.cutoff > 1.0) throw UsageError("--cutoff must lie in [0, 1]");
  const auto image = foldscan::load_image(rc.image);
  foldscan::ScanOptions opts{rc.jobs, rc.offset_pass};
  return run_scans(rc, image, [&](int w) {
    return foldscan::baseline_scan(image, w, rc.threshold, rc.cutoff, opts);
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"foldscan: tissue-fold detection for histopathology slide images"};
  app.require_subcommand(1);
  RunConfig rc;

  app.add_option("--jobs", rc.jobs, "Worker threads (0 = all cores)");
  app.add_option("--seed", rc.seed, "Seed recorded in reports");
  app.add_option("--config", rc.config, "Optional JSON config file");

  auto* dataset = app.add_subcommand("dataset", "Patch dataset tools");
  dataset->require_subcommand(1);
  auto* build = dataset->add_subcommand("build", "Load a manifest and write (augmented) patches");
  build->add_option("--manifest", rc.manifest, "Dataset manifest JSON")->required();
  build->add_flag("--augment", rc.augment, "Write all 12 augmentation variants");
  build->add_option("--out", rc.out, "Output directory")->required();

  auto* features = app.add_subcommand("features", "Feature tables");
  features->require_subcommand(1);
  auto* extract = features->add_subcommand("extract", "Embed a directory of patches");
  extract->add_option("--model", rc.model, "ONNX model (sidecar <model>.meta.json)")->required();
  extract->add_option("--patches", rc.patches, "Patch directory")->required();
  extract->add_option("--out", rc.out, "Output CSV")->required();

  auto* train = app.add_subcommand("train", "Train a classifier preset");
  train->add_option("--features", rc.features, "Feature CSV")->required();
  train->add_option("--classifier", rc.classifier, "Classifier preset");
  train->add_option("--out", rc.out, "Output model JSON")->required();
  train->add_flag("--balance-classes", rc.balance_classes, "Weight SVM box constraints by class frequency");
  train->add_option("--svm-tol", rc.svm_tol, "SMO stopping tolerance");

  auto* eval = app.add_subcommand("eval", "Evaluation");
  eval->require_subcommand(1);
  auto* loo = eval->add_subcommand("loo", "Grouped leave-one-out evaluation");
  loo->add_option("--features", rc.features, "Feature CSV")->required();
  loo->add_option("--classifier", rc.classifier, "Classifier preset");
  loo->add_flag("--vote-augmented", rc.vote_augmented, "Majority vote over held-out variants");
  loo->add_flag("--no-augmentation", rc.identity_only, "Use identity variants only");
  loo->add_flag("--balance-classes", rc.balance_classes, "Weight SVM box constraints by class frequency");
  loo->add_option("--svm-tol", rc.svm_tol, "SMO stopping tolerance");
  loo->add_option("--report", rc.report, "Report JSON")->required();

  auto* compare = app.add_subcommand("compare", "Leave-one-out comparison of presets");
  compare->add_option("--features", rc.features, "Feature CSV")->required();
  compare->add_option("--classifiers", rc.classifiers, "Presets (default: all six)")->delimiter(',');
  compare->add_flag("--vote-augmented", rc.vote_augmented, "Majority vote over held-out variants");
  compare->add_flag("--no-augmentation", rc.identity_only, "Use identity variants only");
  compare->add_flag("--balance-classes", rc.balance_classes, "Weight SVM box constraints by class frequency");
  compare->add_option("--svm-tol", rc.svm_tol, "SMO stopping tolerance");
  compare->add_option("--report", rc.report, "Report JSON");

  auto* scan = app.add_subcommand("scan", "Classify a slide window by window");
  scan->add_option("--image", rc.image, "Slide raster (PNG/TIFF)")->required();
  scan->add_option("--model", rc.model, "Trained model JSON")->required();
  scan->add_option("--backend", rc.backend, "ONNX embedding model")->required();
  scan->add_option("--window", rc.window, "Window size in pixels");
  scan->add_option("--window-sizes", rc.window_sizes, "Several window sizes, one report each")->delimiter(',');
  scan->add_flag("--offset-pass", rc.offset_pass, "Add a half-window shifted pass");
  scan->add_option("--overlay", rc.overlay, "Annotated PNG output");
  scan->add_option("--report", rc.report, "Report JSON");
  scan->add_flag("--timing", rc.timing, "Record wall-clock seconds in the report");

  auto* baseline = app.add_subcommand("baseline-scan", "Saturation-minus-intensity color baseline");
  baseline->add_option("--image", rc.image, "Slide raster (PNG/TIFF)")->required();
  baseline->add_option("--window", rc.window, "Window size in pixels");
  baseline->add_option("--window-sizes", rc.window_sizes, "Several window sizes, one report each")->delimiter(',');
  baseline->add_option("--threshold", rc.threshold, "Per-pixel S - I threshold in [-1, 1]");
  baseline->add_option("--cutoff", rc.cutoff, "Folded-pixel fraction cutoff in [0, 1]");
  baseline->add_flag("--offset-pass", rc.offset_pass, "Add a half-window shifted pass");
  baseline->add_option("--overlay", rc.overlay, "Annotated PNG output");
  baseline->add_option("--report", rc.report, "Report JSON");
  baseline->add_flag("--timing", rc.timing, "Record wall-clock seconds in the report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    apply_config(app, rc);
    if (build->parsed()) return cmd_dataset_build(rc);
    if (extract->parsed()) return cmd_features_extract(rc);
    if (train->parsed()) return cmd_train(rc);
    if (loo->parsed()) return cmd_eval_loo(rc);
    if (compare->parsed()) return cmd_compare(rc);
    if (scan->parsed()) return cmd_scan(rc);
    if (baseline->parsed()) return cmd_baseline_scan(rc);
    std::cerr << app.help();
    return kExitUsage;
  } catch (const UsageError& e) {
    Log("error").msg(e.what());
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    Log("error").msg(e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    Log("error").msg(e.what());
    return kExitError;
  }
}
