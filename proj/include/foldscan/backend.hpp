#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "foldscan/features.hpp"
#include "foldscan/image.hpp"

namespace foldscan {

enum class ChannelOrder { rgb, bgr };

// value = (sample - mean[c]) / scale[c], sample in [0, 255], channel c in
// the model's channel order.
struct Preprocessing {
  std::array<double, 3> mean{0.0, 0.0, 0.0};
  std::array<double, 3> scale{1.0, 1.0, 1.0};
  ChannelOrder order = ChannelOrder::rgb;
};

struct InputSize {
  int width = 0;
  int height = 0;
  friend bool operator==(const InputSize&, const InputSize&) = default;
};

// Contents of <model>.meta.json.
struct BackendConfig {
  std::string embedding_output;
  Preprocessing preprocessing;
  std::optional<InputSize> input_size;
};

BackendConfig load_sidecar(const std::filesystem::path& path);
std::filesystem::path sidecar_path(const std::filesystem::path& model_path);

// NCHW float tensor of an already-resized patch.
std::vector<float> preprocess(const Patch& p, const Preprocessing& spec);

// Anything that maps a patch to a fixed-length embedding.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::size_t dimension() const = 0;
  virtual InputSize input_size() const = 0;
  // Patch is resized to input_size() by the caller-facing extract().
  virtual std::vector<double> embed_resized(const Patch& resized) const = 0;
};

// Frozen network loaded from an ONNX file through OpenCV's dnn module.
// Thread-safe: forward passes are serialized internally.
class OnnxBackend final : public Embedder {
 public:
  // Reads the sidecar next to the model.
  static std::unique_ptr<OnnxBackend> load(const std::filesystem::path& model_path);
  // Throws Error if the file is missing, the output is absent (listing the
  // available names) or the output is not a vector per image.
  static std::unique_ptr<OnnxBackend> load(const std::filesystem::path& model_path,
                                           const BackendConfig& config);
  ~OnnxBackend() override;

  std::size_t dimension() const override;
  InputSize input_size() const override;
  std::vector<double> embed_resized(const Patch& resized) const override;

  const std::string& embedding_output() const;

 private:
  struct Impl;
  explicit OnnxBackend(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

// Resizes to the backend input, embeds, and copies provenance into the
// vector (label unknown). Throws Error on non-finite output.
FeatureVector extract(const Embedder& backend, const Patch& p);

// Elementwise extract in input order. A failure is rethrown as Error
// carrying the index of the first failing patch.
std::vector<FeatureVector> extract_batch(const Embedder& backend, std::span<const Patch> patches,
                                         unsigned jobs = 1);

}  // namespace foldscan
