#include "foldscan/backend.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>

#include <json.hpp>
#include <opencv2/core.hpp>
#include <opencv2/core/utils/logger.hpp>
#include <opencv2/dnn.hpp>

#include "foldscan/error.hpp"
#include "foldscan/onnx_signature.hpp"
#include "foldscan/parallel.hpp"

namespace foldscan {

namespace {

std::array<double, 3> read_triple(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return {fallback, fallback, fallback};
  const auto& v = j[key];
  if (v.is_number()) {
    const double x = v.get<double>();
    return {x, x, x};
  }
  if (v.is_array() && v.size() == 3) return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
  throw Error(std::string("sidecar field \"") + key + "\" must be a number or a 3-element array");
}

void quiet_opencv() {
  static std::once_flag once;
  std::call_once(once, [] { cv::utils::logging::setLogLevel(cv::utils::logging::LOG_LEVEL_ERROR); });
}

std::string join(const std::vector<std::string>& names) {
  std::string s;
  for (const auto& n : names) {
    if (!s.empty()) s += ", ";
    s += n;
  }
  return s;
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& model_path) {
  auto p = model_path;
  p.replace_extension(".meta.json");
  return p;
}

BackendConfig load_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open backend sidecar '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed sidecar '" + path.string() + "': " + e.what());
  }
  BackendConfig cfg;
  try {
    cfg.embedding_output = j.at("embedding_output").get<std::string>();
    cfg.preprocessing.mean = read_triple(j, "mean", 0.0);
    cfg.preprocessing.scale = read_triple(j, "scale", 1.0);
    const std::string order = j.value("channel_order", "rgb");
    if (order == "rgb")
      cfg.preprocessing.order = ChannelOrder::rgb;
    else if (order == "bgr")
      cfg.preprocessing.order = ChannelOrder::bgr;
    else
      throw Error("sidecar channel_order must be \"rgb\" or \"bgr\"");
    if (j.contains("input_width") || j.contains("input_height"))
      cfg.input_size = InputSize{j.at("input_width").get<int>(), j.at("input_height").get<int>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error("invalid sidecar '" + path.string() + "': " + e.what());
  }
  for (double s : cfg.preprocessing.scale)
    if (s == 0.0 || !std::isfinite(s)) throw Error("sidecar scale entries must be finite and nonzero");
  return cfg;
}

std::vector<float> preprocess(const Patch& p, const Preprocessing& spec) {
  const std::size_t plane = static_cast<std::size_t>(p.width()) * p.height();
  std::vector<float> tensor(plane * 3);
  for (int c = 0; c < 3; ++c) {
    const int src_c = spec.order == ChannelOrder::rgb ? c : 2 - c;
    float* dst = tensor.data() + c * plane;
    for (std::size_t i = 0; i < plane; ++i)
      dst[i] = static_cast<float>((p.data()[i * 3 + src_c] - spec.mean[c]) / spec.scale[c]);
  }
  return tensor;
}

struct OnnxBackend::Impl {
  cv::dnn::Net net;
  std::string input_name;
  BackendConfig config;
  InputSize size;
  std::size_t dim = 0;
  std::mutex mutex;

  cv::Mat forward(const std::vector<float>& tensor) {
    const int shape[4] = {1, 3, size.height, size.width};
    cv::Mat blob(4, shape, CV_32F, const_cast<float*>(tensor.data()));
    std::lock_guard lock(mutex);
    net.setInput(blob, input_name);
    return net.forward(config.embedding_output).clone();
  }
};

OnnxBackend::OnnxBackend(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
OnnxBackend::~OnnxBackend() = default;

std::unique_ptr<OnnxBackend> OnnxBackend::load(const std::filesystem::path& model_path) {
  return load(model_path, load_sidecar(sidecar_path(model_path)));
}

std::unique_ptr<OnnxBackend> OnnxBackend::load(const std::filesystem::path& model_path,
                                               const BackendConfig& config) {
  quiet_opencv();
  std::error_code ec;
  if (!std::filesystem::is_regular_file(model_path, ec))
    throw Error("model file '" + model_path.string() + "' does not exist");

  const OnnxSignature sig = read_onnx_signature(model_path);
  if (sig.inputs.size() != 1)
    throw Error("model '" + model_path.string() + "' must have exactly one image input, found " +
                std::to_string(sig.inputs.size()));
  const auto& input = sig.inputs.front();

  auto impl = std::make_unique<Impl>();
  impl->config = config;
  impl->input_name = input.name;

  std::optional<InputSize> declared;
  if (input.dims.size() == 4) {
    if (input.dims[1] > 0 && input.dims[1] != 3)
      throw Error("model input '" + input.name + "' must have 3 channels");
    if (input.dims[2] > 0 && input.dims[3] > 0)
      declared = InputSize{static_cast<int>(input.dims[3]), static_cast<int>(input.dims[2])};
  } else if (!input.dims.empty()) {
    throw Error("model input '" + input.name + "' must be a rank-4 NCHW tensor");
  }
  if (declared && config.input_size && *declared != *config.input_size)
    throw Error("sidecar input size " + std::to_string(config.input_size->width) + "x" +
                std::to_string(config.input_size->height) + " disagrees with model signature " +
                std::to_string(declared->width) + "x" + std::to_string(declared->height));
  if (!declared && !config.input_size)
    throw Error("model input size is symbolic and the sidecar does not declare one");
  impl->size = declared ? *declared : *config.input_size;

  std::vector<std::string> available;
  for (const auto& o : sig.outputs) available.push_back(o.name);
  for (const auto& o : sig.node_outputs)
    if (std::find(available.begin(), available.end(), o) == available.end()) available.push_back(o);
  if (std::find(available.begin(), available.end(), config.embedding_output) == available.end())
    throw Error("model has no output named '" + config.embedding_output +
                "'; available outputs: " + join(available));

  try {
    impl->net = cv::dnn::readNetFromONNX(model_path.string());
  } catch (const cv::Exception& e) {
    throw Error("cannot load model '" + model_path.string() + "': " + e.what());
  }

  // Probe once to learn the embedding shape.
  std::vector<float> zeros(static_cast<std::size_t>(impl->size.width) * impl->size.height * 3, 0.f);
  cv::Mat out;
  try {
    out = impl->forward(zeros);
  } catch (const cv::Exception& e) {
    throw Error("inference failed on '" + config.embedding_output + "': " + e.what());
  }
  int extended = 0;
  for (int i = 1; i < out.dims; ++i)
    if (out.size[i] > 1) ++extended;
  if (out.dims < 1 || out.size[0] != 1 || extended > 1) {
    std::string shape;
    for (int i = 0; i < out.dims; ++i) shape += (i ? "x" : "") + std::to_string(out.size[i]);
    throw Error("output '" + config.embedding_output + "' is not a vector per image (shape " +
                shape + ")");
  }
  impl->dim = out.total();
  return std::unique_ptr<OnnxBackend>(new OnnxBackend(std::move(impl)));
}

std::size_t OnnxBackend::dimension() const { return impl_->dim; }
InputSize OnnxBackend::input_size() const { return impl_->size; }
const std::string& OnnxBackend::embedding_output() const { return impl_->config.embedding_output; }

std::vector<double> OnnxBackend::embed_resized(const Patch& resized) const {
  if (resized.width() != impl_->size.width || resized.height() != impl_->size.height)
    throw std::invalid_argument("patch does not match the backend input size");
  cv::Mat out;
  try {
    out = impl_->forward(preprocess(resized, impl_->config.preprocessing));
  } catch (const cv::Exception& e) {
    throw Error(std::string("inference failed: ") + e.what());
  }
  const float* ptr = out.ptr<float>();
  return std::vector<double>(ptr, ptr + out.total());
}

FeatureVector extract(const Embedder& backend, const Patch& p) {
  const InputSize size = backend.input_size();
  FeatureVector v;
  v.values = backend.embed_resized(resize(p, size.width, size.height));
  if (v.values.size() != backend.dimension())
    throw Error("backend returned " + std::to_string(v.values.size()) + " values, expected " +
                std::to_string(backend.dimension()));
  for (double x : v.values)
    if (!std::isfinite(x)) throw Error("backend produced a non-finite embedding");
  v.source_id = p.source_id;
  v.augmentation = p.augmentation.str();
  return v;
}

std::vector<FeatureVector> extract_batch(const Embedder& backend, std::span<const Patch> patches,
                                         unsigned jobs) {
  std::vector<FeatureVector> out(patches.size());
  parallel_for(patches.size(), jobs, [&](std::size_t i) {
    try {
      out[i] = extract(backend, patches[i]);
    } catch (const std::exception& e) {
      throw Error("patch " + std::to_string(i) + ": " + e.what());
    }
  });
  return out;
}

}  // namespace foldscan
