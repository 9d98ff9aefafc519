#include "foldscan/model.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "foldscan/error.hpp"

namespace foldscan {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

struct PresetName {
  Preset preset;
  const char* name;
};

constexpr PresetName kPresetNames[] = {
    {Preset::svm_quadratic, "svm-quadratic"}, {Preset::svm_gaussian, "svm-gaussian"},
    {Preset::knn_fine, "knn-fine"},           {Preset::knn_cosine, "knn-cosine"},
    {Preset::tree_fine, "tree-fine"},         {Preset::tree_coarse, "tree-coarse"},
};

json standardization_json(const Standardization& s) {
  return {{"mean", s.mean}, {"stdev", s.stdev}};
}

Label label_from_json(const json& j) {
  const auto l = parse_label(j.get<std::string>());
  if (!l || *l == Label::unknown) throw Error("model stores an invalid label");
  return *l;
}

SvmModel svm_from_json(const json& j) {
  SvmModel m;
  const auto& st = j.at("standardization");
  m.standardization.mean = st.at("mean").get<std::vector<double>>();
  m.standardization.stdev = st.at("stdev").get<std::vector<double>>();
  const auto& hp = j.at("hyperparameters");
  m.kernel_spec.kind = parse_kernel_kind(hp.at("kernel").get<std::string>());
  m.kernel_spec.scale = hp.at("scale").get<double>();
  m.kernel_spec.offset = hp.at("offset").get<double>();
  m.C = hp.at("C").get<double>();
  m.weight_folded = hp.at("weight_folded").get<double>();
  m.weight_normal = hp.at("weight_normal").get<double>();
  const auto& p = j.at("parameters");
  m.bias = p.at("bias").get<double>();
  for (const auto& sv : p.at("support_vectors")) {
    m.support_vectors.push_back(sv.at("x").get<std::vector<double>>());
    m.labels.push_back(sv.at("y").get<int>());
    m.alphas.push_back(sv.at("alpha").get<double>());
  }
  const auto& tr = p.at("training");
  m.training.iterations = tr.at("iterations").get<std::size_t>();
  m.training.converged = tr.at("converged").get<bool>();
  m.training.max_violation = tr.at("max_violation").get<double>();
  m.training.dual_objective = tr.at("dual_objective").get<double>();

  m.kernel_spec.validate();
  const std::size_t d = m.standardization.mean.size();
  if (m.standardization.stdev.size() != d) throw Error("standardization vectors differ in length");
  for (std::size_t s = 0; s < m.support_vectors.size(); ++s) {
    if (m.support_vectors[s].size() != d) throw Error("support vector dimension mismatch");
    if (m.labels[s] != 1 && m.labels[s] != -1) throw Error("support vector label must be +1 or -1");
    if (!(m.alphas[s] > 0.0)) throw Error("support vector alpha must be positive");
  }
  return m;
}

KnnModel knn_from_json(const json& j) {
  KnnModel m;
  const auto& hp = j.at("hyperparameters");
  m.k = hp.at("k").get<std::size_t>();
  m.metric = parse_metric(hp.at("metric").get<std::string>());
  for (const auto& pt : j.at("parameters").at("points")) {
    m.points.push_back(pt.at("x").get<std::vector<double>>());
    m.labels.push_back(label_from_json(pt.at("label")));
  }
  if (m.points.empty() || m.k < 1 || m.k > m.points.size())
    throw Error("kNN model needs 1 <= k <= number of points");
  for (const auto& p : m.points)
    if (p.size() != m.points.front().size()) throw Error("kNN points differ in dimension");
  return m;
}

TreeModel tree_from_json(const json& j) {
  TreeModel m;
  m.max_splits = j.at("hyperparameters").at("max_splits").get<std::size_t>();
  const auto& p = j.at("parameters");
  m.dimension_ = p.at("dimension").get<std::size_t>();
  for (const auto& n : p.at("nodes")) {
    TreeNode node;
    node.dim = n.at("dim").get<int>();
    node.threshold = n.at("threshold").get<double>();
    node.left = n.at("left").get<int>();
    node.right = n.at("right").get<int>();
    node.p_folded = n.at("p_folded").get<double>();
    node.count = n.at("count").get<std::size_t>();
    m.nodes.push_back(node);
  }
  if (m.nodes.empty()) throw Error("tree model has no nodes");
  const int count = static_cast<int>(m.nodes.size());
  // Children are stored after their parent and every non-root node has
  // exactly one parent.
  std::vector<int> parents(m.nodes.size(), 0);
  for (int i = 0; i < count; ++i) {
    const auto& n = m.nodes[static_cast<std::size_t>(i)];
    if (n.is_leaf()) continue;
    if (static_cast<std::size_t>(n.dim) >= m.dimension_ || !std::isfinite(n.threshold) ||
        n.left <= i || n.right <= i || n.left >= count || n.right >= count)
      throw Error("tree node " + std::to_string(i) + " is malformed");
    ++parents[static_cast<std::size_t>(n.left)];
    ++parents[static_cast<std::size_t>(n.right)];
  }
  for (std::size_t i = 1; i < parents.size(); ++i)
    if (parents[i] != 1) throw Error("tree node " + std::to_string(i) + " is unreachable or shared");
  if (m.split_count() > m.max_splits) throw Error("tree has more splits than its budget");
  return m;
}

}  // namespace

std::string to_string(Preset p) {
  for (const auto& pn : kPresetNames)
    if (pn.preset == p) return pn.name;
  return "unknown";
}

Preset parse_preset(const std::string& s) {
  for (const auto& pn : kPresetNames)
    if (s == pn.name) return pn.preset;
  throw std::invalid_argument("unknown classifier preset '" + s + "'");
}

const std::vector<Preset>& all_presets() {
  static const std::vector<Preset> all = [] {
    std::vector<Preset> v;
    for (const auto& pn : kPresetNames) v.push_back(pn.preset);
    return v;
  }();
  return all;
}

Model train_preset(Preset preset, std::span<const FeatureVector> data, const TrainOptions& options) {
  auto svm_options = [&](KernelSpec spec) {
    SvmOptions o;
    o.kernel = spec;
    o.C = 1.0;
    o.tol = options.svm_tol;
    if (options.balance_classes) {
      std::size_t folded = 0;
      for (const auto& v : data)
        if (v.label == Label::folded) ++folded;
      const std::size_t normal = data.size() - folded;
      if (folded > 0 && normal > 0) {
        o.weight_folded = static_cast<double>(data.size()) / (2.0 * static_cast<double>(folded));
        o.weight_normal = static_cast<double>(data.size()) / (2.0 * static_cast<double>(normal));
      }
    }
    return o;
  };
  switch (preset) {
    case Preset::svm_quadratic:
      return train_svm(data, svm_options({KernelKind::quadratic, 1.0, 1.0}));
    case Preset::svm_gaussian: {
      const double d = data.empty() ? 1.0 : static_cast<double>(uniform_dimension(data));
      return train_svm(data, svm_options({KernelKind::gaussian, std::sqrt(d), 0.0}));
    }
    case Preset::knn_fine: return train_knn(data, 1, Metric::euclidean);
    case Preset::knn_cosine: return train_knn(data, 10, Metric::cosine);
    case Preset::tree_fine: return train_tree(data, 100);
    case Preset::tree_coarse: return train_tree(data, 4);
  }
  throw std::invalid_argument("unknown preset");
}

std::size_t model_dimension(const Model& m) {
  return std::visit([](const auto& x) { return x.dimension(); }, m);
}

double decision(const Model& m, std::span<const double> x) {
  if (x.size() != model_dimension(m))
    throw std::invalid_argument("feature dimension " + std::to_string(x.size()) +
                                " does not match model dimension " +
                                std::to_string(model_dimension(m)));
  return std::visit([&](const auto& model) { return model.decision(x); }, m);
}

Label predict(const Model& m, std::span<const double> x) {
  return decision(m, x) >= 0.0 ? Label::folded : Label::normal;
}

std::string model_kind(const Model& m) {
  return std::visit(overloaded{[](const SvmModel&) { return std::string("svm"); },
                               [](const KnnModel&) { return std::string("knn"); },
                               [](const TreeModel&) { return std::string("tree"); }},
                    m);
}

json model_to_json(const Model& m) {
  json j;
  j["kind"] = model_kind(m);
  j["version"] = kModelFormatVersion;
  std::visit(
      overloaded{
          [&](const SvmModel& s) {
            j["standardization"] = standardization_json(s.standardization);
            j["hyperparameters"] = {{"kernel", to_string(s.kernel_spec.kind)},
                                    {"scale", s.kernel_spec.scale},
                                    {"offset", s.kernel_spec.offset},
                                    {"C", s.C},
                                    {"weight_folded", s.weight_folded},
                                    {"weight_normal", s.weight_normal}};
            json svs = json::array();
            for (std::size_t i = 0; i < s.support_vectors.size(); ++i)
              svs.push_back({{"x", s.support_vectors[i]}, {"y", s.labels[i]}, {"alpha", s.alphas[i]}});
            j["parameters"] = {{"bias", s.bias},
                               {"support_vectors", std::move(svs)},
                               {"training",
                                {{"iterations", s.training.iterations},
                                 {"converged", s.training.converged},
                                 {"max_violation", s.training.max_violation},
                                 {"dual_objective", s.training.dual_objective}}}};
          },
          [&](const KnnModel& k) {
            j["standardization"] = nullptr;
            j["hyperparameters"] = {{"k", k.k}, {"metric", to_string(k.metric)}};
            json pts = json::array();
            for (std::size_t i = 0; i < k.points.size(); ++i)
              pts.push_back({{"x", k.points[i]}, {"label", to_string(k.labels[i])}});
            j["parameters"] = {{"points", std::move(pts)}};
          },
          [&](const TreeModel& t) {
            j["standardization"] = nullptr;
            j["hyperparameters"] = {{"max_splits", t.max_splits}};
            json nodes = json::array();
            for (const auto& n : t.nodes)
              nodes.push_back({{"dim", n.dim},
                               {"threshold", n.threshold},
                               {"left", n.left},
                               {"right", n.right},
                               {"p_folded", n.p_folded},
                               {"count", n.count}});
            j["parameters"] = {{"dimension", t.dimension_}, {"nodes", std::move(nodes)}};
          }},
      m);
  return j;
}

Model model_from_json(const json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion)
      throw Error("model format version " + std::to_string(version) + " is not supported (expected " +
                  std::to_string(kModelFormatVersion) + ")");
    if (kind == "svm") return svm_from_json(j);
    if (kind == "knn") return knn_from_json(j);
    if (kind == "tree") return tree_from_json(j);
    throw Error("unknown model kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw Error(std::string("malformed model: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw Error(std::string("malformed model: ") + e.what());
  }
}

void save_model(const Model& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model '" + path.string() + "'");
  out << model_to_json(m).dump(1) << '\n';
  if (!out) throw Error("failed writing model '" + path.string() + "'");
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("corrupt model file '" + path.string() + "': " + e.what());
  }
  try {
    return model_from_json(j);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

}  // namespace foldscan
