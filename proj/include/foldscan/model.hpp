#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "foldscan/knn.hpp"
#include "foldscan/svm.hpp"
#include "foldscan/tree.hpp"

namespace foldscan {

using Model = std::variant<SvmModel, KnnModel, TreeModel>;

enum class Preset { svm_quadratic, svm_gaussian, knn_fine, knn_cosine, tree_fine, tree_coarse };

// "svm-quadratic", "knn-cosine", ...
std::string to_string(Preset p);
Preset parse_preset(const std::string& s);
const std::vector<Preset>& all_presets();

struct TrainOptions {
  // Scale each class's box constraint by n / (2 n_class).
  bool balance_classes = false;
  double svm_tol = 1e-3;
};

// svm-quadratic: K = (1 + x.z)^2, C = 1; svm-gaussian: scale sqrt(D), C = 1;
// knn-fine: k = 1 euclidean; knn-cosine: k = 10 cosine;
// tree-fine: 100 splits; tree-coarse: 4 splits.
Model train_preset(Preset preset, std::span<const FeatureVector> data,
                   const TrainOptions& options = {});

std::size_t model_dimension(const Model& m);
// Throws std::invalid_argument on dimension mismatch.
double decision(const Model& m, std::span<const double> x);
// folded iff decision >= 0.
Label predict(const Model& m, std::span<const double> x);
std::string model_kind(const Model& m);

inline constexpr int kModelFormatVersion = 1;

nlohmann::json model_to_json(const Model& m);
// Throws Error on unknown kind, version mismatch or malformed fields.
Model model_from_json(const nlohmann::json& j);

void save_model(const Model& m, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace foldscan
