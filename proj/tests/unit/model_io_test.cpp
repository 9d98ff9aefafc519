#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "foldscan/error.hpp"
#include "foldscan/model.hpp"

using namespace foldscan;

namespace {

std::vector<FeatureVector> training_data(int dims) {
  return foldscan::testing::two_cluster_features(6, dims, 2.0, 21);
}

std::vector<std::vector<double>> queries(int dims) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> g(0, 2);
  std::vector<std::vector<double>> q(100, std::vector<double>(dims));
  for (auto& v : q)
    for (auto& x : v) x = g(rng);
  return q;
}

}  // namespace

class ModelRoundTrip : public ::testing::TestWithParam<Preset> {};

TEST_P(ModelRoundTrip, IdenticalDecisions) {
  foldscan::testing::TempDir dir("model");
  const auto data = training_data(5);
  TrainOptions opts;
  opts.balance_classes = true;
  const Model m = train_preset(GetParam(), data, opts);
  save_model(m, dir / "m.json");
  const Model back = load_model(dir / "m.json");
  EXPECT_EQ(model_kind(back), model_kind(m));
  EXPECT_EQ(model_dimension(back), 5u);
  for (const auto& q : queries(5)) {
    EXPECT_EQ(decision(back, q), decision(m, q));
    EXPECT_EQ(predict(back, q), predict(m, q));
  }
  EXPECT_EQ(model_to_json(back), model_to_json(m));
}

INSTANTIATE_TEST_SUITE_P(AllPresets, ModelRoundTrip, ::testing::ValuesIn(all_presets()),
                         [](const auto& info) {
                           std::string s = to_string(info.param);
                           for (auto& c : s)
                             if (c == '-') c = '_';
                           return s;
                         });

TEST(ModelFile, SelfDescribing) {
  const Model m = train_preset(Preset::svm_gaussian, training_data(3));
  const auto j = model_to_json(m);
  EXPECT_EQ(j.at("kind"), "svm");
  EXPECT_EQ(j.at("version"), kModelFormatVersion);
  EXPECT_TRUE(j.contains("standardization"));
  EXPECT_TRUE(j.contains("hyperparameters"));
  EXPECT_TRUE(j.contains("parameters"));
  EXPECT_EQ(model_kind(train_preset(Preset::knn_cosine, training_data(3))), "knn");
  EXPECT_EQ(model_kind(train_preset(Preset::tree_coarse, training_data(3))), "tree");
}

TEST(ModelFile, UnknownKindRejected) {
  auto j = model_to_json(train_preset(Preset::knn_fine, training_data(2)));
  j["kind"] = "forest";
  EXPECT_THROW(model_from_json(j), Error);
}

TEST(ModelFile, VersionMismatchRejected) {
  auto j = model_to_json(train_preset(Preset::tree_fine, training_data(2)));
  j["version"] = kModelFormatVersion + 1;
  EXPECT_THROW(model_from_json(j), Error);
}

TEST(ModelFile, TruncatedFileRejected) {
  foldscan::testing::TempDir dir("model");
  save_model(train_preset(Preset::svm_quadratic, training_data(4)), dir / "m.json");
  std::string text;
  {
    std::ifstream in(dir / "m.json");
    text.assign(std::istreambuf_iterator<char>(in), {});
  }
  std::ofstream(dir / "cut.json") << text.substr(0, text.size() / 2);
  EXPECT_THROW(load_model(dir / "cut.json"), Error);
  EXPECT_THROW(load_model(dir / "absent.json"), Error);
}

TEST(ModelFile, MalformedFieldsRejected) {
  auto j = model_to_json(train_preset(Preset::svm_quadratic, training_data(2)));
  j["parameters"]["support_vectors"][0]["alpha"] = -1.0;
  EXPECT_THROW(model_from_json(j), Error);

  auto t = model_to_json(train_preset(Preset::tree_fine, training_data(2)));
  t["parameters"]["nodes"][0]["left"] = 999;
  EXPECT_THROW(model_from_json(t), Error);

  auto k = model_to_json(train_preset(Preset::knn_fine, training_data(2)));
  k["hyperparameters"]["metric"] = "manhattan";
  EXPECT_THROW(model_from_json(k), Error);
}

TEST(Presets, NamesRoundTrip) {
  for (Preset p : all_presets()) EXPECT_EQ(parse_preset(to_string(p)), p);
  EXPECT_EQ(all_presets().size(), 6u);
  EXPECT_THROW(parse_preset("svm-linear"), std::invalid_argument);
}

TEST(Presets, Hyperparameters) {
  const auto data = training_data(9);
  const auto q = std::get<SvmModel>(train_preset(Preset::svm_quadratic, data));
  EXPECT_EQ(q.kernel_spec.kind, KernelKind::quadratic);
  EXPECT_DOUBLE_EQ(q.kernel_spec.offset, 1.0);
  EXPECT_DOUBLE_EQ(q.kernel_spec.scale, 1.0);
  EXPECT_DOUBLE_EQ(q.C, 1.0);
  const auto g = std::get<SvmModel>(train_preset(Preset::svm_gaussian, data));
  EXPECT_DOUBLE_EQ(g.kernel_spec.scale, 3.0);
  EXPECT_EQ(std::get<KnnModel>(train_preset(Preset::knn_fine, data)).k, 1u);
  const auto c = std::get<KnnModel>(train_preset(Preset::knn_cosine, data));
  EXPECT_EQ(c.k, 10u);
  EXPECT_EQ(c.metric, Metric::cosine);
  EXPECT_EQ(std::get<TreeModel>(train_preset(Preset::tree_fine, data)).max_splits, 100u);
  EXPECT_EQ(std::get<TreeModel>(train_preset(Preset::tree_coarse, data)).max_splits, 4u);
}

TEST(Presets, DimensionMismatchOnDecision) {
  const Model m = train_preset(Preset::knn_fine, training_data(3));
  EXPECT_THROW(decision(m, std::vector<double>{1, 2}), std::invalid_argument);
}
