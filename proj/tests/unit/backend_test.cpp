#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "foldscan/backend.hpp"
#include "foldscan/error.hpp"
#include "foldscan/onnx_signature.hpp"

using namespace foldscan;
using foldscan::testing::data_dir;

namespace {

BackendConfig config_for(const std::string& output, double mean = 0.0, double scale = 1.0) {
  BackendConfig c;
  c.embedding_output = output;
  c.preprocessing.mean = {mean, mean, mean};
  c.preprocessing.scale = {scale, scale, scale};
  return c;
}

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

Patch random_patch(int w, int h, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> u(0, 255);
  Patch p(w, h);
  for (std::size_t i = 0; i < p.sample_count(); ++i) p.data()[i] = static_cast<std::uint8_t>(u(rng));
  return p;
}

}  // namespace

TEST(OnnxSignature, ReadsToyGraph) {
  const auto sig = read_onnx_signature(data_dir() / "toy_identity.onnx");
  ASSERT_EQ(sig.inputs.size(), 1u);
  EXPECT_EQ(sig.inputs[0].name, "input");
  EXPECT_EQ(sig.inputs[0].dims, (std::vector<std::int64_t>{1, 3, 2, 2}));
  ASSERT_EQ(sig.outputs.size(), 1u);
  EXPECT_EQ(sig.outputs[0].name, "embedding");
  EXPECT_EQ(sig.outputs[0].dims, (std::vector<std::int64_t>{1, 12}));
  EXPECT_EQ(sig.node_outputs, (std::vector<std::string>{"stage", "embedding"}));
}

TEST(OnnxSignature, RejectsGarbage) {
  EXPECT_THROW(parse_onnx_signature(std::string("\xff\xff\xff\xff\xff\xff", 6)), Error);
  EXPECT_THROW(read_onnx_signature(data_dir() / "nope.onnx"), Error);
}

TEST(OnnxBackend, IdentityDimensionAndValues) {
  const auto b = OnnxBackend::load(data_dir() / "toy_identity.onnx", config_for("embedding", 10.0, 2.0));
  EXPECT_EQ(b->dimension(), 12u);
  EXPECT_EQ(b->input_size(), (InputSize{2, 2}));
  const Patch p = random_patch(2, 2, 1);
  const auto v = b->embed_resized(p);
  const auto expected = preprocess(p, config_for("embedding", 10.0, 2.0).preprocessing);
  ASSERT_EQ(v.size(), expected.size());
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_DOUBLE_EQ(v[i], expected[i]);
  // NCHW: the second plane is green.
  EXPECT_DOUBLE_EQ(v[4], (p.at(0, 0, 1) - 10.0) / 2.0);
}

TEST(OnnxBackend, ZeroPatchGivesNegatedMeanOverScale) {
  BackendConfig c = config_for("embedding");
  c.preprocessing.mean = {10.0, 20.0, 30.0};
  c.preprocessing.scale = {2.0, 4.0, 5.0};
  const auto b = OnnxBackend::load(data_dir() / "toy_identity.onnx", c);
  const auto v = b->embed_resized(Patch(2, 2));
  for (int ch = 0; ch < 3; ++ch)
    for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(v[ch * 4 + i], -c.preprocessing.mean[ch] / c.preprocessing.scale[ch]);
}

TEST(OnnxBackend, BgrOrderSwapsPlanes) {
  BackendConfig c = config_for("embedding");
  c.preprocessing.order = ChannelOrder::bgr;
  const auto b = OnnxBackend::load(data_dir() / "toy_identity.onnx", c);
  const auto v = b->embed_resized(Patch::filled(2, 2, 1, 2, 3));
  EXPECT_DOUBLE_EQ(v[0], 3.0);
  EXPECT_DOUBLE_EQ(v[8], 1.0);
}

TEST(OnnxBackend, MissingOutputListsAvailable) {
  const std::string msg =
      error_of([] { OnnxBackend::load(data_dir() / "toy_identity.onnx", config_for("logits")); });
  EXPECT_NE(msg.find("logits"), std::string::npos) << msg;
  EXPECT_NE(msg.find("embedding"), std::string::npos) << msg;
  EXPECT_NE(msg.find("stage"), std::string::npos) << msg;
}

TEST(OnnxBackend, IntermediateNonVectorRejected) {
  const std::string msg =
      error_of([] { OnnxBackend::load(data_dir() / "toy_identity.onnx", config_for("stage")); });
  EXPECT_NE(msg.find("not a vector"), std::string::npos) << msg;
}

TEST(OnnxBackend, IntermediateVectorAccepted) {
  const auto b = OnnxBackend::load(data_dir() / "toy_meanpool.onnx", config_for("pooled", 0.0, 255.0));
  EXPECT_EQ(b->dimension(), 3u);
  const auto v = extract(*b, Patch::filled(8, 8, 255, 0, 51));
  EXPECT_NEAR(v.values[0], 1.0, 1e-6);
  EXPECT_NEAR(v.values[1], 0.0, 1e-6);
  EXPECT_NEAR(v.values[2], 0.2, 1e-6);
}

TEST(OnnxBackend, MissingModelFile) {
  const std::string msg = error_of([] { OnnxBackend::load("/nonexistent/model.onnx", config_for("x")); });
  EXPECT_NE(msg.find("/nonexistent/model.onnx"), std::string::npos) << msg;
}

TEST(OnnxBackend, SidecarSizeMustAgree) {
  BackendConfig c = config_for("embedding");
  c.input_size = InputSize{4, 4};
  const std::string msg = error_of([&] { OnnxBackend::load(data_dir() / "toy_identity.onnx", c); });
  EXPECT_NE(msg.find("disagrees"), std::string::npos) << msg;
  c.input_size = InputSize{2, 2};
  EXPECT_NO_THROW(OnnxBackend::load(data_dir() / "toy_identity.onnx", c));
}

TEST(Sidecar, LoadsAndValidates) {
  foldscan::testing::TempDir dir("sidecar");
  foldscan::testing::write_meanpool_backend(dir.path());
  const auto c = load_sidecar(sidecar_path(dir / "toy_meanpool.onnx"));
  EXPECT_EQ(c.embedding_output, "embedding");
  EXPECT_EQ(c.preprocessing.scale, (std::array<double, 3>{255, 255, 255}));
  EXPECT_EQ(sidecar_path("/a/b/m.onnx"), std::filesystem::path("/a/b/m.meta.json"));

  std::ofstream(dir / "bad.meta.json") << R"({"embedding_output":"e","scale":[1,0,1]})";
  EXPECT_THROW(load_sidecar(dir / "bad.meta.json"), Error);
  std::ofstream(dir / "arr.meta.json")
      << R"({"embedding_output":"e","mean":[1,2,3],"scale":[4,5,6],"channel_order":"bgr","input_width":8,"input_height":8})";
  const auto a = load_sidecar(dir / "arr.meta.json");
  EXPECT_EQ(a.preprocessing.mean, (std::array<double, 3>{1, 2, 3}));
  EXPECT_EQ(a.preprocessing.order, ChannelOrder::bgr);
  ASSERT_TRUE(a.input_size.has_value());
  EXPECT_EQ(*a.input_size, (InputSize{8, 8}));
  std::ofstream(dir / "noout.meta.json") << R"({"mean":0})";
  EXPECT_THROW(load_sidecar(dir / "noout.meta.json"), Error);
  EXPECT_THROW(load_sidecar(dir / "absent.meta.json"), Error);
}

TEST(Extract, DeterministicAndOrderPreserving) {
  foldscan::testing::TempDir dir("extract");
  foldscan::testing::write_meanpool_backend(dir.path());
  const auto b = OnnxBackend::load(dir / "toy_meanpool.onnx");
  std::vector<Patch> patches;
  for (int i = 0; i < 20; ++i) {
    Patch p = random_patch(20 + i, 16, i);
    p.source_id = "p" + std::to_string(i);
    patches.push_back(p);
  }
  const auto serial = extract_batch(*b, patches, 1);
  const auto parallel = extract_batch(*b, patches, 4);
  ASSERT_EQ(serial.size(), 20u);
  EXPECT_EQ(serial, parallel);
  for (std::size_t i = 0; i < patches.size(); ++i) {
    EXPECT_EQ(serial[i].source_id, patches[i].source_id);
    EXPECT_EQ(serial[i].values, extract(*b, patches[i]).values);
    EXPECT_EQ(serial[i].label, Label::unknown);
  }
  EXPECT_TRUE(extract_batch(*b, std::span<const Patch>{}, 2).empty());
}

namespace {

class FailingEmbedder final : public Embedder {
 public:
  std::size_t dimension() const override { return 1; }
  InputSize input_size() const override { return {1, 1}; }
  std::vector<double> embed_resized(const Patch& p) const override {
    if (p.at(0, 0, 0) == 7) throw Error("boom");
    return {1.0};
  }
};

}  // namespace

TEST(Extract, FailureNamesPatchIndex) {
  std::vector<Patch> patches(5, Patch::filled(3, 3, 0, 0, 0));
  patches[3] = Patch::filled(3, 3, 7, 7, 7);
  FailingEmbedder e;
  const std::string msg = error_of([&] { extract_batch(e, patches, 2); });
  EXPECT_NE(msg.find("patch 3"), std::string::npos) << msg;
}
