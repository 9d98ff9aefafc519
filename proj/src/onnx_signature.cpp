#include "foldscan/onnx_signature.hpp"

#include <fstream>
#include <iterator>
#include <set>
#include <string_view>

#include "foldscan/error.hpp"

namespace foldscan {

namespace {

// Protobuf wire-format cursor over a length-delimited region.
class Reader {
 public:
  explicit Reader(std::string_view bytes) : data_(bytes) {}

  bool done() const { return pos_ >= data_.size(); }

  std::uint64_t varint() {
    std::uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 7) {
      if (pos_ >= data_.size()) throw Error("truncated varint in ONNX model");
      const auto byte = static_cast<std::uint8_t>(data_[pos_++]);
      v |= static_cast<std::uint64_t>(byte & 0x7f) << shift;
      if ((byte & 0x80) == 0) return v;
    }
    throw Error("overlong varint in ONNX model");
  }

  std::string_view bytes() {
    const auto len = varint();
    if (len > data_.size() - pos_) throw Error("truncated field in ONNX model");
    const auto out = data_.substr(pos_, len);
    pos_ += len;
    return out;
  }

  void skip(int wire_type) {
    switch (wire_type) {
      case 0: varint(); break;
      case 1: advance(8); break;
      case 2: bytes(); break;
      case 5: advance(4); break;
      default: throw Error("unsupported wire type " + std::to_string(wire_type) + " in ONNX model");
    }
  }

  // Returns false at end of input.
  bool next(int& field, int& wire_type) {
    if (done()) return false;
    const auto key = varint();
    field = static_cast<int>(key >> 3);
    wire_type = static_cast<int>(key & 7);
    return true;
  }

 private:
  void advance(std::size_t n) {
    if (n > data_.size() - pos_) throw Error("truncated field in ONNX model");
    pos_ += n;
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

// Visits every length-delimited occurrence of `wanted`; other fields are skipped.
template <typename Fn>
void for_each_message(std::string_view msg, int wanted, Fn&& fn) {
  Reader r(msg);
  int field = 0, wt = 0;
  while (r.next(field, wt)) {
    if (field == wanted && wt == 2)
      fn(r.bytes());
    else
      r.skip(wt);
  }
}

std::vector<std::int64_t> parse_shape(std::string_view shape) {
  // TensorShapeProto.dim = 1; Dimension.dim_value = 1, dim_param = 2.
  std::vector<std::int64_t> dims;
  for_each_message(shape, 1, [&](std::string_view dim) {
    std::int64_t value = -1;
    Reader r(dim);
    int field = 0, wt = 0;
    while (r.next(field, wt)) {
      if (field == 1 && wt == 0)
        value = static_cast<std::int64_t>(r.varint());
      else
        r.skip(wt);
    }
    dims.push_back(value);
  });
  return dims;
}

OnnxTensorInfo parse_value_info(std::string_view vi) {
  // ValueInfoProto.name = 1, type = 2; TypeProto.tensor_type = 1;
  // TypeProto.Tensor.shape = 2.
  OnnxTensorInfo info;
  Reader r(vi);
  int field = 0, wt = 0;
  while (r.next(field, wt)) {
    if (field == 1 && wt == 2) {
      info.name = std::string(r.bytes());
    } else if (field == 2 && wt == 2) {
      for_each_message(r.bytes(), 1, [&](std::string_view tensor) {
        for_each_message(tensor, 2, [&](std::string_view shape) { info.dims = parse_shape(shape); });
      });
    } else {
      r.skip(wt);
    }
  }
  return info;
}

}  // namespace

OnnxSignature parse_onnx_signature(const std::string& model_bytes) {
  // ModelProto.graph = 7.
  std::string_view graph;
  bool found = false;
  for_each_message(model_bytes, 7, [&](std::string_view g) {
    graph = g;
    found = true;
  });
  if (!found) throw Error("ONNX model has no graph");

  OnnxSignature sig;
  std::set<std::string> initializers;
  std::vector<OnnxTensorInfo> declared_inputs;
  // GraphProto: node = 1, initializer = 5, input = 11, output = 12.
  Reader r(graph);
  int field = 0, wt = 0;
  while (r.next(field, wt)) {
    if (wt != 2) {
      r.skip(wt);
      continue;
    }
    const auto body = r.bytes();
    switch (field) {
      case 1:  // NodeProto.output = 2
        for_each_message(body, 2, [&](std::string_view out) { sig.node_outputs.emplace_back(out); });
        break;
      case 5:  // TensorProto.name = 8
        for_each_message(body, 8, [&](std::string_view name) { initializers.emplace(name); });
        break;
      case 11: declared_inputs.push_back(parse_value_info(body)); break;
      case 12: sig.outputs.push_back(parse_value_info(body)); break;
      default: break;
    }
  }
  for (auto& in : declared_inputs)
    if (!initializers.contains(in.name)) sig.inputs.push_back(std::move(in));
  return sig;
}

OnnxSignature read_onnx_signature(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open ONNX model '" + path.string() + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse_onnx_signature(bytes);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

}  // namespace foldscan
