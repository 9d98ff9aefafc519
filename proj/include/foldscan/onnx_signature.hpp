#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace foldscan {

// Declared tensor of an ONNX graph. Dimension value -1 marks a symbolic or
// missing extent.
struct OnnxTensorInfo {
  std::string name;
  std::vector<std::int64_t> dims;
};

struct OnnxSignature {
  std::vector<OnnxTensorInfo> inputs;   // graph inputs minus initializers
  std::vector<OnnxTensorInfo> outputs;  // declared graph outputs
  std::vector<std::string> node_outputs;
};

// Parses just enough of the ModelProto wire format to recover graph inputs,
// outputs and node output names. Throws Error on malformed data.
OnnxSignature read_onnx_signature(const std::filesystem::path& path);
OnnxSignature parse_onnx_signature(const std::string& bytes);

}  // namespace foldscan
