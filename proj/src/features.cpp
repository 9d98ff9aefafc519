#include "foldscan/features.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "foldscan/error.hpp"

namespace foldscan {

namespace {

constexpr std::size_t kLeadingColumns = 3;

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

void check_text_field(const std::string& s, const char* what) {
  if (s.find_first_of(",\"\r\n") != std::string::npos)
    throw Error(std::string(what) + " '" + s + "' contains a character that cannot be stored in CSV");
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::size_t uniform_dimension(std::span<const FeatureVector> vs) {
  if (vs.empty()) throw Error("empty feature collection");
  const std::size_t d = vs.front().values.size();
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (vs[i].values.size() != d)
      throw Error("feature vector " + std::to_string(i) + " has dimension " +
                  std::to_string(vs[i].values.size()) + ", expected " + std::to_string(d));
    for (double v : vs[i].values)
      if (!std::isfinite(v)) throw Error("feature vector " + std::to_string(i) + " is not finite");
  }
  return d;
}

void write_features_csv(std::span<const FeatureVector> vs, std::ostream& out) {
  const std::size_t d = vs.empty() ? 0 : uniform_dimension(vs);
  out << "source_id,augmentation,label";
  for (std::size_t i = 0; i < d; ++i) out << ",f" << i;
  out << '\n';
  for (const auto& v : vs) {
    check_text_field(v.source_id, "source_id");
    check_text_field(v.augmentation, "augmentation");
    out << v.source_id << ',' << v.augmentation << ',' << to_string(v.label);
    for (double x : v.values) out << ',' << format_double(x);
    out << '\n';
  }
}

std::vector<FeatureVector> read_features_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("feature table is empty (missing header)");
  const auto header = split(line);
  if (header.size() < kLeadingColumns || header[0] != "source_id" ||
      header[1] != "augmentation" || header[2] != "label")
    throw Error("feature table header must start with source_id,augmentation,label");
  const std::size_t d = header.size() - kLeadingColumns;
  for (std::size_t i = 0; i < d; ++i)
    if (header[kLeadingColumns + i] != "f" + std::to_string(i))
      throw Error("feature table header column " + std::to_string(kLeadingColumns + i + 1) +
                  " should be f" + std::to_string(i));

  std::vector<FeatureVector> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line);
    const std::string where = "line " + std::to_string(line_no);
    if (fields.size() != header.size())
      throw Error(where + ": expected " + std::to_string(header.size()) + " fields, found " +
                  std::to_string(fields.size()));
    FeatureVector v;
    v.source_id = std::string(fields[0]);
    v.augmentation = std::string(fields[1]);
    const auto label = parse_label(fields[2]);
    if (!label) throw Error(where + ": unknown label '" + std::string(fields[2]) + "'");
    v.label = *label;
    v.values.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
      const auto f = fields[kLeadingColumns + i];
      const auto res = std::from_chars(f.data(), f.data() + f.size(), v.values[i]);
      if (res.ec != std::errc() || res.ptr != f.data() + f.size() || !std::isfinite(v.values[i]))
        throw Error(where + ": bad value '" + std::string(f) + "' in column f" + std::to_string(i));
    }
    out.push_back(std::move(v));
  }
  return out;
}

void export_features(std::span<const FeatureVector> vs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write feature table '" + path.string() + "'");
  write_features_csv(vs, out);
  if (!out) throw Error("failed writing feature table '" + path.string() + "'");
}

std::vector<FeatureVector> import_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open feature table '" + path.string() + "'");
  try {
    return read_features_csv(in);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

}  // namespace foldscan
