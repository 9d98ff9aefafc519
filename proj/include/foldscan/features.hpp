#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "foldscan/labels.hpp"

namespace foldscan {

struct FeatureVector {
  std::vector<double> values;
  Label label = Label::unknown;
  std::string source_id;
  std::string augmentation;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

// Common length of all vectors; throws Error on mixed lengths, non-finite
// values or an empty collection.
std::size_t uniform_dimension(std::span<const FeatureVector> vs);

// CSV with header source_id,augmentation,label,f0..f{D-1}. Values use the
// shortest representation that parses back to the same double.
void export_features(std::span<const FeatureVector> vs, const std::filesystem::path& path);
std::vector<FeatureVector> import_features(const std::filesystem::path& path);

// A header-only file carries no dimension, so export of an empty
// collection writes just the three leading columns.
void write_features_csv(std::span<const FeatureVector> vs, std::ostream& out);
std::vector<FeatureVector> read_features_csv(std::istream& in);

}  // namespace foldscan
