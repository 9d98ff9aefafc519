#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "foldscan/image.hpp"
#include "foldscan/labels.hpp"

namespace foldscan {

struct ManifestEntry {
  std::filesystem::path path;
  Label label = Label::unknown;
  std::string source_id;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::string magnification;

  // Throws Error on duplicate paths, empty source ids or labels other than
  // folded/normal.
  void validate() const;
};

// Reads {"entries":[{"path","label","source_id"}], "magnification"?}.
// Relative paths are resolved against the manifest's directory.
DatasetManifest load_manifest(const std::filesystem::path& path);

struct LabeledPatch {
  Patch patch;
  Label label = Label::unknown;
};

using PatchSink = std::function<void(LabeledPatch&&)>;

// Loads every entry (and its 12 variants when augment is set) and hands them
// to sink in manifest order. Decoding and augmentation of up to `jobs`
// entries runs concurrently; delivery order does not depend on jobs.
// An unloadable entry throws Error naming its path.
void ingest_dataset(const DatasetManifest& manifest, bool augment, const PatchSink& sink,
                    unsigned jobs = 1);

std::vector<LabeledPatch> ingest_dataset(const DatasetManifest& manifest, bool augment,
                                         unsigned jobs = 1);

}  // namespace foldscan
