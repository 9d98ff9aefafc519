#include "foldscan/dataset.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "foldscan/error.hpp"
#include "foldscan/parallel.hpp"
#include "foldscan/patch_pipeline.hpp"

namespace foldscan {

void DatasetManifest::validate() const {
  std::set<std::string> seen;
  for (const auto& e : entries) {
    if (!seen.insert(e.path.lexically_normal().string()).second)
      throw Error("manifest lists '" + e.path.string() + "' more than once");
    if (e.label != Label::folded && e.label != Label::normal)
      throw Error("manifest entry '" + e.path.string() + "' must be labeled folded or normal");
    if (e.source_id.empty())
      throw Error("manifest entry '" + e.path.string() + "' has an empty source_id");
  }
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed manifest '" + path.string() + "': " + e.what());
  }
  if (!j.is_object() || !j.contains("entries") || !j["entries"].is_array())
    throw Error("manifest '" + path.string() + "' lacks an \"entries\" array");

  DatasetManifest m;
  m.magnification = j.value("magnification", "");
  const auto base = path.parent_path();
  std::size_t index = 0;
  for (const auto& e : j["entries"]) {
    const std::string where = "manifest entry " + std::to_string(index++);
    if (!e.is_object() || !e.contains("path") || !e["path"].is_string() || !e.contains("label") ||
        !e["label"].is_string())
      throw Error(where + " needs string fields \"path\" and \"label\"");
    ManifestEntry entry;
    std::filesystem::path p = e["path"].get<std::string>();
    entry.path = p.is_absolute() ? p : base / p;
    const auto label = parse_label(e["label"].get<std::string>());
    if (!label) throw Error(where + " has unknown label '" + e["label"].get<std::string>() + "'");
    entry.label = *label;
    entry.source_id = e.value("source_id", "");
    m.entries.push_back(std::move(entry));
  }
  m.validate();
  return m;
}

void ingest_dataset(const DatasetManifest& manifest, bool augment_flag, const PatchSink& sink,
                    unsigned jobs) {
  manifest.validate();
  const std::size_t batch = resolve_jobs(jobs);
  const auto& entries = manifest.entries;
  for (std::size_t start = 0; start < entries.size(); start += batch) {
    const std::size_t count = std::min(batch, entries.size() - start);
    std::vector<std::vector<Patch>> loaded(count);
    parallel_for(count, jobs, [&](std::size_t i) {
      const auto& entry = entries[start + i];
      Patch p;
      try {
        p = load_image(entry.path);
      } catch (const Error& e) {
        throw Error("cannot ingest '" + entry.path.string() + "': " + e.what());
      }
      p.source_id = entry.source_id;
      if (augment_flag)
        loaded[i] = augment(p);
      else
        loaded[i].push_back(std::move(p));
    });
    for (std::size_t i = 0; i < count; ++i)
      for (auto& p : loaded[i]) sink(LabeledPatch{std::move(p), entries[start + i].label});
  }
}

std::vector<LabeledPatch> ingest_dataset(const DatasetManifest& manifest, bool augment_flag,
                                         unsigned jobs) {
  std::vector<LabeledPatch> out;
  ingest_dataset(manifest, augment_flag, [&](LabeledPatch&& p) { out.push_back(std::move(p)); },
                 jobs);
  return out;
}

}  // namespace foldscan
