#include "msast/data/dataset.hpp"

#include <optional>
#include <set>

#include "msast/data/feature_io.hpp"
#include "msast/data/text_io.hpp"
#include "msast/errors.hpp"

namespace msast::data {

namespace fs = std::filesystem;

fs::path DatasetManifest::feature_path(const std::string& id) const {
  return features_dir / (id + ".msfeat");
}

fs::path DatasetManifest::label_path(const std::string& id) const {
  return labels_dir / (id + ".txt");
}

const std::vector<std::string>& DatasetManifest::split(const std::string& name) const {
  if (name == "train") return train_ids;
  if (name == "test") return test_ids;
  throw ConfigError("unknown split '" + name + "' (expected train or test)");
}

fs::path DatasetManifest::mapping_path(const fs::path& root) { return root / "mapping.txt"; }

fs::path DatasetManifest::split_path(const fs::path& root, const std::string& name) {
  return root / "splits" / (name + ".txt");
}

DatasetManifest load_manifest(const fs::path& root) {
  DatasetManifest m;
  m.root = root;
  m.features_dir = root / "features";
  m.labels_dir = root / "labels";
  m.class_names = read_mapping(DatasetManifest::mapping_path(root).string());
  m.train_ids = read_split(DatasetManifest::split_path(root, "train").string());
  m.test_ids = read_split(DatasetManifest::split_path(root, "test").string());
  return m;
}

void write_manifest(const DatasetManifest& m) {
  std::error_code ec;
  fs::create_directories(m.root / "splits", ec);
  fs::create_directories(m.features_dir, ec);
  fs::create_directories(m.labels_dir, ec);
  if (ec) throw IoError("cannot create dataset directories under " + m.root.string());
  write_mapping(DatasetManifest::mapping_path(m.root).string(), m.class_names);
  write_split(DatasetManifest::split_path(m.root, "train").string(), m.train_ids);
  write_split(DatasetManifest::split_path(m.root, "test").string(), m.test_ids);
}

std::vector<VideoSample> load_split(const DatasetManifest& manifest, const std::string& split) {
  std::vector<VideoSample> out;
  for (const auto& id : manifest.split(split)) {
    VideoSample v;
    v.id = id;
    v.features = read_feature_file(manifest.feature_path(id).string());
    v.labels = read_labels(manifest.label_path(id).string(), v.features.rows());
    for (std::size_t t = 0; t < v.labels->size(); ++t)
      if ((*v.labels)[t] >= manifest.num_classes())
        throw DataError(manifest.label_path(id).string() + ": class id " +
                        std::to_string((*v.labels)[t]) + " at frame " + std::to_string(t) +
                        " is not in the mapping");
    out.push_back(std::move(v));
  }
  return out;
}

ValidationReport validate_dataset(const DatasetManifest& manifest) {
  ValidationReport rep;
  auto add = [&](std::string s) { rep.violations.push_back(std::move(s)); };
  if (manifest.class_names.empty()) add("class mapping is empty");

  std::set<std::string> seen;
  std::optional<std::pair<std::string, std::size_t>> reference_dim;
  for (const char* split : {"train", "test"}) {
    for (const auto& id : manifest.split(split)) {
      if (!seen.insert(id).second) {
        add("video " + id + ": listed more than once across splits");
        continue;
      }
      FeatureSequence f;
      try {
        f = read_feature_file(manifest.feature_path(id).string());
      } catch (const Error& e) {
        add("video " + id + ": " + e.what());
        continue;
      }
      if (!reference_dim) {
        reference_dim.emplace(id, f.cols());
      } else if (f.cols() != reference_dim->second) {
        add("video " + id + ": feature dim " + std::to_string(f.cols()) + " differs from dim " +
            std::to_string(reference_dim->second) + " of video " + reference_dim->first);
      }
      try {
        const auto labels = read_labels(manifest.label_path(id).string(), f.rows());
        for (std::size_t t = 0; t < labels.size(); ++t) {
          if (labels[t] >= manifest.num_classes()) {
            add("video " + id + ": class id " + std::to_string(labels[t]) + " at frame " +
                std::to_string(t) + " is not in the mapping");
            break;
          }
        }
      } catch (const Error& e) {
        add("video " + id + ": " + e.what());
      }
    }
  }
  return rep;
}

}  // namespace msast::data
