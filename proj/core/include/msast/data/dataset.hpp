#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "msast/types.hpp"

namespace msast::data {

struct VideoSample {
  std::string id;
  FeatureSequence features;
  std::optional<LabelSequence> labels;
};

/// Paths and class mapping of a dataset tree:
///   <root>/features/<id>.msfeat
///   <root>/labels/<id>.txt
///   <root>/mapping.txt
///   <root>/splits/train.txt, <root>/splits/test.txt
struct DatasetManifest {
  std::filesystem::path root;
  std::filesystem::path features_dir;
  std::filesystem::path labels_dir;
  std::vector<std::string> class_names;  // index = class id
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;

  std::size_t num_classes() const { return class_names.size(); }
  std::filesystem::path feature_path(const std::string& id) const;
  std::filesystem::path label_path(const std::string& id) const;
  const std::vector<std::string>& split(const std::string& name) const;

  static std::filesystem::path mapping_path(const std::filesystem::path& root);
  static std::filesystem::path split_path(const std::filesystem::path& root,
                                          const std::string& name);
};

/// Reads mapping.txt and both split files under `root`. A missing split file
/// is an IoError.
DatasetManifest load_manifest(const std::filesystem::path& root);

/// Writes mapping and split files (directories are created).
void write_manifest(const DatasetManifest& manifest);

/// Loads every video of a split with its labels.
std::vector<VideoSample> load_split(const DatasetManifest& manifest, const std::string& split);

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks feature/label length agreement, label ids against the mapping,
/// consistent feature width across videos and readable files. Never throws on
/// data problems; every problem becomes one violation entry.
ValidationReport validate_dataset(const DatasetManifest& manifest);

}  // namespace msast::data
