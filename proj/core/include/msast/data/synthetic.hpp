#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "msast/data/dataset.hpp"

namespace msast::data {

/// Desk-scale stand-in for a surgical-phase corpus: left-to-right phase chains
/// over class means plus Gaussian noise.
struct SynthConfig {
  std::uint32_t num_classes = 7;
  std::uint32_t num_videos = 50;
  std::uint32_t min_frames = 200;
  std::uint32_t max_frames = 400;
  std::uint32_t feature_dim = 64;
  double noise_sigma = 1.0;
  double self_transition_prob = 0.98;
  double skip_prob = 0.05;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticDataset {
  DatasetManifest manifest;
  std::vector<VideoSample> train;
  std::vector<VideoSample> test;
  Matrix class_means;  // num_classes x feature_dim
};

/// Pure function of `cfg`. Class means are standard-normal vectors redrawn
/// until every pair is at least 4 * noise_sigma apart. Each video starts in
/// phase 0; per frame it stays with self_transition_prob, otherwise jumps two
/// phases with skip_prob (when possible) or one. The first
/// round(train_fraction * num_videos) videos form the train split.
SyntheticDataset generate_synthetic(const SynthConfig& cfg,
                                    const std::filesystem::path& root = {});

/// Writes the manifest, feature files and label files under manifest.root.
void write_dataset(const SyntheticDataset& dataset);

/// Cholec80-style phase names for 7 classes, "phase<k>" otherwise.
std::vector<std::string> default_class_names(std::uint32_t num_classes);

}  // namespace msast::data
