#include "msast/data/synthetic.hpp"

#include <cmath>
#include <random>
#include <string>

#include "msast/data/feature_io.hpp"
#include "msast/data/text_io.hpp"
#include "msast/errors.hpp"

namespace msast::data {

void SynthConfig::validate() const {
  std::string msg;
  auto prob = [&](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) msg += std::string("\n  - ") + name + " must be in [0, 1]";
  };
  if (num_classes < 1) msg += "\n  - num_classes must be >= 1";
  if (num_videos < 1) msg += "\n  - num_videos must be >= 1";
  if (min_frames < 10) msg += "\n  - min_frames must be >= 10";
  if (max_frames < min_frames) msg += "\n  - max_frames must be >= min_frames";
  if (feature_dim < 2) msg += "\n  - feature_dim must be >= 2";
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
    msg += "\n  - noise_sigma must be a finite value >= 0";
  prob(self_transition_prob, "self_transition_prob");
  prob(skip_prob, "skip_prob");
  prob(train_fraction, "train_fraction");
  if (!msg.empty()) throw ConfigError("invalid synthetic config:" + msg);
}

std::vector<std::string> default_class_names(std::uint32_t num_classes) {
  if (num_classes == 7)
    return {"Preparation",          "CalotTriangleDissection", "ClippingCutting",
            "GallbladderDissection", "GallbladderPackaging",    "CleaningCoagulation",
            "GallbladderRetraction"};
  std::vector<std::string> names;
  for (std::uint32_t c = 0; c < num_classes; ++c) names.push_back("phase" + std::to_string(c));
  return names;
}

SyntheticDataset generate_synthetic(const SynthConfig& cfg, const std::filesystem::path& root) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  SyntheticDataset ds;
  const std::uint32_t nc = cfg.num_classes;
  const std::uint32_t dim = cfg.feature_dim;
  ds.class_means = Matrix(nc, dim);
  const double min_dist = 4.0 * cfg.noise_sigma;
  constexpr int kMaxAttempts = 10000;
  for (std::uint32_t c = 0; c < nc; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
      for (std::uint32_t d = 0; d < dim; ++d) ds.class_means(c, d) = static_cast<float>(normal(rng));
      placed = true;
      for (std::uint32_t o = 0; o < c && placed; ++o) {
        double sq = 0.0;
        for (std::uint32_t d = 0; d < dim; ++d) {
          const double diff = double{ds.class_means(c, d)} - ds.class_means(o, d);
          sq += diff * diff;
        }
        placed = std::sqrt(sq) >= min_dist;
      }
    }
    if (!placed)
      throw ConfigError("cannot place class means " + std::to_string(min_dist) +
                        " apart in dimension " + std::to_string(dim) + "; lower noise_sigma");
  }

  const std::size_t width = std::max<std::size_t>(2, std::to_string(cfg.num_videos).size());
  const auto n_train = static_cast<std::uint32_t>(std::lround(cfg.train_fraction * cfg.num_videos));
  std::uniform_int_distribution<std::uint32_t> length(cfg.min_frames, cfg.max_frames);

  for (std::uint32_t v = 0; v < cfg.num_videos; ++v) {
    std::string num = std::to_string(v + 1);
    VideoSample s;
    s.id = "video" + std::string(width - num.size(), '0') + num;
    const std::uint32_t t_len = length(rng);
    LabelSequence labels(t_len);
    std::uint32_t phase = 0;
    for (std::uint32_t t = 0; t < t_len; ++t) {
      if (t > 0 && uni(rng) >= cfg.self_transition_prob) {
        const bool skip = uni(rng) < cfg.skip_prob;
        if (skip && phase + 2 < nc) {
          phase += 2;
        } else if (phase + 1 < nc) {
          phase += 1;
        }
      }
      labels[t] = phase;
    }
    s.features = FeatureSequence(t_len, dim);
    for (std::uint32_t t = 0; t < t_len; ++t)
      for (std::uint32_t d = 0; d < dim; ++d)
        s.features(t, d) = static_cast<float>(ds.class_means(labels[t], d) +
                                              cfg.noise_sigma * normal(rng));
    s.labels = std::move(labels);
    (v < n_train ? ds.manifest.train_ids : ds.manifest.test_ids).push_back(s.id);
    (v < n_train ? ds.train : ds.test).push_back(std::move(s));
  }

  ds.manifest.root = root;
  ds.manifest.features_dir = root / "features";
  ds.manifest.labels_dir = root / "labels";
  ds.manifest.class_names = default_class_names(nc);
  return ds;
}

void write_dataset(const SyntheticDataset& dataset) {
  const DatasetManifest& m = dataset.manifest;
  if (m.root.empty()) throw IoError("write_dataset: dataset has no root directory");
  write_manifest(m);
  for (const auto* split : {&dataset.train, &dataset.test}) {
    for (const auto& v : *split) {
      write_feature_file(m.feature_path(v.id).string(), v.features);
      write_labels(m.label_path(v.id).string(), *v.labels);
    }
  }
}

}  // namespace msast::data
