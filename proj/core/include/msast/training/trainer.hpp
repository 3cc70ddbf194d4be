#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "msast/data/dataset.hpp"
#include "msast/model/model.hpp"
#include "msast/training/adam.hpp"
#include "msast/training/loss.hpp"

namespace msast::training {

struct TrainConfig {
  std::uint32_t epochs = 200;
  double learning_rate = 1e-4;
  double smooth_tau = 4.0;
  double smooth_lambda = 0.15;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
  AdamConfig adam() const { return {learning_rate, beta1, beta2, adam_epsilon}; }
  LossConfig loss() const { return {smooth_tau, smooth_lambda}; }
};

struct EpochRecord {
  std::uint32_t epoch = 0;
  double loss = 0.0;      // mean total loss over videos
  double accuracy = 0.0;  // percent, final stage of the training passes
};

struct TrainingHistory {
  std::vector<EpochRecord> epochs;

  // "epoch <n> loss <float> acc <float>" per line.
  std::string to_text() const;
  static std::string format(const EpochRecord& r);
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Trains with batch size one video, visiting videos in a per-epoch shuffled
/// order. Dropout masks and the shuffle draw from one generator seeded with
/// cfg.seed, so (model, data, cfg) fully determine the result.
/// Throws NumericError naming the epoch and video on a non-finite loss.
TrainingHistory train(model::Model<float>& model, AdamState<float>& adam,
                      std::span<const data::VideoSample> videos, const TrainConfig& cfg,
                      const EpochCallback& on_epoch = {});

}  // namespace msast::training
