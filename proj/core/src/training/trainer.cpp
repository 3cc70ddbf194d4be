#include "msast/training/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "msast/errors.hpp"
#include "msast/model/forward.hpp"

namespace msast::training {

void TrainConfig::validate() const {
  std::string msg;
  if (epochs < 1) msg += "\n  - epochs must be >= 1";
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    msg += "\n  - learning_rate must be a finite value >= 0";
  if (!(smooth_tau > 0.0)) msg += "\n  - smooth_tau must be > 0";
  if (!(smooth_lambda >= 0.0)) msg += "\n  - smooth_lambda must be >= 0";
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    msg += "\n  - adam betas must be in [0, 1)";
  if (!msg.empty()) throw ConfigError("invalid train config:" + msg);
}

std::string TrainingHistory::format(const EpochRecord& r) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "epoch %u loss %.6f acc %.4f", r.epoch, r.loss, r.accuracy);
  return buf;
}

std::string TrainingHistory::to_text() const {
  std::string out;
  for (const auto& r : epochs) out += format(r) + "\n";
  return out;
}

TrainingHistory train(model::Model<float>& model, AdamState<float>& adam,
                      std::span<const data::VideoSample> videos, const TrainConfig& cfg,
                      const EpochCallback& on_epoch) {
  cfg.validate();
  if (videos.empty()) throw DataError("train: empty training set");
  for (const auto& v : videos) {
    if (!v.labels) throw DataError("train: video " + v.id + " has no labels");
    if (v.features.cols() != model.config.input_dim)
      throw IncompatibleError("train: video " + v.id + " has feature dim " +
                              std::to_string(v.features.cols()) + ", model expects " +
                              std::to_string(model.config.input_dim));
  }
  if (adam.m.size() != model.params.size())
    adam = AdamState<float>::zeros_like(model.params);

  kernels::Rng rng(cfg.seed);
  const AdamConfig adam_cfg = cfg.adam();
  const LossConfig loss_cfg = cfg.loss();
  std::vector<std::size_t> order(videos.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  model.zero_grad();

  TrainingHistory history;
  for (std::uint32_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::size_t frames = 0;
    for (std::size_t idx : order) {
      const data::VideoSample& video = videos[idx];
      const LabelSequence& labels = *video.labels;
      Tape<float> tape(true);
      const model::ForwardContext ctx{model::Mode::kTrain, &rng};
      const auto stages = model::forward_on_tape(tape, model, tape.constant_ref(video.features), ctx);
      const Var loss = ad::total_loss<float>(tape, stages, labels, loss_cfg);
      const double value = tape.value(loss)(0, 0);
      if (!std::isfinite(value))
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", video " +
                           video.id);
      tape.backward(loss);
      for (auto& p : model.params)
        if (const Mat<float>* g = tape.param_grad(p)) kernels::accumulate(p.grad, *g);
      try {
        adam_step<float>(model.params, adam, adam_cfg);
      } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " at epoch " + std::to_string(epoch) +
                           ", video " + video.id);
      }

      loss_sum += value;
      const auto pred = model::argmax_rows(tape.value(stages.back()));
      for (std::size_t t = 0; t < pred.size(); ++t) correct += pred[t] == labels[t];
      frames += pred.size();
    }
    EpochRecord rec{epoch, loss_sum / static_cast<double>(videos.size()),
                    100.0 * static_cast<double>(correct) / static_cast<double>(frames)};
    history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return history;
}

}  // namespace msast::training
