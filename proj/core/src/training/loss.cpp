#include "msast/training/loss.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <string>
#include <vector>

#include "msast/errors.hpp"
#include "msast/numerics/kernels.hpp"

namespace msast::training {

template <class S>
Mat<S> floored_log_probs(const Mat<S>& logits) {
  Mat<S> lp = kernels::log_softmax_rows(logits);
  const S floor = static_cast<S>(kLogProbFloor);
  for (auto& v : lp.flat()) v = std::max(v, floor);
  return lp;
}

template Mat<float> floored_log_probs(const Mat<float>&);
template Mat<double> floored_log_probs(const Mat<double>&);

}  // namespace msast::training

namespace msast::ad {

namespace k = kernels;

template <class S>
Var cross_entropy(Tape<S>& tp, Var logits, const LabelSequence& labels) {
  const Mat<S>& x = tp.value(logits);
  if (labels.size() != x.rows())
    throw DataError("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                    std::to_string(x.rows()) + " frames");
  for (std::size_t t = 0; t < labels.size(); ++t)
    if (labels[t] >= x.cols())
      throw DataError("cross_entropy: label " + std::to_string(labels[t]) + " at frame " +
                      std::to_string(t) + " is outside [0, " + std::to_string(x.cols()) + ")");
  const Mat<S> lp = k::log_softmax_rows(x);
  S sum{0};
  for (std::size_t t = 0; t < lp.rows(); ++t) sum -= lp(t, labels[t]);
  const S n = static_cast<S>(lp.rows());
  Mat<S> out(1, 1, sum / n);
  return tp.push(std::move(out), {logits}, [logits, labels, n](Tape<S>& t, Var self) {
    const S g = t.grad(self)(0, 0);
    const Mat<S> p = k::softmax_rows(t.value(logits));
    Mat<S>& gx = t.grad(logits);
    for (std::size_t r = 0; r < p.rows(); ++r) {
      for (std::size_t c = 0; c < p.cols(); ++c) {
        const S onehot = c == labels[r] ? S{1} : S{0};
        gx(r, c) += g * (p(r, c) - onehot) / n;
      }
    }
  });
}

template <class S>
Var smoothing_loss_against(Tape<S>& tp, Var logits, const Mat<S>& previous, S tau) {
  const Mat<S>& x = tp.value(logits);
  if (previous.rows() != x.rows() || previous.cols() != x.cols())
    throw ShapeError("smoothing_loss: previous log-probs are " + std::to_string(previous.rows()) +
                     "x" + std::to_string(previous.cols()) + ", logits are " +
                     std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
  if (x.rows() < 2) {
    std::clog << "warning: smoothing loss needs T >= 2, got T=" << x.rows() << "; using 0\n";
    return tp.constant(Mat<S>(1, 1));
  }
  const S floor = static_cast<S>(training::kLogProbFloor);
  Mat<S> lp = k::log_softmax_rows(x);
  Mat<S> floored(lp.rows(), lp.cols());
  for (std::size_t i = 0; i < lp.size(); ++i) {
    floored.data()[i] = lp.data()[i] < floor ? S{1} : S{0};
    lp.data()[i] = std::max(lp.data()[i], floor);
  }
  const std::size_t count = (lp.rows() - 1) * lp.cols();
  const S n = static_cast<S>(count);
  Mat<S> dlp(lp.rows(), lp.cols());
  S sum{0};
  for (std::size_t t = 1; t < lp.rows(); ++t) {
    for (std::size_t c = 0; c < lp.cols(); ++c) {
      const S d = lp(t, c) - previous(t - 1, c);
      const S ad = std::abs(d);
      if (ad < tau) {
        sum += d * d;
        dlp(t, c) = floored(t, c) != S{0} ? S{0} : S{2} * d / n;
      } else {
        sum += tau * tau;
      }
    }
  }
  Mat<S> out(1, 1, sum / n);
  return tp.push(std::move(out), {logits}, [logits, dlp = std::move(dlp)](Tape<S>& t, Var self) {
    const S g = t.grad(self)(0, 0);
    const Mat<S> p = k::softmax_rows(t.value(logits));
    Mat<S>& gx = t.grad(logits);
    for (std::size_t r = 0; r < p.rows(); ++r) {
      S row_sum{0};
      for (std::size_t c = 0; c < p.cols(); ++c) row_sum += dlp(r, c);
      for (std::size_t c = 0; c < p.cols(); ++c)
        gx(r, c) += g * (dlp(r, c) - p(r, c) * row_sum);
    }
  });
}

template <class S>
Var smoothing_loss(Tape<S>& tp, Var logits, S tau) {
  return smoothing_loss_against(tp, logits, training::floored_log_probs(tp.value(logits)), tau);
}

template <class S>
Var total_loss(Tape<S>& tp, std::span<const Var> stages, const LabelSequence& labels,
               const training::LossConfig& cfg) {
  std::vector<Mat<S>> previous;
  previous.reserve(stages.size());
  for (Var s : stages) previous.push_back(training::floored_log_probs(tp.value(s)));
  return total_loss_against<S>(tp, stages, labels, cfg, previous);
}

template <class S>
Var total_loss_against(Tape<S>& tp, std::span<const Var> stages, const LabelSequence& labels,
                       const training::LossConfig& cfg, std::span<const Mat<S>> previous) {
  if (previous.size() != stages.size())
    throw ShapeError("total_loss: " + std::to_string(previous.size()) +
                     " previous log-prob tables for " + std::to_string(stages.size()) + " stages");
  std::vector<Var> terms;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    terms.push_back(cross_entropy(tp, stages[i], labels));
    if (cfg.smooth_lambda != 0.0) {
      terms.push_back(scale(tp,
                            smoothing_loss_against(tp, stages[i], previous[i],
                                                   static_cast<S>(cfg.smooth_tau)),
                            static_cast<S>(cfg.smooth_lambda)));
    }
  }
  return sum_scalars<S>(tp, terms);
}

template Var cross_entropy(Tape<float>&, Var, const LabelSequence&);
template Var cross_entropy(Tape<double>&, Var, const LabelSequence&);
template Var smoothing_loss(Tape<float>&, Var, float);
template Var smoothing_loss(Tape<double>&, Var, double);
template Var smoothing_loss_against(Tape<float>&, Var, const Mat<float>&, float);
template Var smoothing_loss_against(Tape<double>&, Var, const Mat<double>&, double);
template Var total_loss(Tape<float>&, std::span<const Var>, const LabelSequence&,
                        const training::LossConfig&);
template Var total_loss(Tape<double>&, std::span<const Var>, const LabelSequence&,
                        const training::LossConfig&);
template Var total_loss_against(Tape<float>&, std::span<const Var>, const LabelSequence&,
                                const training::LossConfig&, std::span<const Mat<float>>);
template Var total_loss_against(Tape<double>&, std::span<const Var>, const LabelSequence&,
                                const training::LossConfig&, std::span<const Mat<double>>);

}  // namespace msast::ad

namespace msast::training {

template <class S>
S cross_entropy_loss(const Mat<S>& logits, const LabelSequence& labels) {
  Tape<S> tp(false);
  return tp.value(ad::cross_entropy(tp, tp.constant_ref(logits), labels))(0, 0);
}

template <class S>
S smoothing_loss(const Mat<S>& logits, S tau) {
  Tape<S> tp(false);
  return tp.value(ad::smoothing_loss(tp, tp.constant_ref(logits), tau))(0, 0);
}

template <class S>
S total_loss(const StageOutputs<S>& stages, const LabelSequence& labels, const LossConfig& cfg) {
  Tape<S> tp(false);
  std::vector<Var> vars;
  for (const auto& l : stages.logits) vars.push_back(tp.constant_ref(l));
  return tp.value(ad::total_loss<S>(tp, vars, labels, cfg))(0, 0);
}

template float cross_entropy_loss(const Mat<float>&, const LabelSequence&);
template double cross_entropy_loss(const Mat<double>&, const LabelSequence&);
template float smoothing_loss(const Mat<float>&, float);
template double smoothing_loss(const Mat<double>&, double);
template float total_loss(const StageOutputs<float>&, const LabelSequence&, const LossConfig&);
template double total_loss(const StageOutputs<double>&, const LabelSequence&, const LossConfig&);

}  // namespace msast::training
