#include "msast/cli/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "msast/cli/run_config.hpp"
#include "msast/data/dataset.hpp"
#include "msast/data/feature_io.hpp"
#include "msast/data/synthetic.hpp"
#include "msast/data/text_io.hpp"
#include "msast/errors.hpp"
#include "msast/metrics/report.hpp"
#include "msast/metrics/ribbon.hpp"
#include "msast/model/forward.hpp"
#include "msast/model/stream.hpp"
#include "msast/numerics/kernels.hpp"
#include "msast/training/checkpoint.hpp"

namespace msast::cli {
namespace {

namespace fs = std::filesystem;

// Raised for flag combinations CLI11 cannot express.
class UsageError : public Error {
 public:
  using Error::Error;
};

constexpr const char* kModelKeys[] = {"kernels",     "layers_per_stage", "feature_maps",
                                      "num_classes", "input_dim",        "num_decoders",
                                      "causal",      "dropout",          "alpha_base"};

void echo_model(std::ostream& out, const model::ModelConfig& mc) {
  RunConfig rc;
  rc.model = mc;
  for (const char* k : kModelKeys) out << k << "=" << rc.get(k) << "\n";
}

void require_compatible(const model::ModelConfig& mc, std::size_t dim, std::size_t classes,
                        const std::string& what) {
  if (dim != mc.input_dim)
    throw IncompatibleError(what + ": feature dim mismatch, expected " +
                            std::to_string(mc.input_dim) + " found " + std::to_string(dim));
  if (classes != 0 && classes != mc.num_classes)
    throw IncompatibleError(what + ": class count mismatch, expected " +
                            std::to_string(mc.num_classes) + " found " + std::to_string(classes));
}

// ---- synth --------------------------------------------------------------------

struct SynthArgs {
  std::string out;
  data::SynthConfig cfg;
};

void add_synth(CLI::App& app, SynthArgs& a) {
  auto* c = app.add_subcommand("synth", "Generate a synthetic phase-segmentation dataset");
  c->add_option("--out", a.out, "Output dataset directory")->required();
  c->add_option("--videos", a.cfg.num_videos, "Number of videos")->capture_default_str();
  c->add_option("--classes", a.cfg.num_classes, "Number of phases")->capture_default_str();
  c->add_option("--dim", a.cfg.feature_dim, "Feature width D")->capture_default_str();
  c->add_option("--seed", a.cfg.seed, "Generator seed")->capture_default_str();
  c->add_option("--min-frames", a.cfg.min_frames, "Shortest video")->capture_default_str();
  c->add_option("--max-frames", a.cfg.max_frames, "Longest video")->capture_default_str();
  c->add_option("--sigma", a.cfg.noise_sigma, "Feature noise std")->capture_default_str();
  c->add_option("--self-prob", a.cfg.self_transition_prob, "Probability of staying in a phase")
      ->capture_default_str();
  c->add_option("--skip-prob", a.cfg.skip_prob, "Probability that a transition skips a phase")
      ->capture_default_str();
  c->add_option("--train-fraction", a.cfg.train_fraction, "Share of videos in the train split")
      ->capture_default_str();
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  const auto& c = a.cfg;
  out << "out=" << a.out << "\nvideos=" << c.num_videos << "\nclasses=" << c.num_classes
      << "\ndim=" << c.feature_dim << "\nseed=" << c.seed << "\nmin_frames=" << c.min_frames
      << "\nmax_frames=" << c.max_frames << "\nsigma=" << c.noise_sigma
      << "\nself_prob=" << c.self_transition_prob << "\nskip_prob=" << c.skip_prob
      << "\ntrain_fraction=" << c.train_fraction << "\n";
  const auto ds = data::generate_synthetic(c, a.out);
  data::write_dataset(ds);
  out << "wrote " << c.num_videos << " videos (" << ds.train.size() << " train, "
      << ds.test.size() << " test), " << c.num_classes << " classes, dim " << c.feature_dim
      << " to " << a.out << "\n";
  return kExitOk;
}

// ---- train --------------------------------------------------------------------

struct TrainArgs {
  std::string config;
  std::string out;
  std::string history;
  std::optional<std::string> data;
  std::optional<std::uint32_t> epochs;
  std::optional<std::uint64_t> seed;
  std::optional<double> lr;
  std::vector<std::string> sets;
  bool causal = false;
};

void add_train(CLI::App& app, TrainArgs& a) {
  auto* c = app.add_subcommand("train", "Train a model and write a checkpoint");
  c->add_option("--config", a.config, "key=value run configuration file")
      ->check(CLI::ExistingFile);
  c->add_option("--out", a.out, "Checkpoint path")->required();
  c->add_option("--history", a.history, "History path (default: <out>.history)");
  c->add_option("--data", a.data, "Dataset directory (overrides data_root)");
  c->add_option("--epochs", a.epochs, "Overrides epochs");
  c->add_option("--seed", a.seed, "Overrides seed");
  c->add_option("--lr", a.lr, "Overrides learning_rate");
  c->add_option("--set", a.sets, "Overrides any config key, as key=value");
  c->add_flag("--causal", a.causal, "Online model: causal, one encoder and one decoder");
}

RunConfig resolve_train_config(const TrainArgs& a) {
  RunConfig rc = a.config.empty() ? RunConfig{} : load_run_config(a.config);
  for (const auto& s : a.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + s + "'");
    rc.set(s.substr(0, eq), std::string_view(s).substr(eq + 1));
  }
  if (a.data) rc.data_root = *a.data;
  if (a.epochs) rc.train.epochs = *a.epochs;
  if (a.seed) rc.train.seed = *a.seed;
  if (a.lr) rc.train.learning_rate = *a.lr;
  if (a.causal) {
    rc.model.causal = true;
    rc.model.num_decoders = 1;
  }
  if (rc.data_root.empty()) throw UsageError("no dataset: set data_root or pass --data");
  return rc;
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
  RunConfig rc = resolve_train_config(a);
  const auto manifest = data::load_manifest(rc.data_root);
  const auto videos = data::load_split(manifest, rc.split);
  if (videos.empty()) throw UsageError("split '" + rc.split + "' is empty");
  if (rc.model.num_classes == 0)
    rc.model.num_classes = static_cast<std::uint32_t>(manifest.num_classes());
  if (rc.model.input_dim == 0)
    rc.model.input_dim = static_cast<std::uint32_t>(videos.front().features.cols());
  for (const auto& v : videos)
    require_compatible(rc.model, v.features.cols(), manifest.num_classes(), "video " + v.id);
  rc.model.validate();
  rc.train.validate();
  out << rc.to_text() << "out=" << a.out << "\n";
  out.flush();

  auto m = model::build_model<float>(rc.model, rc.train.seed);
  training::AdamState<float> adam = training::AdamState<float>::zeros_like(m.params);
  const auto history = training::train(m, adam, videos, rc.train, [&](const auto& rec) {
    out << training::TrainingHistory::format(rec) << "\n";
    out.flush();
  });
  training::save_checkpoint(m, adam, a.out);
  data::write_text_file(a.history.empty() ? a.out + ".history" : a.history, history.to_text());
  out << "wrote checkpoint " << a.out << "\n";
  return kExitOk;
}

// ---- eval ---------------------------------------------------------------------

struct EvalArgs {
  std::string ckpt;
  std::string data;
  std::string split = "test";
  std::string report;
  std::string ribbon;
  std::string confusion;
  bool oracle = false;
};

void add_eval(CLI::App& app, EvalArgs& a) {
  auto* c = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset split");
  c->add_option("--ckpt", a.ckpt, "Checkpoint path");
  c->add_option("--data", a.data, "Dataset directory")->required();
  c->add_option("--split", a.split, "Split name")->capture_default_str();
  c->add_option("--report", a.report, "Report path (metric<TAB>value lines)")->required();
  c->add_option("--ribbon", a.ribbon, "Directory for per-video PPM ribbons");
  c->add_option("--confusion", a.confusion, "Row-normalized pooled confusion matrix (TSV)");
  c->add_flag("--oracle", a.oracle, "Score ground truth against itself");
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  if (a.ckpt.empty() && !a.oracle) throw UsageError("eval needs --ckpt (or --oracle)");
  if (a.split != "train" && a.split != "test")
    throw UsageError("unknown split '" + a.split + "' (expected train or test)");
  const fs::path split_file = data::DatasetManifest::split_path(a.data, a.split);
  if (!fs::exists(split_file)) throw UsageError("split file not found: " + split_file.string());

  out << "ckpt=" << a.ckpt << "\ndata=" << a.data << "\nsplit=" << a.split
      << "\nreport=" << a.report << "\nribbon=" << a.ribbon << "\nconfusion=" << a.confusion
      << "\noracle=" << (a.oracle ? "true" : "false") << "\n";
  std::optional<training::Checkpoint> ck;
  if (!a.oracle) {
    ck = training::load_checkpoint(a.ckpt);
    echo_model(out, ck->model.config);
  }
  out.flush();

  const auto manifest = data::load_manifest(a.data);
  const auto videos = data::load_split(manifest, a.split);
  if (videos.empty()) throw UsageError("split '" + a.split + "' is empty");
  const std::size_t nc = ck ? ck->model.config.num_classes : manifest.num_classes();
  for (const auto& v : videos)
    if (ck) require_compatible(ck->model.config, v.features.cols(), manifest.num_classes(),
                               "video " + v.id);

  std::vector<metrics::EvalReport> reports;
  for (const auto& v : videos) {
    const LabelSequence pred = ck ? model::predict(ck->model, v.features) : *v.labels;
    reports.push_back(metrics::evaluate_video(v.id, pred, *v.labels, nc));
    if (!a.ribbon.empty()) {
      fs::create_directories(a.ribbon);
      metrics::emit_ribbon({{"ground truth", *v.labels}, {"prediction", pred}},
                           (fs::path(a.ribbon) / (v.id + ".ppm")).string());
    }
  }

  std::string text = metrics::format_metric_lines(
      metrics::aggregate(reports, metrics::AggregateMode::kOverall));
  text += metrics::format_metric_lines(
      metrics::aggregate(reports, metrics::AggregateMode::kPerVideo));
  for (const auto& r : reports)
    text += metrics::format_metric_lines(metrics::report_metrics(r), r.id + "/");
  data::write_text_file(a.report, text);

  if (!a.confusion.empty()) {
    const auto pooled = metrics::pool_reports(reports);
    std::string tsv;
    char buf[32];
    for (const auto& row : pooled.confusion) {
      std::uint64_t sum = 0;
      for (auto v : row) sum += v;
      for (std::size_t p = 0; p < row.size(); ++p) {
        const double x = sum ? static_cast<double>(row[p]) / static_cast<double>(sum) : 0.0;
        std::snprintf(buf, sizeof buf, "%s%.4f", p ? "\t" : "", x);
        tsv += buf;
      }
      tsv += "\n";
    }
    data::write_text_file(a.confusion, tsv);
  }

  const auto headline = metrics::aggregate(reports, metrics::AggregateMode::kOverall);
  out << metrics::format_metric_lines({headline.begin(), headline.begin() + 9});
  return kExitOk;
}

// ---- predict / stream -------------------------------------------------------------

struct InferArgs {
  std::string ckpt;
  std::string features;
  std::string out;
};

void add_infer(CLI::App& app, InferArgs& a, const char* name, const char* help) {
  auto* c = app.add_subcommand(name, help);
  c->add_option("--ckpt", a.ckpt, "Checkpoint path")->required();
  c->add_option("--features", a.features, "Feature file (MSFEAT01)")->required();
  c->add_option("--out", a.out, "Output label file, one id per line")->required();
}

void echo_infer(const InferArgs& a, const model::ModelConfig& mc, std::ostream& out) {
  out << "ckpt=" << a.ckpt << "\nfeatures=" << a.features << "\nout=" << a.out << "\n";
  echo_model(out, mc);
  out.flush();
}

int cmd_predict(const InferArgs& a, std::ostream& out) {
  const auto ck = training::load_checkpoint(a.ckpt);
  echo_infer(a, ck.model.config, out);
  const auto features = data::read_feature_file(a.features);
  require_compatible(ck.model.config, features.cols(), 0, a.features);
  data::write_labels(a.out, model::predict(ck.model, features));
  out << "wrote " << features.rows() << " labels to " << a.out << "\n";
  return kExitOk;
}

int cmd_stream(const InferArgs& a, std::ostream& out) {
  const auto ck = training::load_checkpoint(a.ckpt);
  echo_infer(a, ck.model.config, out);
  if (!ck.model.config.causal) throw ModeError("streaming requires a causal model");
  const auto features = data::read_feature_file(a.features);
  require_compatible(ck.model.config, features.cols(), 0, a.features);

  std::ofstream file(a.out, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open " + a.out + " for writing");
  model::StreamState state(ck.model.config.input_dim);
  for (std::size_t t = 0; t < features.rows(); ++t) {
    const Matrix logits = model::forward_stream(ck.model, features.row(t), state);
    file << model::argmax_rows(kernels::softmax_rows(logits))[0] << '\n';
    file.flush();
    if (!file) throw IoError("write failed on " + a.out);
  }
  out << "streamed " << features.rows() << " frames to " << a.out << "\n";
  return kExitOk;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const ConfigError*>(&e))
    return kExitUsage;
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const DataError*>(&e)) return kExitIo;
  if (dynamic_cast<const NumericError*>(&e)) return kExitNumeric;
  if (dynamic_cast<const IncompatibleError*>(&e) || dynamic_cast<const ShapeError*>(&e))
    return kExitIncompatible;
  if (dynamic_cast<const ModeError*>(&e)) return kExitMode;
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return kExitIo;
  return kExitInternal;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-scale action segmentation transformer", "msast"};
  app.require_subcommand(1);
  SynthArgs synth;
  TrainArgs train;
  EvalArgs eval;
  InferArgs predict;
  InferArgs stream;
  add_synth(app, synth);
  add_train(app, train);
  add_eval(app, eval);
  add_infer(app, predict, "predict", "Write per-frame predictions for one feature file");
  add_infer(app, stream, "stream", "Predict frame by frame with a causal model");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (app.got_subcommand("synth")) return cmd_synth(synth, out);
    if (app.got_subcommand("train")) return cmd_train(train, out);
    if (app.got_subcommand("eval")) return cmd_eval(eval, out);
    if (app.got_subcommand("predict")) return cmd_predict(predict, out);
    if (app.got_subcommand("stream")) return cmd_stream(stream, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kExitUsage;
}

}  // namespace msast::cli
