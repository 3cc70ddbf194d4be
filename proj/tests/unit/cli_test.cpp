#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "msast/cli/cli.hpp"
#include "msast/cli/run_config.hpp"
#include "msast/data/dataset.hpp"
#include "msast/data/feature_io.hpp"
#include "msast/data/text_io.hpp"
#include "msast/errors.hpp"
#include "msast/model/forward.hpp"
#include "msast/training/checkpoint.hpp"
#include "test_support.hpp"

using namespace msast;
namespace mt = msast::testing;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  return out;
}

std::map<std::string, double> read_report(const fs::path& p) {
  std::map<std::string, double> kv;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    const auto tab = line.find('\t');
    if (tab == std::string::npos) continue;
    kv[line.substr(0, tab)] = std::stod(line.substr(tab + 1));
  }
  return kv;
}

// One small dataset and config shared by the whole suite.
class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = mt::scratch_dir("cli");
    data_ = dir_ / "data";
    const auto r = call({"synth", "--out", data_.string(), "--videos", "5", "--classes", "4",
                         "--dim", "6", "--min-frames", "20", "--max-frames", "30", "--seed",
                         "3", "--self-prob", "0.9"});
    ASSERT_EQ(r.code, 0) << r.err;
    config_ = dir_ / "run.cfg";
    std::ofstream(config_) << "# tiny run\n"
                              "kernels=3,5\nlayers_per_stage=2\nfeature_maps=8\n"
                              "num_decoders=1\nepochs=2\nlearning_rate=0.001\nseed=11\n"
                              "data_root="
                           << data_.string() << "\n";
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }

  static std::string train(const std::string& name, std::vector<std::string> extra = {}) {
    const std::string out = (dir_ / name).string();
    std::vector<std::string> args{"train", "--config", config_.string(), "--out", out};
    args.insert(args.end(), extra.begin(), extra.end());
    const auto r = call(args);
    EXPECT_EQ(r.code, 0) << r.err;
    return out;
  }

  static inline fs::path dir_, data_, config_;
};

}  // namespace

// ---- run config -----------------------------------------------------------------

TEST(RunConfig, ParsesEveryKeyAndRoundTrips) {
  const std::string text =
      "kernels=3,5,9\nlayers_per_stage=4\nfeature_maps=16\nnum_classes=5\ninput_dim=12\n"
      "num_decoders=2\ncausal=false\ndropout=0.25\nalpha_base=3\nepochs=7\n"
      "learning_rate=0.0005\nsmooth_tau=2\nsmooth_lambda=0.5\nseed=99\ndata_root=/d\n"
      "split=test\n";
  const auto rc = cli::parse_run_config(text, "t");
  EXPECT_EQ(rc.model.kernels, (std::vector<std::uint32_t>{3, 5, 9}));
  EXPECT_EQ(rc.model.layers_per_stage, 4u);
  EXPECT_EQ(rc.model.feature_maps, 16u);
  EXPECT_EQ(rc.model.num_classes, 5u);
  EXPECT_EQ(rc.model.input_dim, 12u);
  EXPECT_EQ(rc.model.num_decoders, 2u);
  EXPECT_FALSE(rc.model.causal);
  EXPECT_EQ(rc.model.dropout, 0.25f);
  EXPECT_EQ(rc.model.alpha_base, 3.0f);
  EXPECT_EQ(rc.train.epochs, 7u);
  EXPECT_EQ(rc.train.learning_rate, 0.0005);
  EXPECT_EQ(rc.train.smooth_tau, 2.0);
  EXPECT_EQ(rc.train.smooth_lambda, 0.5);
  EXPECT_EQ(rc.train.seed, 99u);
  EXPECT_EQ(rc.data_root, "/d");
  EXPECT_EQ(rc.split, "test");
  EXPECT_EQ(cli::parse_run_config(rc.to_text(), "again").to_text(), rc.to_text());
  EXPECT_EQ(cli::RunConfig::keys().size(), 16u);
}

TEST(RunConfig, DefaultsAndErrors) {
  const auto rc = cli::parse_run_config("", "empty");
  EXPECT_EQ(rc.model.kernels, (std::vector<std::uint32_t>{3, 5, 17}));
  EXPECT_EQ(rc.model.num_decoders, 3u);
  EXPECT_EQ(rc.train.learning_rate, 1e-4);
  try {
    cli::parse_run_config("epochs=3\nwidth=4\n", "f.cfg");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("f.cfg:2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(cli::parse_run_config("epochs=three\n", "x"), ConfigError);
  EXPECT_THROW(cli::parse_run_config("causal=maybe\n", "x"), ConfigError);
  EXPECT_THROW(cli::parse_run_config("no equals sign\n", "x"), ConfigError);
}

// ---- synth --------------------------------------------------------------------------

TEST_F(Cli, SynthIsDeterministicAndEchoesConfig) {
  const auto a = dir_ / "s_a", b = dir_ / "s_b";
  const auto ra = call({"synth", "--out", a.string(), "--videos", "3", "--seed", "7",
                        "--min-frames", "20", "--max-frames", "25", "--dim", "4"});
  const auto rb = call({"synth", "--out", b.string(), "--videos", "3", "--seed", "7",
                        "--min-frames", "20", "--max-frames", "25", "--dim", "4"});
  ASSERT_EQ(ra.code, 0);
  ASSERT_EQ(rb.code, 0);
  EXPECT_EQ(tree(a), tree(b));
  EXPECT_NE(ra.out.find("classes=7"), std::string::npos);
  EXPECT_NE(ra.out.find("seed=7"), std::string::npos);
  EXPECT_EQ(data::load_manifest(a).num_classes(), 7u);
}

TEST_F(Cli, SynthRejectsZeroVideosAndUnknownFlags) {
  EXPECT_EQ(call({"synth", "--out", (dir_ / "z").string(), "--videos", "0"}).code, 2);
  EXPECT_EQ(call({"synth", "--out", (dir_ / "z").string(), "--bogus", "1"}).code, 2);
  EXPECT_EQ(call({}).code, 2);
  EXPECT_EQ(call({"fly"}).code, 2);
}

// ---- train --------------------------------------------------------------------------

TEST_F(Cli, TrainWritesCheckpointHistoryAndEcho) {
  const std::string out = (dir_ / "t.ckpt").string();
  const auto r = call({"train", "--config", config_.string(), "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(out).substr(0, 8), "MSASTCK1");
  EXPECT_NE(r.out.find("kernels=3,5\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("input_dim=6\n"), std::string::npos);
  EXPECT_NE(r.out.find("num_classes=4\n"), std::string::npos);
  EXPECT_NE(r.out.find("epoch 2 loss"), std::string::npos);
  const std::string hist = slurp(out + ".history");
  EXPECT_EQ(std::count(hist.begin(), hist.end(), '\n'), 2);
  const auto ck = training::load_checkpoint(out);
  EXPECT_EQ(ck.model.config.num_decoders, 1u);
  EXPECT_FALSE(ck.model.config.causal);
  EXPECT_EQ(ck.adam.step, 2u * 4u);  // 2 epochs x 4 training videos
}

TEST_F(Cli, CausalFlagEmbedsOnlineConfig) {
  const auto ck = training::load_checkpoint(train("c.ckpt", {"--causal", "--set",
                                                             "num_decoders=3"}));
  EXPECT_TRUE(ck.model.config.causal);
  EXPECT_EQ(ck.model.config.num_decoders, 1u);
  EXPECT_EQ(ck.model.norm_parameter_count(), 0u);
}

TEST_F(Cli, TrainIsByteDeterministic) {
  const std::string a = train("d1.ckpt"), b = train("d2.ckpt");
  EXPECT_EQ(slurp(a), slurp(b));
  const std::string c = train("d3.ckpt", {"--seed", "12"});
  EXPECT_NE(slurp(a), slurp(c));
}

TEST_F(Cli, TrainConfigErrors) {
  const auto bad = dir_ / "bad.cfg";
  std::ofstream(bad) << "epochs=1\nwidth=3\n";
  EXPECT_EQ(call({"train", "--config", bad.string(), "--out", (dir_ / "x").string()}).code, 2);
  EXPECT_EQ(call({"train", "--config", config_.string(), "--out", (dir_ / "x").string(), "--set",
                  "input_dim=9"})
                .code,
            5);
  EXPECT_EQ(call({"train", "--config", config_.string(), "--out", (dir_ / "x").string(), "--set",
                  "layers_per_stage=0"})
                .code,
            2);
  EXPECT_EQ(
      call({"train", "--config", config_.string(), "--out", "/nonexistent/dir/x.ckpt"}).code, 3);
}

TEST_F(Cli, NonFiniteTrainingExitsFour) {
  const auto r = call({"train", "--config", config_.string(), "--out", (dir_ / "nan").string(),
                       "--lr", "1e300"});
  EXPECT_EQ(r.code, 4) << r.err;
}

// ---- eval ---------------------------------------------------------------------------

TEST_F(Cli, OracleEvalIsPerfect) {
  const auto report = dir_ / "oracle.tsv";
  const auto r = call({"eval", "--oracle", "--data", data_.string(), "--report",
                       report.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto kv = read_report(report);
  for (const char* k : {"accuracy", "precision", "recall", "jaccard", "edit", "f1@10", "f1@25",
                        "f1@50", "f1_avg", "accuracy_mean", "edit_mean"})
    EXPECT_EQ(kv.at(k), 100.0) << k;
  EXPECT_EQ(kv.at("accuracy_std"), 0.0);
}

TEST_F(Cli, EvalReportKeysRibbonsAndConfusion) {
  const std::string ckpt = train("e.ckpt");
  const auto report = dir_ / "e.tsv", ribbons = dir_ / "ribbons", conf = dir_ / "conf.tsv";
  const auto r = call({"eval", "--ckpt", ckpt, "--data", data_.string(), "--report",
                       report.string(), "--ribbon", ribbons.string(), "--confusion",
                       conf.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("split=test"), std::string::npos);
  const auto kv = read_report(report);
  EXPECT_NEAR(kv.at("f1_avg"), (kv.at("f1@10") + kv.at("f1@25") + kv.at("f1@50")) / 3.0, 0.01);
  const auto m = data::load_manifest(data_);
  for (const auto& id : m.test_ids) {
    EXPECT_TRUE(kv.count(id + "/accuracy")) << id;
    const std::string img = slurp(ribbons / (id + ".ppm"));
    EXPECT_EQ(img.substr(0, 3), "P6\n");
  }
  EXPECT_TRUE(kv.count("f1_avg_mean"));
  const std::string c = slurp(conf);
  EXPECT_EQ(std::count(c.begin(), c.end(), '\n'), 4);
}

TEST_F(Cli, EvalErrors) {
  const std::string ckpt = train("ee.ckpt");
  const auto broken = dir_ / "broken";
  fs::copy(data_, broken, fs::copy_options::recursive);
  fs::remove(broken / "splits" / "test.txt");
  EXPECT_EQ(call({"eval", "--ckpt", ckpt, "--data", broken.string(), "--report",
                  (dir_ / "r").string()})
                .code,
            2);
  EXPECT_EQ(call({"eval", "--ckpt", ckpt, "--data", data_.string(), "--split", "val",
                  "--report", (dir_ / "r").string()})
                .code,
            2);

  // same layout with wider features
  const auto wide = dir_ / "wide";
  ASSERT_EQ(call({"synth", "--out", wide.string(), "--videos", "3", "--classes", "4", "--dim",
                  "9", "--min-frames", "20", "--max-frames", "25"})
                .code,
            0);
  const auto r =
      call({"eval", "--ckpt", ckpt, "--data", wide.string(), "--report", (dir_ / "r").string()});
  EXPECT_EQ(r.code, 5);
  EXPECT_NE(r.err.find("expected 6"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("found 9"), std::string::npos) << r.err;
}

// ---- predict / stream ------------------------------------------------------------------

TEST_F(Cli, PredictMatchesModelAndIsDeterministic) {
  const std::string ckpt = train("p.ckpt");
  const auto m = data::load_manifest(data_);
  const std::string id = m.test_ids.front();
  const auto feats = m.feature_path(id).string();
  const auto out1 = dir_ / "p1.txt", out2 = dir_ / "p2.txt";
  const auto r = call({"predict", "--ckpt", ckpt, "--features", feats, "--out", out1.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("features=" + feats), std::string::npos);
  ASSERT_EQ(call({"predict", "--ckpt", ckpt, "--features", feats, "--out", out2.string()}).code,
            0);
  EXPECT_EQ(slurp(out1), slurp(out2));

  const auto f = data::read_feature_file(feats);
  const auto labels = data::read_labels(out1.string(), f.rows());
  EXPECT_EQ(labels, model::predict(training::load_checkpoint(ckpt).model, f));
}

TEST_F(Cli, StreamEqualsPredictOnCausalCheckpoint) {
  const std::string ckpt = train("s.ckpt", {"--causal"});
  const auto m = data::load_manifest(data_);
  for (const auto& id : m.test_ids) {
    const auto feats = m.feature_path(id).string();
    const auto a = dir_ / ("sp_" + id), b = dir_ / ("ss_" + id);
    ASSERT_EQ(call({"predict", "--ckpt", ckpt, "--features", feats, "--out", a.string()}).code,
              0);
    const auto r = call({"stream", "--ckpt", ckpt, "--features", feats, "--out", b.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(slurp(a), slurp(b)) << id;
  }
}

TEST_F(Cli, StreamRejectsAcausalCheckpoint) {
  const std::string ckpt = train("sa.ckpt");
  const auto m = data::load_manifest(data_);
  const auto r = call({"stream", "--ckpt", ckpt, "--features",
                       m.feature_path(m.test_ids.front()).string(), "--out",
                       (dir_ / "never").string()});
  EXPECT_EQ(r.code, 6);
  EXPECT_NE(r.err.find("streaming requires a causal model"), std::string::npos);
}

TEST_F(Cli, PredictErrors) {
  const std::string ckpt = train("pe.ckpt");
  const auto f9 = dir_ / "f9.msfeat";
  data::write_feature_file(f9.string(), Matrix(10, 9));
  EXPECT_EQ(call({"predict", "--ckpt", ckpt, "--features", f9.string(), "--out",
                  (dir_ / "o").string()})
                .code,
            5);
  EXPECT_EQ(call({"predict", "--ckpt", (dir_ / "missing.ckpt").string(), "--features",
                  f9.string(), "--out", (dir_ / "o").string()})
                .code,
            3);
  const auto junk = dir_ / "junk.ckpt";
  std::ofstream(junk) << "MSASTCK0 not a checkpoint";
  EXPECT_EQ(call({"predict", "--ckpt", junk.string(), "--features", f9.string(), "--out",
                  (dir_ / "o").string()})
                .code,
            3);
}
