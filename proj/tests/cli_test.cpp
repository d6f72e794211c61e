#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <json.hpp>

#include "astprobe/byte_io.hpp"
#include "astprobe/checkpoint.hpp"
#include "astprobe/corpus.hpp"
#include "test_paths.hpp"

using namespace astprobe;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run(const std::string& args, const std::string& env = "") {
  const std::string command = env + " " + ASTPROBE_CLI + " " + args + " 2>/dev/null";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string quoted(const fs::path& p) { return "'" + p.string() + "'"; }

std::string resolved(const fs::path& dir, const std::string& key) {
  const auto values = read_text_file(dir / "config.resolved");
  const auto at = values.find("\n" + key + "=");
  const auto start = values.rfind(key + "=", 0) == 0 ? 0 : at + 1;
  const auto end = values.find('\n', start);
  return values.substr(start + key.size() + 1, end - start - key.size() - 1);
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir;
    ASSERT_EQ(run("synth --sizes 40,10,10 --max-leaves 10 --out " + quoted(data())), 0);
  }
  static void TearDownTestSuite() { delete dir_; }

  static fs::path data() { return dir_->path() / "data"; }
  static fs::path manifest() { return data() / "manifest.jsonl"; }
  static fs::path out(const std::string& name) { return dir_->path() / name; }

  static std::string train_args(const fs::path& to, int epochs = 2) {
    return "train --manifest " + quoted(manifest()) + " --subspace-dim 8 --max-epochs " +
           std::to_string(epochs) + " --out " + quoted(to);
  }

  static TempDir* dir_;
};

TempDir* Cli::dir_ = nullptr;

}  // namespace

TEST(CliEncode, FixtureCorpus) {
  const TempDir dir;
  const std::string args = "encode --corpus " + quoted(kFixtureDir) + " --sizes 1,1,1 --seed 4 --out ";
  ASSERT_EQ(run(args + quoted(dir.path() / "a")), 0);
  ASSERT_EQ(run(args + quoted(dir.path() / "b")), 0);
  for (const char* id : {"counter", "running_example", "scale"}) {
    const fs::path sidecar = fs::path("tuples") / (std::string(id) + ".json");
    ASSERT_TRUE(fs::exists(dir.path() / "a" / sidecar)) << id;
    EXPECT_EQ(read_file(dir.path() / "a" / sidecar), read_file(dir.path() / "b" / sidecar));
  }
  EXPECT_EQ(read_file(dir.path() / "a/manifest.jsonl"), read_file(dir.path() / "b/manifest.jsonl"));
  EXPECT_EQ(read_manifest(dir.path() / "a/manifest.jsonl").samples.size(), 3u);
}

TEST(CliEncode, RunningExampleSidecarHoldsElseBlockVectors) {
  const TempDir dir;
  ASSERT_EQ(run("encode --corpus " + quoted(kFixtureDir) + " --sizes 1,1,1 --out " +
                quoted(dir.path())),
            0);
  const Sidecar s = read_sidecar(dir.path() / "tuples/running_example.json");
  const auto& t = s.tuple;
  std::size_t at = 0;
  while (at < t.tokens.size() && t.tokens[at] != "selected") ++at;
  ASSERT_LT(at + 3, t.tokens.size());
  EXPECT_EQ(std::vector<std::string>(t.tokens.begin() + at, t.tokens.begin() + at + 4),
            (std::vector<std::string>{"selected", "=", "element", "break"}));
  EXPECT_EQ(std::vector<int>(t.distances.begin() + at, t.distances.begin() + at + 3),
            (std::vector<int>{2, 1, 3}));
  const std::string n(kNullLabel);
  EXPECT_EQ(std::vector<std::string>(t.c.begin() + at, t.c.begin() + at + 3),
            (std::vector<std::string>{"expression_statement-assignment", n, "block"}));
  EXPECT_EQ(std::vector<std::string>(t.u.begin() + at, t.u.begin() + at + 4),
            (std::vector<std::string>{n, n, n, "break_statement"}));
  ASSERT_EQ(s.token_ranges.size(), t.tokens.size());
}

TEST(CliEncode, PartialAndFatalExitCodes) {
  const TempDir dir;
  write_text_file(dir.path() / "src/good1.py", "x = 1\n");
  write_text_file(dir.path() / "src/good2.py", "y = 2\n");
  write_text_file(dir.path() / "src/good3.py", "z = 3\n");
  write_text_file(dir.path() / "src/broken.py", "def (:\n");
  const std::string args = "encode --corpus " + quoted(dir.path() / "src") + " --out " +
                           quoted(dir.path() / "out") + " --sizes ";
  EXPECT_EQ(run(args + "1,1,1"), 1);
  EXPECT_EQ(run(args + "2,1,1"), 2);
  EXPECT_EQ(run("encode --sizes 1,1,1"), 2);  // no corpus
  EXPECT_EQ(run("frobnicate"), 2);
}

TEST_F(Cli, TrainIsByteIdenticalAcrossRuns) {
  ASSERT_LE(run(train_args(out("t1"))), 1);
  ASSERT_LE(run(train_args(out("t2")) + " --jobs 2"), 1);
  EXPECT_EQ(read_file(out("t1") / "probe.astk"), read_file(out("t2") / "probe.astk"));
  EXPECT_EQ(read_file(out("t1") / "train_log.json"), read_file(out("t2") / "train_log.json"));
}

TEST_F(Cli, ZeroEpochsWritesInitialProbe) {
  ASSERT_LE(run(train_args(out("t0"), 0) + " --seed 3"), 1);
  const Checkpoint ck = read_checkpoint(out("t0") / "probe.astk");
  const auto init = init_probe(64, 8, static_cast<Eigen::Index>(ck.c_vocab.size()),
                               static_cast<Eigen::Index>(ck.u_vocab.size()), 3);
  EXPECT_EQ(ck.params, init.cast<float>());
}

TEST_F(Cli, GoldAsPredictionScoresOne) {
  ASSERT_LE(run(train_args(out("tg"))), 1);
  ASSERT_LE(run("eval --checkpoint " + quoted(out("tg") / "probe.astk") + " --manifest " +
                quoted(manifest()) + " --gold-as-prediction --out " + quoted(out("eg"))),
            1);
  const json summary = json::parse(read_text_file(out("eg") / "summary.json"));
  EXPECT_EQ(summary.at("micro").at("f1").get<double>(), 1.0);
  EXPECT_EQ(summary.at("macro").at("f1").get<double>(), 1.0);
  const std::string csv = read_text_file(out("eg") / "metrics.csv");
  EXPECT_NE(csv.find("micro,1.000000,1.000000,1.000000"), std::string::npos);
  EXPECT_NE(csv.find("macro,"), std::string::npos);
}

TEST_F(Cli, EvalWritesPerSampleScores) {
  ASSERT_LE(run(train_args(out("te"))), 1);
  const std::string args = "eval --checkpoint " + quoted(out("te") / "probe.astk") +
                           " --manifest " + quoted(manifest()) + " --out ";
  ASSERT_LE(run(args + quoted(out("e1"))), 1);
  ASSERT_LE(run(args + quoted(out("e2"))), 1);
  const std::string scores = read_text_file(out("e1") / "scores.jsonl");
  EXPECT_GT(std::count(scores.begin(), scores.end(), '\n'), 5);
  EXPECT_EQ(scores, read_text_file(out("e2") / "scores.jsonl"));
  EXPECT_EQ(read_file(out("e1") / "summary.json"), read_file(out("e2") / "summary.json"));
}

TEST_F(Cli, SettingsPrecedence) {
  const fs::path config = out("cfg.txt");
  write_text_file(config, "# schedule\nlr = 0.02\nbatch_size=4\n");
  const std::string base = train_args(out("p1"), 0) + " --lr 0.5 --seed 2";
  ASSERT_LE(run(base + " --config " + quoted(config), "ASTPROBE_SEED=9 ASTPROBE_LAMBDA=3"), 1);
  EXPECT_EQ(resolved(out("p1"), "lr"), "0.02");        // config beats flag
  EXPECT_EQ(resolved(out("p1"), "batch-size"), "4");   // config beats default
  EXPECT_EQ(resolved(out("p1"), "seed"), "2");         // flag beats environment
  EXPECT_EQ(resolved(out("p1"), "lambda"), "3");       // environment beats default
  EXPECT_EQ(resolved(out("p1"), "patience"), "5");

  write_text_file(config, "no_such_key=1\n");
  EXPECT_EQ(run(base + " --config " + quoted(config)), 2);
}

TEST_F(Cli, SweepDimensions) {
  const std::string args = "sweep-dim --manifest " + quoted(manifest()) +
                           " --dims 2,4 --max-epochs 1 --jobs 2 --out ";
  ASSERT_LE(run(args + quoted(out("sd1"))), 1);
  ASSERT_LE(run(args + quoted(out("sd2"))), 1);
  const std::string csv = read_text_file(out("sd1") / "sweep.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_EQ(csv.rfind("subspace_dim,precision,recall,f1\n2,", 0), 0u);
  EXPECT_EQ(csv, read_text_file(out("sd2") / "sweep.csv"));
  EXPECT_EQ(read_file(out("sd1") / "dim_4/probe.astk"), read_file(out("sd2") / "dim_4/probe.astk"));
  const json plot = json::parse(read_text_file(out("sd1") / "plot.json"));
  EXPECT_EQ(plot.at("x"), json::array({2, 4}));

  EXPECT_EQ(run("sweep-dim --manifest " + quoted(manifest()) + " --dims 8,128 --out " +
                quoted(out("sd3"))),
            2);  // 128 > m1
}

TEST_F(Cli, SingleLayerSweepMatchesTrain) {
  ASSERT_LE(run("sweep-layers --manifest " + quoted(manifest()) +
                " --layers 0 --subspace-dim 8 --max-epochs 2 --out " + quoted(out("sl"))),
            1);
  ASSERT_LE(run(train_args(out("tl"))), 1);
  EXPECT_EQ(read_file(out("sl") / "layer_0/probe.astk"), read_file(out("tl") / "probe.astk"));
  const std::string csv = read_text_file(out("sl") / "sweep.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);

  ASSERT_LE(run("report --runs " + quoted(out("sl")) + " --out " + quoted(out("rep"))), 1);
  const std::string report = read_text_file(out("rep") / "report.csv");
  EXPECT_NE(report.find("\nlayer_0,test,0,8,"), std::string::npos);
  EXPECT_TRUE(fs::exists(out("rep") / "report.md"));
}
