#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "oracles.hpp"
#include "spectrack/checkpoint.hpp"
#include "spectrack/metrics.hpp"
#include "spectrack/sequence.hpp"
#include "spectrack/tokenizer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using spectrack::cli::run;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::vector<std::uint8_t> bytes(const fs::path& p) { return spectrack::read_file(p); }

std::map<std::string, std::vector<std::uint8_t>> snapshot(const fs::path& dir) {
  std::map<std::string, std::vector<std::uint8_t>> m;
  for (const auto& e : fs::directory_iterator(dir)) m[e.path().filename().string()] = bytes(e.path());
  return m;
}

/// Scene spec, two sequences of test data and a tiny run config.
class CliPipeline : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = dir_.path();
    write(root_ / "scene.json", R"({"name": "amb", "frames": 6})");
    ASSERT_EQ(invoke({"generate", "--config", (root_ / "scene.json").string(), "--modality", "VIS",
                      "--count", "2", "--seed", "5", "--out", (root_ / "data").string()})
                  .code,
              0);
    write(root_ / "run.json", json{{"model", {{"d", 16}, {"heads", 2}, {"backbone_blocks", 1}, {"seed", 3}}},
                                   {"modalities", {{{"name", "VIS"}, {"bands", 16}}}},
                                   {"data", {{"train", {(root_ / "data").string()}}}},
                                   {"batch_size", 2},
                                   {"samples_per_sequence", 2},
                                   {"max_steps", 2}}
                                  .dump());
  }

  fs::path run_pipeline(const std::string& tag) {
    const fs::path out = root_ / tag;
    EXPECT_EQ(invoke({"train", "--config", (root_ / "run.json").string(), "--out", (out / "train").string()}).code, 0);
    EXPECT_EQ(invoke({"track", "--checkpoint", (out / "train" / "checkpoint.stck").string(), "--data",
                      (root_ / "data").string(), "--out", (out / "track").string()})
                  .code,
              0);
    EXPECT_EQ(invoke({"eval", "--results", (out / "track").string(), "--data", (root_ / "data").string(),
                      "--out", (out / "eval").string()})
                  .code,
              0);
    return out;
  }

  oracle::TempDir dir_{"cli"};
  fs::path root_;
};

}  // namespace

TEST(Cli, UnknownSubcommandIsUsageError) {
  const Outcome r = invoke({"teleport"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("generate"), std::string::npos);  // usage lists the subcommands
  EXPECT_EQ(invoke({}).code, 2);
}

TEST(Cli, HelpAndVersionSucceed) {
  EXPECT_EQ(invoke({"--help"}).code, 0);
  const Outcome v = invoke({"--version"});
  EXPECT_EQ(v.code, 0);
  EXPECT_FALSE(v.out.empty());
}

TEST(Cli, MissingRequiredOptionIsUsageError) {
  EXPECT_EQ(invoke({"track", "--data", "x"}).code, 2);
}

TEST(Cli, InvalidConfigKeyIsNamed) {
  oracle::TempDir dir("cli_bad");
  write(dir.path() / "run.json", R"({"model": {"d": 16, "depth": 9}})");
  const Outcome r = invoke({"train", "--config", (dir.path() / "run.json").string(), "--out",
                            (dir.path() / "o").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("model.depth"), std::string::npos) << r.err;
}

TEST(Cli, InvalidGateModeIsUsageError) {
  oracle::TempDir dir("cli_gate");
  write(dir.path() / "run.json", R"({"data": {"train": ["nowhere"]}})");
  EXPECT_EQ(invoke({"train", "--config", (dir.path() / "run.json").string(), "--gate-mode", "learned",
                    "--out", (dir.path() / "o").string()})
                .code,
            2);
}

TEST(Cli, RuntimeFailureExitsOne) {
  oracle::TempDir dir("cli_rt");
  write(dir.path() / "run.json", json{{"data", {{"train", {(dir.path() / "empty").string()}}}}}.dump());
  fs::create_directories(dir.path() / "empty");
  EXPECT_EQ(invoke({"train", "--config", (dir.path() / "run.json").string(), "--out",
                    (dir.path() / "o").string()})
                .code,
            1);
}

TEST_F(CliPipeline, GenerateWritesSequencesAndManifest) {
  const fs::path data = root_ / "data";
  for (const char* f : {"amb_000.hcube", "amb_000.fc.hcube", "amb_000.gt.json", "amb_001.hcube", "manifest.json"})
    EXPECT_TRUE(fs::exists(data / f)) << f;
  const auto seq = spectrack::load_sequence(data / "amb_001.hcube");
  EXPECT_EQ(seq.size(), 6u);
  EXPECT_EQ(seq.modality.bands, 16u);
  const json m = json::parse(bytes(data / "manifest.json"));
  EXPECT_EQ(m["command"], "generate");
  EXPECT_EQ(m["seed"], 5);
  EXPECT_EQ(m["config_hash"].get<std::string>().size(), 16u);
  EXPECT_TRUE(m["versions"].contains("spectrack"));
}

TEST_F(CliPipeline, TrainTrackEvalIsDeterministic) {
  const auto before = snapshot(root_ / "data");
  const fs::path a = run_pipeline("a"), b = run_pipeline("b");
  EXPECT_EQ(bytes(a / "train" / "checkpoint.stck"), bytes(b / "train" / "checkpoint.stck"));
  EXPECT_EQ(bytes(a / "train" / "loss.csv"), bytes(b / "train" / "loss.csv"));
  EXPECT_EQ(bytes(a / "track" / "amb_000.json"), bytes(b / "track" / "amb_000.json"));
  EXPECT_EQ(bytes(a / "eval" / "metrics.json"), bytes(b / "eval" / "metrics.json"));
  EXPECT_EQ(snapshot(root_ / "data"), before);  // inputs untouched

  for (const char* stage : {"train", "track", "eval"}) EXPECT_TRUE(fs::exists(a / stage / "manifest.json"));
  std::ifstream loss(a / "train" / "loss.csv");
  std::string line;
  std::getline(loss, line);
  EXPECT_EQ(line, "step,epoch,total,bce,iou,l1");
  const json metrics = json::parse(bytes(a / "eval" / "metrics.json"));
  EXPECT_EQ(metrics["sequences"].size(), 2u);
  EXPECT_TRUE(metrics["modalities"].contains("VIS"));
  EXPECT_EQ(metrics["overall"]["success_curve"].size(), 51u);
}

TEST_F(CliPipeline, OracleResultsScorePerfectly) {
  const fs::path res = root_ / "oracle";
  fs::create_directories(res);
  for (const char* name : {"amb_000", "amb_001"}) {
    const auto gt = spectrack::load_ground_truth(root_ / "data" / (std::string(name) + ".gt.json"));
    spectrack::save_result({name, "VIS", gt}, res / (std::string(name) + ".json"));
  }
  ASSERT_EQ(invoke({"eval", "--results", res.string(), "--data", (root_ / "data").string(), "--out",
                    (root_ / "oracle_eval").string()})
                .code,
            0);
  const json m = json::parse(bytes(root_ / "oracle_eval" / "metrics.json"));
  EXPECT_DOUBLE_EQ(m["overall"]["auc"].get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(m["overall"]["dp20"].get<double>(), 1.0);

  // plot re-renders the same curves from the metrics file
  ASSERT_EQ(invoke({"plot", "--metrics", (root_ / "oracle_eval" / "metrics.json").string(), "--out",
                    (root_ / "plots").string()})
                .code,
            0);
  EXPECT_EQ(bytes(root_ / "plots" / "success.csv"), bytes(root_ / "oracle_eval" / "success.csv"));
  EXPECT_TRUE(fs::exists(root_ / "plots" / "precision.svg"));
  EXPECT_TRUE(fs::exists(root_ / "plots" / "manifest.json"));
}

TEST_F(CliPipeline, ModalityFilterSkipsOtherSequences) {
  const fs::path out = run_pipeline("m");
  const Outcome r = invoke({"eval", "--results", (out / "track").string(), "--data", (root_ / "data").string(),
                            "--modality", "NIR", "--out", (root_ / "none").string()});
  EXPECT_EQ(r.code, 1);  // nothing left to score
}

TEST_F(CliPipeline, InflateReplacesSpectralEmbedding) {
  const fs::path out = run_pipeline("i");
  ASSERT_EQ(invoke({"inflate", "--checkpoint", (out / "train" / "checkpoint.stck").string(), "--bands", "6",
                    "--out", (root_ / "inflated").string()})
                .code,
            0);
  const auto src = spectrack::load_checkpoint(out / "train" / "checkpoint.stck");
  const auto dst = spectrack::load_checkpoint(root_ / "inflated" / "inflated.stck");
  EXPECT_EQ(dst.params.at(spectrack::tok::kEmbedHsi),
            spectrack::inflate_embedding(src.params.at(spectrack::tok::kEmbedFc), 6));
  EXPECT_EQ(dst.params.at(spectrack::tok::kBiasHsi), src.params.at(spectrack::tok::kBiasFc));
  EXPECT_EQ(dst.meta["model"]["bands"], 6);
  EXPECT_EQ(invoke({"inflate", "--checkpoint", (out / "train" / "checkpoint.stck").string(), "--bands", "0",
                    "--out", (root_ / "bad").string()})
                .code,
            2);
}
