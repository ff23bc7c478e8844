#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pvae/cli/cli.hpp"
#include "pvae/cli/report.hpp"

using namespace pvae::cli;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "pvae");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<Record> records(const std::string& text) {
  std::vector<Record> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(parse_record(line));
  return out;
}

std::string field(const Record& r, const std::string& key) {
  for (const auto& [k, v] : r)
    if (k == key) return v;
  return "";
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / "pvae_cli_test";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    const auto r = run_cli({"gen-synth", "--data", path("corpus.txt"), "--size", "200", "--seed", "4"});
    ASSERT_EQ(r.code, 0) << r.err;
  }

  static std::string path(const std::string& name) { return (dir_ / name).string(); }

  static std::vector<std::string> tiny_train(const std::string& ckpt) {
    return {"train",  "--data",   path("corpus.txt"), "--checkpoint", path(ckpt), "--hidden", "8", "--embed", "8",
            "--sem-dim", "4", "--syn-dim", "2", "--epochs", "2", "--batch-size", "16", "--seed", "4"};
  }

  static fs::path dir_;
};

fs::path CliTest::dir_;

}  // namespace

TEST(Cli, UnknownSubcommandIsUsageError) {
  const auto r = run_cli({"fly"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("gen-synth"), std::string::npos);  // usage lists the subcommands
}

TEST(Cli, MissingSubcommandIsUsageError) { EXPECT_EQ(run_cli({}).code, 1); }

TEST(Cli, HelpExitsZero) {
  const auto r = run_cli({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("--proximity"), std::string::npos);
}

TEST(Cli, BadFlagValuesAreUsageErrors) {
  EXPECT_EQ(run_cli({"train", "--proximity", "euclid"}).code, 1);
  EXPECT_EQ(run_cli({"train", "--epochs", "many"}).code, 1);
  EXPECT_EQ(run_cli({"train", "--no-such-flag", "1"}).code, 1);
}

TEST_F(CliTest, UnknownConfigKeyNamesTheKey) {
  std::ofstream(path("bad.cfg")) << "epochs = 2\nwarp_factor = 9\n";
  const auto r = run_cli({"train", "--config", path("bad.cfg"), "--data", path("corpus.txt")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("warp_factor"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find(":2:"), std::string::npos) << r.err;
}

TEST_F(CliTest, MissingInputIsDataErrorNamingTheFile) {
  const auto r = run_cli({"train", "--data", path("absent.txt"), "--checkpoint", path("x.bin")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("absent.txt"), std::string::npos) << r.err;
}

TEST_F(CliTest, TrainingTwiceIsByteIdentical) {
  auto args = tiny_train("d.bin");
  args.insert(args.end(), {"--report", path("d.report")});
  ASSERT_EQ(run_cli(args).code, 0);
  const std::string ckpt = slurp(path("d.bin")), report = slurp(path("d.report"));
  ASSERT_EQ(run_cli(args).code, 0);
  EXPECT_EQ(slurp(path("d.bin")), ckpt);
  EXPECT_EQ(slurp(path("d.report")), report);
}

TEST_F(CliTest, ManifestComesFirstWithConfigAndHashes) {
  auto args = tiny_train("m.bin");
  const auto r = run_cli(args);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto recs = records(r.out);
  ASSERT_FALSE(recs.empty());
  EXPECT_EQ(field(recs[0], "record"), "manifest");
  EXPECT_EQ(field(recs[0], "command"), "train");
  EXPECT_EQ(field(recs[0], "epochs"), "2");
  EXPECT_EQ(field(recs[0], "proximity"), "cosine");
  EXPECT_EQ(field(recs[0], "input.data.sha256").size(), 64u);
  EXPECT_EQ(field(recs.back(), "record"), "checkpoint");
  std::size_t epochs = 0;
  for (const auto& rec : recs) epochs += field(rec, "record") == "epoch";
  EXPECT_EQ(epochs, 2u);
}

TEST_F(CliTest, FlagsOverrideConfigFile) {
  std::ofstream(path("run.cfg")) << "# tiny run\nepochs = 3\nlambda_sem = 0.5\n";
  auto args = tiny_train("o.bin");
  args.insert(args.end(), {"--config", path("run.cfg")});
  const auto r = run_cli(args);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto m = records(r.out)[0];
  EXPECT_EQ(field(m, "epochs"), "2");
  EXPECT_EQ(field(m, "lambda-sem"), "0.5");
}

TEST_F(CliTest, EvaluationCommandsRunOnATrainedCheckpoint) {
  ASSERT_EQ(run_cli(tiny_train("e.bin")).code, 0);
  const std::vector<std::string> common{"--data", path("corpus.txt"), "--checkpoint", path("e.bin")};
  auto with = [&](std::vector<std::string> a) {
    a.insert(a.end(), common.begin(), common.end());
    return run_cli(a);
  };
  const auto transfer = with({"eval-transfer", "--pairs", "20"});
  ASSERT_EQ(transfer.code, 0) << transfer.err;
  const auto tr = records(transfer.out);
  EXPECT_EQ(field(tr[0], "record"), "manifest");
  EXPECT_EQ(field(tr[0], "input.checkpoint.sha256"), sha256_file(path("e.bin")));
  EXPECT_EQ(field(tr[0], "input.data.sha256"), sha256_file(path("corpus.txt")));
  EXPECT_EQ(field(tr.back(), "record"), "transfer");

  const auto examples = with({"transfer-examples", "--pairs", "5"});
  ASSERT_EQ(examples.code, 0) << examples.err;
  EXPECT_EQ(records(examples.out).size(), 6u);

  const auto corr = with({"corr", "--count", "100"});
  ASSERT_EQ(corr.code, 0) << corr.err;
  EXPECT_EQ(field(records(corr.out).back(), "pairs"), "8");

  const auto recon = with({"eval-recon", "--count", "20"});
  ASSERT_EQ(recon.code, 0) << recon.err;
  EXPECT_FALSE(field(records(recon.out).back(), "forward_ppl").empty());

  const auto sample = run_cli({"sample", "--checkpoint", path("e.bin"), "--count", "3", "--temperature", "0.8"});
  ASSERT_EQ(sample.code, 0) << sample.err;
  EXPECT_EQ(records(sample.out).size(), 4u);
}

TEST_F(CliTest, EvaluationDoesNotModifyInputs) {
  ASSERT_EQ(run_cli(tiny_train("n.bin")).code, 0);
  const auto before_data = slurp(path("corpus.txt")), before_ckpt = slurp(path("n.bin"));
  ASSERT_EQ(run_cli({"eval-transfer", "--data", path("corpus.txt"), "--checkpoint", path("n.bin"), "--pairs", "5"}).code,
            0);
  EXPECT_EQ(slurp(path("corpus.txt")), before_data);
  EXPECT_EQ(slurp(path("n.bin")), before_ckpt);
}

TEST_F(CliTest, NonFiniteTrainingExitsThree) {
  auto args = tiny_train("nan.bin");
  args.insert(args.end(), {"--lr", "1e200", "--clip-norm", "0"});
  const auto r = run_cli(args);
  EXPECT_EQ(r.code, 3) << r.err;
}

TEST(Cli, GradCheckPasses) {
  const auto r = run_cli({"grad-check", "--seed", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::size_t checks = 0;
  for (const auto& rec : records(r.out)) {
    if (field(rec, "record") != "grad_check") continue;
    ++checks;
    EXPECT_EQ(field(rec, "pass"), "1") << field(rec, "proximity");
  }
  EXPECT_EQ(checks, 5u);
}
