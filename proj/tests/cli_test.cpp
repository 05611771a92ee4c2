// Drives the nssi binary end to end through the shell.

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "run_config.hpp"

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           ("nssi_cli_" + std::string(info->name()) + "_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Exit status of `nssi ARGS`; stdout/stderr land in out.txt / err.txt.
  int run(const std::string& args) {
    const std::string cmd = "cd '" + dir_.string() + "' && '" NSSI_CLI_PATH "' " + args +
                            " >out.txt 2>err.txt";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string slurp(const std::string& name) const {
    std::ifstream in(path(name), std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  }
  std::string out() const { return slurp("out.txt"); }
  std::string err() const { return slurp("err.txt"); }

  void make_corpus(const std::string& name, double separation, int n = 100, int seed = 7) {
    ASSERT_EQ(run("synth --n-per-class " + std::to_string(n) + " --separation " +
                  std::to_string(separation) + " --seed " + std::to_string(seed) +
                  " --out " + name),
              0)
        << err();
  }

  fs::path dir_;
};

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

TEST_F(Cli, SynthWritesOneLinePerProfile) {
  make_corpus("c.jsonl", 1.0);
  EXPECT_EQ(count_lines(slurp("c.jsonl")), 200u);
  EXPECT_NE(err().find("seed=7"), std::string::npos);
}

TEST_F(Cli, MissingSeedIsUsageError) {
  EXPECT_EQ(run("synth --n-per-class 10 --out c.jsonl"), 2);
  EXPECT_NE(err().find("--seed"), std::string::npos);
}

TEST_F(Cli, OutOfRangeSeparationNamesFlag) {
  EXPECT_EQ(run("synth --separation 1.5 --seed 1 --out c.jsonl"), 2);
  EXPECT_NE(err().find("--separation"), std::string::npos);
}

TEST_F(Cli, UnknownSubcommandAndHelp) {
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("evaluate --help"), 0);
  EXPECT_NE(out().find("--k-folds"), std::string::npos);
}

TEST_F(Cli, ConfigFileSuppliesDefaultsAndFlagsOverride) {
  std::ofstream(path("cfg.json")) << R"({"seed": 3, "n_per_class": 4, "separation": 1.0})";
  ASSERT_EQ(run("synth --config cfg.json --out a.jsonl"), 0) << err();
  EXPECT_EQ(count_lines(slurp("a.jsonl")), 8u);
  ASSERT_EQ(run("synth --config cfg.json --n-per-class 5 --out b.jsonl"), 0) << err();
  EXPECT_EQ(count_lines(slurp("b.jsonl")), 10u);
}

TEST_F(Cli, BadConfigFileIsUsageError) {
  std::ofstream(path("bad.json")) << R"({"seeed": 3})";
  EXPECT_EQ(run("synth --config bad.json --out a.jsonl"), 2);
  EXPECT_NE(err().find("seeed"), std::string::npos);
  std::ofstream(path("range.json")) << R"({"seed": 3, "separation": 2.0})";
  EXPECT_EQ(run("synth --config range.json --out a.jsonl"), 2);
  EXPECT_NE(err().find("--separation"), std::string::npos);
}

TEST_F(Cli, EvaluateDefaultsGiveSixRowsOfTwentyFiveRuns) {
  make_corpus("c.jsonl", 1.0);
  ASSERT_EQ(run("evaluate --corpus c.jsonl --seed 1 --min-df 5 --topics 4 --lda-iters 60 "
                "--lda-burn-in 40 --lda-sample-lag 5 --fold-in-iters 20 --fold-in-burn-in 10 "
                "--out-json r.json"),
            0)
      << err();
  const auto table = out();
  EXPECT_EQ(count_lines(table), 7u) << table;
  for (const char* row : {"Simple-Count (NB)", "TF-IDF (LR)", "LDA-Topic-Distribution (LR)"})
    EXPECT_NE(table.find(row), std::string::npos) << row;
  const auto j = nlohmann::json::parse(slurp("r.json"));
  ASSERT_EQ(j.at("results").size(), 6u);
  for (const auto& [key, r] : j.at("results").items()) EXPECT_EQ(r.at("runs"), 25) << key;
}

TEST_F(Cli, EvaluateFiltersConfigurations) {
  make_corpus("c.jsonl", 1.0);
  ASSERT_EQ(run("evaluate --corpus c.jsonl --seed 1 --min-df 5 --features tfidf --model lr "
                "--out-json r.json"),
            0)
      << err();
  const auto j = nlohmann::json::parse(slurp("r.json"));
  ASSERT_EQ(j.at("results").size(), 1u);
  EXPECT_TRUE(j.at("results").contains("tfidf_lr"));
  EXPECT_EQ(run("evaluate --corpus c.jsonl --seed 1 --features word2vec"), 2);
}

TEST_F(Cli, EvaluateIsByteIdenticalAcrossRunsAndJobs) {
  make_corpus("c.jsonl", 0.5);
  const std::string base = "evaluate --corpus c.jsonl --seed 9 --min-df 5 --topics 4 "
                           "--lda-iters 60 --lda-burn-in 40 --lda-sample-lag 5 "
                           "--fold-in-iters 20 --fold-in-burn-in 10 ";
  ASSERT_EQ(run(base + "--jobs 1 --out-json a.json"), 0) << err();
  ASSERT_EQ(run(base + "--jobs 1 --out-json b.json"), 0) << err();
  ASSERT_EQ(run(base + "--jobs 8 --out-json c.json"), 0) << err();
  EXPECT_EQ(slurp("a.json"), slurp("b.json"));
  EXPECT_EQ(slurp("a.json"), slurp("c.json"));
  ASSERT_EQ(run("evaluate --corpus c.jsonl --seed 10 --min-df 5 --features count "
                "--out-json d.json"),
            0);
  EXPECT_NE(slurp("a.json"), slurp("d.json"));
}

TEST_F(Cli, EvaluateMissingCorpusIsDataError) {
  EXPECT_EQ(run("evaluate --corpus nope.jsonl --seed 1"), 1);
  EXPECT_NE(err().find("nope.jsonl"), std::string::npos);
}

TEST_F(Cli, RankPlantedSignaturesFillTopList) {
  make_corpus("c.jsonl", 1.0);
  ASSERT_EQ(run("rank --corpus c.jsonl --seed 1 --min-df 0 --top 10 --out-json r.json"), 0)
      << err();
  const auto j = nlohmann::json::parse(slurp("r.json"));
  ASSERT_EQ(j.at("top").size(), 10u);
  for (const auto& f : j.at("top"))
    EXPECT_EQ(f.at("term").get<std::string>().rfind("pos signature", 0), 0u) << f;
  for (const auto& f : j.at("bottom"))
    EXPECT_EQ(f.at("term").get<std::string>().rfind("neg signature", 0), 0u) << f;
}

TEST_F(Cli, RankDefaultsToTwentyEach) {
  make_corpus("c.jsonl", 0.5);
  ASSERT_EQ(run("rank --corpus c.jsonl --seed 1 --min-df 2 --out-json r.json"), 0) << err();
  const auto j = nlohmann::json::parse(slurp("r.json"));
  EXPECT_EQ(j.at("top").size(), 20u);
  EXPECT_EQ(j.at("bottom").size(), 20u);
  EXPECT_EQ(count_lines(out()), 21u);
}

TEST_F(Cli, RankValidation) {
  make_corpus("c.jsonl", 0.5);
  EXPECT_EQ(run("rank --corpus c.jsonl --seed 1 --top 0"), 2);
  EXPECT_NE(err().find("--top"), std::string::npos);
  std::ofstream(path("one.jsonl")) << R"({"id":"a","label":"positive","interests":["x"]})"
                                   << "\n";
  EXPECT_EQ(run("rank --corpus one.jsonl --seed 1 --min-df 0"), 1);
}

TEST_F(Cli, TrainThenPredictSeparable) {
  make_corpus("c.jsonl", 1.0);
  ASSERT_EQ(run("train --corpus c.jsonl --seed 2 --min-df 5 --out m.json"), 0) << err();
  EXPECT_TRUE(fs::exists(path("m.vocab.json")));
  EXPECT_FALSE(fs::exists(path("m.topics.json")));
  ASSERT_EQ(run("predict --model-file m.json --corpus c.jsonl"), 0) << err();
  std::istringstream lines(out());
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    const auto id = j.at("id").get<std::string>();
    const auto label = j.at("label").get<std::string>();
    EXPECT_EQ(label, id.rfind("pos-", 0) == 0 ? "positive" : "negative") << line;
    EXPECT_TRUE(j.at("score").is_number());
    ++n;
  }
  EXPECT_EQ(n, 200u);
}

TEST_F(Cli, TrainLdaWritesTopicModel) {
  make_corpus("c.jsonl", 1.0, 30);
  ASSERT_EQ(run("train --corpus c.jsonl --seed 2 --min-df 2 --features lda --model nb --topics 3 "
                "--lda-iters 40 --lda-burn-in 20 --lda-sample-lag 5 --out m.json"),
            0)
      << err();
  EXPECT_TRUE(fs::exists(path("m.topics.json")));
  ASSERT_EQ(run("predict --model-file m.json --corpus c.jsonl --out p.jsonl"), 0) << err();
  EXPECT_EQ(count_lines(slurp("p.jsonl")), 60u);
}

TEST_F(Cli, PredictTruncatedModelReportsByteOffset) {
  make_corpus("c.jsonl", 1.0);
  ASSERT_EQ(run("train --corpus c.jsonl --seed 2 --min-df 5 --out m.json"), 0) << err();
  const auto model = slurp("m.json");
  std::ofstream(path("t.json"), std::ios::binary) << model.substr(0, model.size() / 2);
  EXPECT_EQ(run("predict --model-file t.json --vocab m.vocab.json --corpus c.jsonl"), 1);
  EXPECT_NE(err().find("byte"), std::string::npos) << err();
  EXPECT_NE(err().find("t.json"), std::string::npos) << err();
}

TEST_F(Cli, PredictVocabularyMismatchShowsBothFingerprints) {
  make_corpus("c.jsonl", 1.0);
  make_corpus("d.jsonl", 0.5, 10, 3);
  ASSERT_EQ(run("train --corpus c.jsonl --seed 2 --min-df 5 --out a.json"), 0) << err();
  ASSERT_EQ(run("train --corpus d.jsonl --seed 2 --min-df 0 --out b.json"), 0) << err();
  const auto fa = nlohmann::json::parse(slurp("a.json")).at("vocab_fingerprint").get<std::string>();
  const auto fb = nlohmann::json::parse(slurp("b.json")).at("vocab_fingerprint").get<std::string>();
  ASSERT_NE(fa, fb);
  EXPECT_EQ(run("predict --model-file a.json --vocab b.vocab.json --corpus c.jsonl"), 1);
  EXPECT_NE(err().find(fa), std::string::npos) << err();
  EXPECT_NE(err().find(fb), std::string::npos) << err();
}

// In-process checks of the config plumbing.

TEST(RunConfig, SiblingPaths) {
  EXPECT_EQ(nssi::cli::sibling_path("out/model.json", "vocab"), "out/model.vocab.json");
  EXPECT_EQ(nssi::cli::sibling_path("model", "topics"), "model.topics.json");
}

TEST(RunConfig, DefaultsMatchDocumentedValues) {
  nssi::cli::RunConfig c;
  c.seed = 1;
  const auto p = nssi::cli::protocol_config(c);
  EXPECT_EQ(p.vocab.min_df, 100u);
  EXPECT_DOUBLE_EQ(p.vocab.max_df_ratio, 0.70);
  EXPECT_EQ(p.folds, 5u);
  EXPECT_EQ(p.resamples, 5u);
  EXPECT_EQ(p.lda.topics, 10u);
  EXPECT_DOUBLE_EQ(p.lda.resolved_alpha(), 5.0);
  EXPECT_DOUBLE_EQ(p.lda.beta, 0.01);
  EXPECT_DOUBLE_EQ(p.lr.lambda, 1.0);
  EXPECT_DOUBLE_EQ(p.lr.tol, 1e-6);
  EXPECT_EQ(p.lr.max_iter, 1000u);
  EXPECT_DOUBLE_EQ(p.nb_smoothing, 1.0);
  EXPECT_EQ(p.configurations.size(), 6u);
}

TEST(RunConfig, SeedIsRequired) {
  nssi::cli::RunConfig c;
  EXPECT_THROW(nssi::cli::protocol_config(c), nssi::cli::UsageError);
  EXPECT_THROW(nssi::cli::synth_params(c), nssi::cli::UsageError);
}

TEST(RunConfig, ValidationMessagesNameFlags) {
  auto expect_flag = [](nssi::cli::RunConfig c, const std::string& flag) {
    try {
      nssi::cli::validate(c);
      ADD_FAILURE() << "expected UsageError for " << flag;
    } catch (const nssi::cli::UsageError& e) {
      EXPECT_NE(std::string(e.what()).find(flag), std::string::npos) << e.what();
    }
  };
  nssi::cli::RunConfig c;
  c.k_folds = 1;
  expect_flag(c, "--k-folds");
  c = {};
  c.max_df_ratio = 0.0;
  expect_flag(c, "--max-df-ratio");
  c = {};
  c.top = 0;
  expect_flag(c, "--top");
  c = {};
  c.features = {"bogus"};
  expect_flag(c, "--features");
  c = {};
  c.lda_burn_in = 2000;
  expect_flag(c, "--lda-burn-in");
}

}  // namespace
