#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include <gtest/gtest.h>

#include "i2v/session_io.hpp"

#ifndef I2V_CLI_PATH
#error "I2V_CLI_PATH must point at the i2v binary"
#endif

namespace i2v {
namespace {

namespace fs = std::filesystem;

struct CliResult {
  int exit_code = -1;
  std::string stdout_text;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("i2v_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const {
    return (dir_ / name).string();
  }

  CliResult run(const std::string& args) const {
    const std::string out_file = path("stdout.capture");
    const std::string command = std::string(I2V_CLI_PATH) + " " + args + " > " +
                                out_file + " 2> " + path("stderr.capture");
    const int status = std::system(command.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out_file);
    std::stringstream buffer;
    buffer << in.rdbuf();
    result.stdout_text = buffer.str();
    return result;
  }

  static std::string slurp(const std::string& file) {
    std::ifstream in(file, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
  }

  fs::path dir_;
};

TEST_F(CliTest, VersionPrintsFormats) {
  const auto result = run("version");
  EXPECT_EQ(result.exit_code, 0);
  EXPECT_NE(result.stdout_text.find("i2v"), std::string::npos);
  EXPECT_NE(result.stdout_text.find("I2V1"), std::string::npos);
  EXPECT_NE(result.stdout_text.find("HNW1"), std::string::npos);
}

TEST_F(CliTest, HelpIsAvailableEverywhere) {
  EXPECT_EQ(run("--help").exit_code, 0);
  for (const char* sub : {"gen", "train", "index", "query", "eval"}) {
    const auto result = run(std::string(sub) + " --help");
    EXPECT_EQ(result.exit_code, 0) << sub;
    EXPECT_NE(result.stdout_text.find("--"), std::string::npos) << sub;
  }
}

TEST_F(CliTest, GenIsByteReproducible) {
  const std::string flags =
      " --items 30 --clusters 3 --sessions 60 --seed 7 --out ";
  ASSERT_EQ(run("gen" + flags + path("a")).exit_code, 0);
  ASSERT_EQ(run("gen" + flags + path("b")).exit_code, 0);
  EXPECT_EQ(slurp(path("a.sessions")), slurp(path("b.sessions")));
  EXPECT_EQ(slurp(path("a.taxonomy")), slurp(path("b.taxonomy")));
  EXPECT_EQ(slurp(path("a.truth")), slurp(path("b.truth")));
}

TEST_F(CliTest, GenRejectsZeroItems) {
  const auto result = run("gen --items 0 --sessions 5 --out " + path("x"));
  EXPECT_EQ(result.exit_code, 1);
}

TEST_F(CliTest, GenOutputParsesCleanly) {
  ASSERT_EQ(
      run("gen --items 20 --clusters 4 --sessions 40 --seed 3 --out " +
          path("c"))
          .exit_code,
      0);
  const auto parsed = load_sessions(path("c.sessions"), 1);
  EXPECT_EQ(parsed.sessions.size(), 40u);
}

TEST_F(CliTest, MissingInputIsUsageError) {
  EXPECT_EQ(run("train --output " + path("emb")).exit_code, 1);
  EXPECT_EQ(run("nonsense").exit_code, 1);
}

TEST_F(CliTest, TrainOnMissingFileIsDataError) {
  const auto result = run("train --input " + path("absent.sessions") +
                          " --output " + path("emb"));
  EXPECT_EQ(result.exit_code, 2);
}

TEST_F(CliTest, EmptyVocabularyIsDataError) {
  ASSERT_EQ(run("gen --items 10 --clusters 2 --sessions 8 --seed 1 --out " +
                path("tiny"))
                .exit_code,
            0);
  const auto result =
      run("train --input " + path("tiny.sessions") + " --output " +
          path("emb") + " --min-count 100000");
  EXPECT_EQ(result.exit_code, 2);
}

TEST_F(CliTest, DeterministicTrainingIsBitIdentical) {
  ASSERT_EQ(run("gen --items 25 --clusters 5 --sessions 80 --seed 11 --out " +
                path("corpus"))
                .exit_code,
            0);
  const std::string train_flags = " --input " + path("corpus.sessions") +
                                  " --taxonomy " + path("corpus.taxonomy") +
                                  " --dim 8 --epochs 2 --min-count 2"
                                  " --deterministic --threads 1 --seed 3"
                                  " --output ";
  ASSERT_EQ(run("train" + train_flags + path("e1")).exit_code, 0);
  ASSERT_EQ(run("train" + train_flags + path("e2")).exit_code, 0);
  EXPECT_EQ(slurp(path("e1.bin")), slurp(path("e2.bin")));
  EXPECT_EQ(slurp(path("e1.tokens")), slurp(path("e2.tokens")));
  EXPECT_EQ(slurp(path("e1.txt")), slurp(path("e2.txt")));
}

TEST_F(CliTest, DeterministicWithMultipleThreadsIsUsageError) {
  ASSERT_EQ(run("gen --items 10 --clusters 2 --sessions 10 --seed 1 --out " +
                path("g"))
                .exit_code,
            0);
  EXPECT_EQ(run("train --input " + path("g.sessions") + " --output " +
                path("e") + " --deterministic --threads 2")
                .exit_code,
            1);
}

TEST_F(CliTest, NoInteractionCollapsesVocabulary) {
  ASSERT_EQ(run("gen --items 15 --clusters 3 --sessions 60 --seed 5 --out " +
                path("corpus"))
                .exit_code,
            0);
  ASSERT_EQ(run("train --input " + path("corpus.sessions") +
                " --dim 8 --epochs 1 --min-count 1 --no-interaction"
                " --output " +
                path("flat"))
                .exit_code,
            0);
  std::ifstream tokens(path("flat.tokens"));
  std::string line;
  std::size_t count = 0;
  while (std::getline(tokens, line)) {
    if (line.empty()) continue;
    ++count;
    EXPECT_NE(line.find("|view"), std::string::npos) << line;
  }
  EXPECT_LE(count, 15u);
}

class CliPipelineTest : public CliTest {
 protected:
  void build_pipeline() {
    ASSERT_EQ(run("gen --items 20 --clusters 4 --sessions 150 --seed 9 --out " +
                  path("corpus"))
                  .exit_code,
              0);
    ASSERT_EQ(run("train --input " + path("corpus.sessions") + " --taxonomy " +
                  path("corpus.taxonomy") +
                  " --dim 8 --epochs 2 --min-count 2 --seed 4 --output " +
                  path("emb"))
                  .exit_code,
              0);
    ASSERT_EQ(run("index --embeddings " + path("emb.bin") +
                  " --M 8 --ef-construction 32 --output " + path("emb.idx"))
                  .exit_code,
              0);
  }
};

TEST_F(CliPipelineTest, QueryFiltersToTargetInteraction) {
  build_pipeline();
  // Find an indexed view token to query.
  std::ifstream tokens(path("emb.idx.tokens"));
  std::string token, line;
  while (std::getline(tokens, line))
    if (line.find("|view") != std::string::npos) {
      token = line;
      break;
    }
  ASSERT_FALSE(token.empty());

  const auto result = run("query --index " + path("emb.idx") + " --token '" +
                          token + "' --target purchase --k 5");
  EXPECT_EQ(result.exit_code, 0);
  std::istringstream out(result.stdout_text);
  std::string query_echo, entries;
  std::getline(out, query_echo, '\t');
  std::getline(out, entries);
  EXPECT_EQ(query_echo, token);
  if (!entries.empty()) {
    std::size_t count = 1;
    for (char c : entries) count += c == ',';
    EXPECT_LE(count, 5u);
    std::istringstream list(entries);
    std::string entry;
    while (std::getline(list, entry, ','))
      EXPECT_NE(entry.find(":purchase:"), std::string::npos) << entry;
  }
}

TEST_F(CliPipelineTest, UnknownTokenExitsWithOovCode) {
  build_pipeline();
  const auto result = run("query --index " + path("emb.idx") +
                          " --token 'doesnotexist|view' --k 5");
  EXPECT_EQ(result.exit_code, 3);
}

TEST_F(CliPipelineTest, IndexBuildIsDeterministic) {
  build_pipeline();
  ASSERT_EQ(run("index --embeddings " + path("emb.bin") +
                " --M 8 --ef-construction 32 --output " + path("emb2.idx"))
                .exit_code,
            0);
  EXPECT_EQ(slurp(path("emb.idx")), slurp(path("emb2.idx")));
}

TEST_F(CliPipelineTest, TextEmbeddingsAreIndexableToo) {
  build_pipeline();
  ASSERT_EQ(run("index --embeddings " + path("emb.txt") +
                " --M 8 --ef-construction 32 --output " + path("text.idx"))
                .exit_code,
            0);
  EXPECT_TRUE(fs::exists(path("text.idx.tokens")));
}

TEST_F(CliPipelineTest, EvalPrintsReportWithPercentChange) {
  build_pipeline();
  ASSERT_EQ(run("gen --items 20 --clusters 4 --sessions 60 --seed 10 --out " +
                path("test"))
                .exit_code,
            0);
  const auto result =
      run("eval --index " + path("emb.idx") + " --test " + path("test.sessions") +
          " --target purchase --k 10 --baseline random --seed 2");
  EXPECT_EQ(result.exit_code, 0);
  EXPECT_NE(result.stdout_text.find("method=embedding"), std::string::npos);
  EXPECT_NE(result.stdout_text.find("method=random"), std::string::npos);
  EXPECT_NE(result.stdout_text.find("pct_change_vs_random="), std::string::npos);
  EXPECT_NE(result.stdout_text.find("item_coverage="), std::string::npos);
}

TEST_F(CliPipelineTest, ManifestsAreWrittenAlongsideArtifacts) {
  build_pipeline();
  for (const char* artifact : {"corpus", "emb", "emb.idx"})
    EXPECT_TRUE(fs::exists(path(std::string(artifact) + ".manifest.json")))
        << artifact;
}

TEST_F(CliPipelineTest, EvalSupportsNoInteractionBaselineAndScopes) {
  build_pipeline();
  ASSERT_EQ(run("train --input " + path("corpus.sessions") +
                " --dim 8 --epochs 2 --min-count 2 --seed 4 --no-interaction"
                " --output " +
                path("flat"))
                .exit_code,
            0);
  ASSERT_EQ(run("index --embeddings " + path("flat.bin") +
                " --M 8 --ef-construction 32 --output " + path("flat.idx"))
                .exit_code,
            0);
  ASSERT_EQ(run("gen --items 20 --clusters 4 --sessions 60 --seed 12 --out " +
                path("test"))
                .exit_code,
            0);

  for (const char* scope : {"after", "any"}) {
    const auto result = run("eval --index " + path("emb.idx") + " --test " +
                            path("test.sessions") +
                            " --target purchase --k 10 --scope " + scope +
                            " --baseline no-interaction --baseline-index " +
                            path("flat.idx"));
    EXPECT_EQ(result.exit_code, 0) << scope;
    EXPECT_NE(result.stdout_text.find("method=no-interaction"),
              std::string::npos);
    EXPECT_NE(result.stdout_text.find("pct_change_vs_no-interaction="),
              std::string::npos);
  }

  EXPECT_EQ(run("eval --index " + path("emb.idx") + " --test " +
                path("test.sessions") + " --scope sideways")
                .exit_code,
            1);
}

TEST_F(CliPipelineTest, EvalRunsCoPurchaseAsTheMainMethod) {
  build_pipeline();
  ASSERT_EQ(run("gen --items 20 --clusters 4 --sessions 60 --seed 13 --out " +
                path("test"))
                .exit_code,
            0);
  const auto result =
      run("eval --copurchase " + path("corpus.sessions") + " --test " +
          path("test.sessions") + " --target purchase --k 10");
  EXPECT_EQ(result.exit_code, 0);
  EXPECT_NE(result.stdout_text.find("method=copurchase"), std::string::npos);

  // Exactly one of --index / --copurchase is allowed.
  EXPECT_EQ(run("eval --index " + path("emb.idx") + " --copurchase " +
                path("corpus.sessions") + " --test " + path("test.sessions"))
                .exit_code,
            1);
  EXPECT_EQ(run("eval --test " + path("test.sessions")).exit_code, 1);
}

}  // namespace
}  // namespace i2v
