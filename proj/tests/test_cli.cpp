#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "criss/io.hpp"

namespace {

namespace fs = std::filesystem;

struct CliResult {
    int exit_code;
    std::string output;  // stdout + stderr
};

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const char* bin = std::getenv("CRISS_BIN");
        ASSERT_NE(bin, nullptr) << "CRISS_BIN must point at the criss executable";
        bin_ = bin;
        dir_ = fs::temp_directory_path() /
               ("criss_cli_" + std::to_string(::getpid()) + "_" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    CliResult run(const std::string& args) {
        const fs::path out = dir_ / "cli_output.txt";
        const std::string cmd = bin_ + " " + args + " > " + out.string() + " 2>&1";
        const int status = std::system(cmd.c_str());
        CliResult result;
        result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        std::ifstream in(out);
        result.output.assign(std::istreambuf_iterator<char>(in),
                             std::istreambuf_iterator<char>());
        return result;
    }

    std::string write_file(const std::string& name, const std::string& content) {
        const fs::path p = dir_ / name;
        std::ofstream out(p, std::ios::binary);
        out << content;
        return p.string();
    }

    static std::string slurp(const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    }

    std::string bin_;
    fs::path dir_;
};

TEST_F(CliTest, VersionFlag) {
    const auto r = run("--version");
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_NE(r.output.find("criss"), std::string::npos);
}

TEST_F(CliTest, EmbedWritesHeaderWithRowCount) {
    const auto corpus = write_file("c.txt", "one sentence\nanother one\na third\n");
    const auto out = (dir_ / "c.crem").string();
    const auto r = run("embed " + corpus + " --lang en --dim 16 --seed 3 --out " + out);
    ASSERT_EQ(r.exit_code, 0) << r.output;
    const auto m = criss::read_matrix(out, "en");
    EXPECT_EQ(m.rows(), 3u);
    EXPECT_EQ(m.dim(), 16u);
}

TEST_F(CliTest, EmbedDeterministic) {
    const auto corpus = write_file("c.txt", "alpha beta\ngamma delta\n");
    const auto a = (dir_ / "a.crem").string();
    const auto b = (dir_ / "b.crem").string();
    ASSERT_EQ(run("embed " + corpus + " --lang en --dim 16 --seed 9 --out " + a).exit_code, 0);
    ASSERT_EQ(run("embed " + corpus + " --lang en --dim 16 --seed 9 --out " + b).exit_code, 0);
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_EQ(slurp(a + ".ids"), slurp(b + ".ids"));
}

TEST_F(CliTest, EmbedUnwritableOutExitsOne) {
    const auto corpus = write_file("c.txt", "one\ntwo\n");
    const auto r = run("embed " + corpus + " --lang en --dim 16 --out /nonexistent_dir/x.crem");
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.output.find("error"), std::string::npos);
}

TEST_F(CliTest, EmbedMissingCorpusExitsOne) {
    const auto r = run("embed " + (dir_ / "missing.txt").string() +
                       " --lang en --out " + (dir_ / "x.crem").string());
    EXPECT_EQ(r.exit_code, 1);
}

TEST_F(CliTest, EmbedBadDimExitsTwo) {
    const auto corpus = write_file("c.txt", "one\ntwo\n");
    const auto r = run("embed " + corpus + " --lang en --dim 4 --out " +
                       (dir_ / "x.crem").string());
    EXPECT_EQ(r.exit_code, 2);
}

TEST_F(CliTest, MineSelfPairsNonEmpty) {
    const auto corpus = write_file("c.txt", "one sentence here\nanother sentence\nthird line text\n");
    const auto emb = (dir_ / "c.crem").string();
    ASSERT_EQ(run("embed " + corpus + " --lang en --dim 16 --seed 1 --out " + emb).exit_code, 0);
    const auto tsv = (dir_ / "mined.tsv").string();
    const auto r = run("mine --src-emb " + emb + " --tgt-emb " + emb + " --src-corpus " +
                       corpus + " --tgt-corpus " + corpus +
                       " --src-lang en --tgt-lang en --tau 1.0 --out " + tsv);
    ASSERT_EQ(r.exit_code, 0) << r.output;
    EXPECT_FALSE(slurp(tsv).empty());
    EXPECT_NE(r.output.find("count"), std::string::npos);  // stats summary on stdout
}

TEST_F(CliTest, MineVacuousThresholdEmptyTsvStillExitsZero) {
    const auto corpus = write_file("c.txt", "one sentence\nanother sentence\n");
    const auto emb = (dir_ / "c.crem").string();
    ASSERT_EQ(run("embed " + corpus + " --lang en --dim 16 --out " + emb).exit_code, 0);
    const auto tsv = (dir_ / "mined.tsv").string();
    const auto r = run("mine --src-emb " + emb + " --tgt-emb " + emb + " --src-corpus " +
                       corpus + " --tgt-corpus " + corpus + " --tau 10 --out " + tsv);
    EXPECT_EQ(r.exit_code, 0) << r.output;
    EXPECT_TRUE(slurp(tsv).empty());
}

TEST_F(CliTest, MineRowMismatchExitsTwo) {
    const auto corpus = write_file("c.txt", "one\ntwo\nthree\n");
    const auto shorter = write_file("short.txt", "one\ntwo\n");
    const auto emb = (dir_ / "c.crem").string();
    ASSERT_EQ(run("embed " + corpus + " --lang en --dim 16 --out " + emb).exit_code, 0);
    const auto r = run("mine --src-emb " + emb + " --tgt-emb " + emb + " --src-corpus " +
                       shorter + " --tgt-corpus " + corpus + " --out " +
                       (dir_ / "m.tsv").string());
    EXPECT_EQ(r.exit_code, 2);
}

TEST_F(CliTest, EvalIdentityReportsPerfectAccuracy) {
    const auto corpus = write_file("c.txt", "aa bb cc\ndd ee ff\ngg hh ii\n");
    const auto emb = (dir_ / "c.crem").string();
    ASSERT_EQ(run("embed " + corpus + " --lang en --dim 16 --out " + emb).exit_code, 0);
    const auto truth = write_file("truth.txt", "0\n1\n2\n");
    const auto report_path = (dir_ / "report.json").string();
    const auto r = run("eval --src-emb " + emb + " --tgt-emb " + emb + " --truth " +
                       truth + " --criterion cosine --out " + report_path);
    ASSERT_EQ(r.exit_code, 0) << r.output;
    const auto report = nlohmann::json::parse(slurp(report_path));
    EXPECT_EQ(report.at("directions").at(0).at("correct"), 3);
    EXPECT_DOUBLE_EQ(report.at("average").get<double>(), 1.0);
}

TEST_F(CliTest, EvalMarginCriterionAlsoValid) {
    const auto corpus = write_file("c.txt", "aa bb cc\ndd ee ff\ngg hh ii\njj kk ll\n");
    const auto emb = (dir_ / "c.crem").string();
    ASSERT_EQ(run("embed " + corpus + " --lang en --dim 16 --out " + emb).exit_code, 0);
    const auto truth = write_file("truth.txt", "0\n1\n2\n3\n");
    const auto r = run("eval --src-emb " + emb + " --tgt-emb " + emb + " --truth " +
                       truth + " --criterion margin --k 2");
    ASSERT_EQ(r.exit_code, 0) << r.output;
    const auto report = nlohmann::json::parse(r.output);
    EXPECT_EQ(report.at("criterion"), "margin");
}

TEST_F(CliTest, EvalMissingTruthExitsOne) {
    const auto corpus = write_file("c.txt", "aa\nbb\n");
    const auto emb = (dir_ / "c.crem").string();
    ASSERT_EQ(run("embed " + corpus + " --lang en --dim 16 --out " + emb).exit_code, 0);
    const auto r = run("eval --src-emb " + emb + " --tgt-emb " + emb + " --truth " +
                       (dir_ / "missing.txt").string());
    EXPECT_EQ(r.exit_code, 1);
}

std::string loop_config_json(int iterations) {
    nlohmann::json j = {
        {"iterations", iterations},
        {"seed", 11},
        {"langs", {"l0", "l1"}},
        {"pivots", {"l0"}},
        {"margin", {{"k", 3}, {"tau", 1.0}}},
        {"trainer", {{"type", "procrustes"}}},
        {"data",
         {{"type", "synthetic"}, {"n", 60}, {"dim", 16}, {"noise_sigma", 0.02},
          {"misalignment", 1.5}}}};
    return j.dump(2);
}

TEST_F(CliTest, RunSingleIterationLayout) {
    const auto config = write_file("run.json", loop_config_json(1));
    const auto out = (dir_ / "run").string();
    const auto r = run("run --config " + config + " --out " + out);
    ASSERT_EQ(r.exit_code, 0) << r.output;
    EXPECT_TRUE(fs::is_regular_file(fs::path(out) / "iter1" / "mined" / "l0-l1.tsv"));
    EXPECT_TRUE(fs::is_regular_file(fs::path(out) / "iter1" / "emb" / "l1.crem"));
    EXPECT_TRUE(fs::is_regular_file(fs::path(out) / "manifest.json"));
    EXPECT_NE(r.output.find("iteration 1"), std::string::npos);

    // synthetic ids are row ordinals: mined pairs should be the true pairing
    std::ifstream tsv(fs::path(out) / "iter1" / "mined" / "l0-l1.tsv");
    std::string line;
    std::size_t total = 0, correct = 0;
    while (std::getline(tsv, line)) {
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == '\t') {
                fields.push_back(line.substr(start, i - start));
                start = i + 1;
            }
        }
        ASSERT_EQ(fields.size(), 7u);
        ++total;
        correct += fields[2] == fields[4];
    }
    ASSERT_GT(total, 0u);
    EXPECT_GE(static_cast<double>(correct) / total, 0.95);
}

TEST_F(CliTest, RunFilesDataWithTruthNone) {
    std::string corpus_text;
    for (int i = 1; i <= 24; ++i)
        corpus_text += "shared sentence number " + std::to_string(i) + "\n";
    const auto en_txt = write_file("en.txt", corpus_text);
    const auto ro_txt = write_file("ro.txt", corpus_text);
    const auto en_crem = (dir_ / "en.crem").string();
    const auto ro_crem = (dir_ / "ro.crem").string();
    ASSERT_EQ(run("embed " + en_txt + " --lang en --dim 16 --seed 5 --out " + en_crem)
                  .exit_code, 0);
    ASSERT_EQ(run("embed " + ro_txt + " --lang ro --dim 16 --seed 5 --out " + ro_crem)
                  .exit_code, 0);
    nlohmann::json config = {
        {"iterations", 1},
        {"seed", 3},
        {"langs", {"en", "ro"}},
        {"pivots", {"en"}},
        {"margin", {{"k", 3}, {"tau", 1.0}}},
        {"trainer", {{"type", "procrustes"}}},
        {"evaluation", {{"truth", "none"}}},
        {"data",
         {{"type", "files"},
          {"format", "plain"},
          {"corpora", {{"en", en_txt}, {"ro", ro_txt}}},
          {"embeddings", {{"en", en_crem}, {"ro", ro_crem}}}}}};
    const auto config_path = write_file("files.json", config.dump(2));
    const auto out = (dir_ / "run").string();
    const auto r = run("run --config " + config_path + " --out " + out);
    ASSERT_EQ(r.exit_code, 0) << r.output;
    const auto report =
        nlohmann::json::parse(slurp(fs::path(out) / "iter1" / "report.json"));
    EXPECT_TRUE(report.at("directions").empty());
    EXPECT_FALSE(slurp(fs::path(out) / "iter1" / "mined" / "en-ro.tsv").empty());
}

TEST_F(CliTest, RunRerunByteIdentical) {
    const auto config = write_file("run.json", loop_config_json(2));
    const auto a = (dir_ / "a").string();
    const auto b = (dir_ / "b").string();
    ASSERT_EQ(run("run --config " + config + " --out " + a).exit_code, 0);
    ASSERT_EQ(run("run --config " + config + " --out " + b).exit_code, 0);
    for (const auto& rel : {"iter1/mined/l0-l1.tsv", "iter2/mined/l1-l0.tsv",
                            "iter1/emb/l1.crem", "iter2/emb/l0.crem"})
        EXPECT_EQ(slurp(fs::path(a) / rel), slurp(fs::path(b) / rel)) << rel;
}

TEST_F(CliTest, RunYamlConfigAccepted) {
    const auto config = write_file("run.yaml",
                                   "iterations: 1\n"
                                   "seed: 11\n"
                                   "langs: [l0, l1]\n"
                                   "pivots: [l0]\n"
                                   "margin: {k: 3, tau: 1.0}\n"
                                   "trainer: {type: procrustes}\n"
                                   "data:\n"
                                   "  type: synthetic\n"
                                   "  n: 60\n"
                                   "  dim: 16\n"
                                   "  noise_sigma: 0.02\n"
                                   "  misalignment: 1.5\n");
    const auto out = (dir_ / "run").string();
    const auto r = run("run --config " + config + " --out " + out);
    ASSERT_EQ(r.exit_code, 0) << r.output;
    // same inputs as the JSON config: artifacts must agree bit-for-bit
    const auto json_config = write_file("run.json", loop_config_json(1));
    const auto out2 = (dir_ / "run2").string();
    ASSERT_EQ(run("run --config " + json_config + " --out " + out2).exit_code, 0);
    EXPECT_EQ(slurp(fs::path(out) / "iter1" / "mined" / "l0-l1.tsv"),
              slurp(fs::path(out2) / "iter1" / "mined" / "l0-l1.tsv"));
}

TEST_F(CliTest, RunInvalidConfigExitsTwoWithFieldPath) {
    const auto config = write_file("bad.json", R"({"iterations": 1, "langs": ["a","b"],
        "pivots": ["a"], "data": {"type": "synthetic", "n": 50}})");
    const auto r = run("run --config " + config + " --out " + (dir_ / "run").string());
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_NE(r.output.find("data."), std::string::npos) << r.output;
}

TEST_F(CliTest, RunExistingNonEmptyOutRejected) {
    const auto config = write_file("run.json", loop_config_json(1));
    const auto out = (dir_ / "run").string();
    ASSERT_EQ(run("run --config " + config + " --out " + out).exit_code, 0);
    EXPECT_EQ(run("run --config " + config + " --out " + out).exit_code, 2);
}

TEST_F(CliTest, ResumeRecomputesDeletedIteration) {
    const auto config = write_file("run.json", loop_config_json(2));
    const auto out = (dir_ / "run").string();
    ASSERT_EQ(run("run --config " + config + " --out " + out).exit_code, 0);
    const auto iter2 = slurp(fs::path(out) / "iter2" / "mined" / "l0-l1.tsv");
    fs::remove_all(fs::path(out) / "iter2");
    const auto r = run("run --resume " + out);
    ASSERT_EQ(r.exit_code, 0) << r.output;
    EXPECT_EQ(slurp(fs::path(out) / "iter2" / "mined" / "l0-l1.tsv"), iter2);
}

TEST_F(CliTest, UnknownFlagExitsTwo) {
    EXPECT_EQ(run("embed --definitely-not-a-flag").exit_code, 2);
}

}  // namespace
