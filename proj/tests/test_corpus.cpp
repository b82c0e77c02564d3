#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "criss/corpus.hpp"

namespace {

namespace fs = std::filesystem;

class CorpusTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("criss_corpus_" + std::to_string(::getpid()) + "_" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string write_file(const std::string& name, const std::string& content) {
        const fs::path p = dir_ / name;
        std::ofstream out(p, std::ios::binary);
        out << content;
        return p.string();
    }

    fs::path dir_;
};

TEST_F(CorpusTest, PlainThreeLines) {
    const auto path = write_file("c.txt", "one\ntwo\nthree\n");
    const auto c = criss::load_corpus(path, "en", criss::CorpusFormat::plain);
    ASSERT_EQ(c.size(), 3u);
    EXPECT_EQ(c.sentences[0], "one");
    EXPECT_EQ(c.sentences[2], "three");
    EXPECT_EQ(c.ids, (std::vector<std::string>{"0", "1", "2"}));
    EXPECT_EQ(c.lang, "en");
}

TEST_F(CorpusTest, BlankLinesDropped) {
    const auto path = write_file("c.txt", "one\n\ntwo\n   \nthree\n");
    const auto c = criss::load_corpus(path, "en", criss::CorpusFormat::plain);
    ASSERT_EQ(c.size(), 3u);
    EXPECT_EQ(c.ids, (std::vector<std::string>{"0", "2", "4"}));
}

TEST_F(CorpusTest, CrlfTolerated) {
    const auto path = write_file("c.txt", "one\r\ntwo\r\n");
    const auto c = criss::load_corpus(path, "en", criss::CorpusFormat::plain);
    ASSERT_EQ(c.size(), 2u);
    EXPECT_EQ(c.sentences[0], "one");
}

TEST_F(CorpusTest, MissingFileIsIoError) {
    EXPECT_THROW(criss::load_corpus((dir_ / "nope.txt").string(), "en",
                                    criss::CorpusFormat::plain),
                 criss::io_error);
}

TEST_F(CorpusTest, MalformedUtf8NamesLine) {
    const auto path = write_file("c.txt", "fine\n\xff\xfe bad\n");
    try {
        criss::load_corpus(path, "en", criss::CorpusFormat::plain);
        FAIL() << "expected format_error";
    } catch (const criss::format_error& e) {
        EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos) << e.what();
    }
}

TEST_F(CorpusTest, TabInTextRejected) {
    const auto path = write_file("c.txt", "one\ttwo\n");
    EXPECT_THROW(criss::load_corpus(path, "en", criss::CorpusFormat::plain),
                 criss::format_error);
}

TEST_F(CorpusTest, JsonlRoundTrip) {
    const auto path = write_file(
        "c.jsonl",
        R"({"id":"a","text":"hello","lang":"en"})" "\n"
        R"({"id":"b","text":"world","lang":"en"})" "\n");
    const auto c = criss::load_corpus(path, "en", criss::CorpusFormat::jsonl);
    ASSERT_EQ(c.size(), 2u);
    EXPECT_EQ(c.ids, (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(c.sentences[1], "world");
}

TEST_F(CorpusTest, JsonlMissingFieldIsSchemaError) {
    const auto path = write_file("c.jsonl", R"({"id":"a","lang":"en"})" "\n");
    EXPECT_THROW(criss::load_corpus(path, "en", criss::CorpusFormat::jsonl),
                 criss::format_error);
}

TEST_F(CorpusTest, JsonlLangMismatchIsSchemaError) {
    const auto path =
        write_file("c.jsonl", R"({"id":"a","text":"hola","lang":"es"})" "\n");
    try {
        criss::load_corpus(path, "en", criss::CorpusFormat::jsonl);
        FAIL() << "expected format_error";
    } catch (const criss::format_error& e) {
        EXPECT_NE(std::string(e.what()).find("does not match declared lang"),
                  std::string::npos);
    }
}

TEST_F(CorpusTest, JsonlDuplicateIdRejected) {
    const auto path = write_file(
        "c.jsonl",
        R"({"id":"a","text":"x","lang":"en"})" "\n"
        R"({"id":"a","text":"y","lang":"en"})" "\n");
    EXPECT_THROW(criss::load_corpus(path, "en", criss::CorpusFormat::jsonl),
                 criss::format_error);
}

TEST_F(CorpusTest, JsonlInvalidJsonNamesLine) {
    const auto path = write_file("c.jsonl", R"({"id":"a","text":"x","lang":"en"})" "\n{oops\n");
    try {
        criss::load_corpus(path, "en", criss::CorpusFormat::jsonl);
        FAIL() << "expected format_error";
    } catch (const criss::format_error& e) {
        EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos) << e.what();
    }
}

criss::Corpus make_corpus(std::vector<std::string> sentences) {
    criss::Corpus c;
    c.lang = "xx";
    for (std::size_t i = 0; i < sentences.size(); ++i) c.ids.push_back(std::to_string(i));
    c.sentences = std::move(sentences);
    return c;
}

TEST(DedupTest, KeepsFirstOccurrence) {
    const auto out = criss::dedup(make_corpus({"a", "b", "a"}));
    EXPECT_EQ(out.sentences, (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(out.ids, (std::vector<std::string>{"0", "1"}));
}

TEST(DedupTest, AllUniqueUnchanged) {
    const auto in = make_corpus({"a", "b", "c"});
    const auto out = criss::dedup(in);
    EXPECT_EQ(out.sentences, in.sentences);
    EXPECT_EQ(out.ids, in.ids);
}

TEST(DedupTest, PlantedDuplicateCount) {
    std::vector<std::string> sentences;
    for (int i = 0; i < 900; ++i) sentences.push_back("sentence " + std::to_string(i));
    for (int i = 0; i < 100; ++i) sentences.push_back("sentence " + std::to_string(i * 7));
    criss::Rng rng(11);
    for (std::size_t i = sentences.size(); i > 1; --i)
        std::swap(sentences[i - 1], sentences[rng.below(i)]);
    const auto out = criss::dedup(make_corpus(std::move(sentences)));
    EXPECT_EQ(out.size(), 900u);
}

TEST(DedupTest, Idempotent) {
    const auto once = criss::dedup(make_corpus({"a", "b", "a", "c", "b"}));
    const auto twice = criss::dedup(once);
    EXPECT_EQ(once.sentences, twice.sentences);
    EXPECT_EQ(once.ids, twice.ids);
}

TEST(SubsampleTest, UnderCapUnchanged) {
    std::vector<std::string> s;
    for (int i = 0; i < 10; ++i) s.push_back("s" + std::to_string(i));
    const auto in = make_corpus(std::move(s));
    const auto out = criss::subsample(in, 100, 1);
    EXPECT_EQ(out.sentences, in.sentences);
}

TEST(SubsampleTest, DeterministicGivenSeed) {
    std::vector<std::string> s;
    for (int i = 0; i < 1000; ++i) s.push_back("s" + std::to_string(i));
    const auto in = make_corpus(std::move(s));
    const auto a = criss::subsample(in, 100, 7);
    const auto b = criss::subsample(in, 100, 7);
    EXPECT_EQ(a.sentences, b.sentences);
    EXPECT_EQ(a.ids, b.ids);
    EXPECT_EQ(a.size(), 100u);
    const auto c = criss::subsample(in, 100, 8);
    EXPECT_NE(a.sentences, c.sentences);
}

// subsample(c, cap, s) must be a subsequence of c for every cap and seed
TEST(SubsampleTest, AlwaysASubsequence) {
    std::vector<std::string> s;
    for (int i = 0; i < 200; ++i) s.push_back(std::to_string(i));
    const auto in = make_corpus(std::move(s));
    for (std::size_t cap : {1u, 2u, 50u, 199u, 200u}) {
        for (std::uint64_t seed : {0u, 1u, 99u}) {
            const auto out = criss::subsample(in, cap, seed);
            EXPECT_EQ(out.size(), std::min<std::size_t>(cap, in.size()));
            int prev = -1;
            for (const auto& sent : out.sentences) {
                const int v = std::stoi(sent);
                EXPECT_GT(v, prev);
                prev = v;
            }
        }
    }
}

TEST(SubsampleTest, CapZeroRejected) {
    EXPECT_THROW(criss::subsample(make_corpus({"a"}), 0, 1), criss::validation_error);
}

TEST_F(CorpusTest, PipelineDeterministic) {
    std::string content;
    for (int i = 0; i < 500; ++i)
        content += "line " + std::to_string(i % 400) + "\n";  // planted dupes
    const auto path = write_file("c.txt", content);
    auto run = [&] {
        auto c = criss::load_corpus(path, "en", criss::CorpusFormat::plain);
        c = criss::subsample(c, 300, 5);
        return criss::dedup(c);
    };
    const auto a = run();
    const auto b = run();
    EXPECT_EQ(a.sentences, b.sentences);
    EXPECT_EQ(a.ids, b.ids);
}

}  // namespace
