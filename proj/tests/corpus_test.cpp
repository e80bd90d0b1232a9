#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <fstream>
#include <random>

#include "ensopt/corpus.hpp"
#include "ensopt/labels.hpp"

#include "support/test_util.hpp"

using namespace ensopt;

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

} // namespace

TEST_CASE("tokenize follows the declared rules") {
    CHECK(tokenize("Super movie!!") == std::vector<std::string>{"super", "movie"});
    CHECK(tokenize("படம் super") == std::vector<std::string>{"படம்", "super"});
    CHECK(tokenize("123 ok") == std::vector<std::string>{"ok"});
    CHECK(tokenize("  \t \n ") == std::vector<std::string>{});
    CHECK(tokenize("don't stop") == std::vector<std::string>{"don't", "stop"});
    CHECK(tokenize("«quoted»") == std::vector<std::string>{"quoted"});
    CHECK(tokenize("(123)") == std::vector<std::string>{});
    CHECK(tokenize("well-known") == std::vector<std::string>{"well-known"});
}

TEST_CASE("tokenize is idempotent on its own output") {
    const std::string sample =
        "Super... படம்!! 100% thalaiva-mass, DON'T miss; தலைவா — vera level!! 2021";
    for (const auto& token : tokenize(sample)) {
        CAPTURE(token);
        CHECK(tokenize(token) == std::vector<std::string>{token});
    }
}

TEST_CASE("load_corpus") {
    testutil::TempDir dir("corpus");
    SECTION("three-line fixture yields three records") {
        write_file(dir.file("c.tsv"), "hello there\tnot-offensive\n"
                                      "enna da\toffensive-untargeted\n"
                                      "vera level\tnot-offensive\n");
        const auto records = load_corpus(dir.file("c.tsv"));
        REQUIRE(records.size() == 3);
        CHECK(records[1].text == "enna da");
        CHECK(records[1].label == "offensive-untargeted");
    }
    SECTION("header row is auto-detected and skipped") {
        write_file(dir.file("h.tsv"), "text\tcategory\nhello\tnot-offensive\n");
        const auto records = load_corpus(dir.file("h.tsv"));
        REQUIRE(records.size() == 1);
        CHECK(records[0].text == "hello");
    }
    SECTION("missing label column names the line") {
        write_file(dir.file("bad.tsv"), "ok\tnot-offensive\nno label here\n");
        CHECK_THROWS_WITH(load_corpus(dir.file("bad.tsv")),
                          Catch::Matchers::ContainsSubstring("line 2"));
    }
    SECTION("CRLF and LF files load identically") {
        write_file(dir.file("lf.tsv"), "hello\tnot-offensive\nbye\tnot-offensive\n");
        write_file(dir.file("crlf.tsv"), "hello\tnot-offensive\r\nbye\tnot-offensive\r\n");
        const auto lf = load_corpus(dir.file("lf.tsv"));
        const auto crlf = load_corpus(dir.file("crlf.tsv"));
        REQUIRE(lf.size() == crlf.size());
        for (std::size_t i = 0; i < lf.size(); ++i) {
            CHECK(lf[i].text == crlf[i].text);
            CHECK(lf[i].label == crlf[i].label);
        }
    }
    SECTION("missing file is an io error") {
        CHECK_THROWS_AS(load_corpus(dir.file("nothing.tsv")), io_error);
    }
}

TEST_CASE("class_counts") {
    const LabelSet labels(canonical_offensive_labels());
    SECTION("constructed five-record fixture") {
        const std::vector<CorpusRecord> records = {
            {"a", "not-offensive"},       {"b", "Not-offensive"},
            {"c", "NOT_OFFENSIVE"},       {"d", "offensive-untargeted"},
            {"e", "Offensive-untargeted"},
        };
        const auto table = class_counts(records, labels);
        CHECK(table.counts[0] == 3);
        CHECK(table.counts[1] == 2);
        CHECK(table.other == 0);
        CHECK(table.total == 5);
    }
    SECTION("unknown labels land in the other bucket") {
        const std::vector<CorpusRecord> records = {{"a", "not-offensive"}, {"b", "mystery"}};
        const auto table = class_counts(records, labels);
        CHECK(table.counts[0] == 1);
        CHECK(table.other == 1);
        CHECK(table.total == 2);
    }
    SECTION("empty record list gives an all-zero table") {
        const auto table = class_counts({}, labels);
        CHECK(table.total == 0);
        CHECK(std::all_of(table.counts.begin(), table.counts.end(),
                          [](std::int64_t c) { return c == 0; }));
    }
    SECTION("totals are invariant under shuffling") {
        std::vector<CorpusRecord> records;
        std::mt19937 gen(3);
        for (int i = 0; i < 100; ++i)
            records.push_back({"t" + std::to_string(i),
                               labels.name(gen() % labels.size())});
        const auto before = class_counts(records, labels);
        std::shuffle(records.begin(), records.end(), gen);
        const auto after = class_counts(records, labels);
        CHECK(before.counts == after.counts);
        CHECK(before.total == after.total);
    }
}

TEST_CASE("oov_rate") {
    const std::vector<CorpusRecord> records = {{"a b", "x"}, {"c d", "x"}};
    SECTION("half the types out of vocabulary") {
        const auto report = oov_rate(records, {"a", "b"});
        CHECK(report.total_types == 4);
        CHECK(report.oov_types == 2);
        CHECK(report.oov_rate == 0.5);
    }
    SECTION("full vocabulary coverage gives rate 0") {
        const auto report = oov_rate(records, {"a", "b", "c", "d", "extra"});
        CHECK(report.oov_rate == 0.0);
    }
    SECTION("empty corpus or vocabulary is an error, not zero") {
        CHECK_THROWS_AS(oov_rate({}, {"a"}), data_error);
        CHECK_THROWS_AS(oov_rate(records, {}), data_error);
    }
    SECTION("token-level mode counts occurrences") {
        const std::vector<CorpusRecord> repeated = {{"a a a b", "x"}};
        const auto report = oov_rate(repeated, {"a"}, /*token_level=*/true);
        CHECK(report.total_types == 4);
        CHECK(report.oov_types == 1);
    }
    SECTION("rate is monotone non-increasing as the vocabulary grows") {
        std::mt19937 gen(5);
        std::vector<CorpusRecord> corpus;
        for (int i = 0; i < 40; ++i)
            corpus.push_back({"w" + std::to_string(gen() % 50) + " w" +
                                  std::to_string(gen() % 50),
                              "x"});
        std::unordered_set<std::string> vocab;
        double previous = 1.0;
        for (int i = 0; i < 50; ++i) {
            vocab.insert("w" + std::to_string(i));
            const auto report = oov_rate(corpus, vocab);
            CHECK(report.oov_rate <= previous + 1e-15);
            CHECK(report.oov_rate >= 0.0);
            CHECK(report.oov_rate <= 1.0);
            previous = report.oov_rate;
        }
    }
}

TEST_CASE("vocabulary loads case-folded") {
    testutil::TempDir dir("vocab");
    std::ofstream out(dir.file("v.txt"), std::ios::binary);
    out << "Hello\nWORLD\nபடம்\n";
    out.close();
    const auto vocab = load_vocabulary(dir.file("v.txt"));
    CHECK(vocab.count("hello") == 1);
    CHECK(vocab.count("world") == 1);
    CHECK(vocab.count("படம்") == 1);
    CHECK(vocab.count("Hello") == 0);
}
