// Copyright 2026 The Stylecast Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "fakes.hpp"
#include "stylecast/corpus.hpp"

namespace stylecast::corpus {
namespace {

TEST(ParseTranscript, ScriptAlternatingSpeakers) {
    const auto t = parse_transcript("Host1: hi\nMark1: hello\nHost1: how are you\nMark1: fine\n", Format::script);
    ASSERT_EQ(t.size(), 4u);
    EXPECT_EQ(t.roles(), (std::vector<std::string>{"Host1", "Mark1"}));
    EXPECT_EQ(t.utterances()[1].text, "hello");
    EXPECT_EQ(t.utterances()[3].index, 3u);
}

TEST(ParseTranscript, JsonlSkipsBlankLines) {
    const auto t = parse_transcript(R"({"speaker":"A","text":"one"}

{"speaker":"B","text":"two"}
)",
                                    Format::jsonl);
    ASSERT_EQ(t.size(), 2u);
    EXPECT_EQ(t.utterances()[0].index, 0u);
    EXPECT_EQ(t.utterances()[1].index, 1u);
}

TEST(ParseTranscript, MissingColonReportsLineNumber) {
    try {
        parse_transcript("Host1: hi\nMark1: hello\nno colon here\n", Format::script);
        FAIL() << "expected MalformedLine";
    } catch (const MalformedLine& e) {
        EXPECT_EQ(e.line_no(), 3u);
    }
}

TEST(ParseTranscript, TrimsSpeakersAndSkipsComments) {
    const auto t = parse_transcript("# header\n  Host1 :  hi  \n\nMark1:hello\n", Format::script);
    ASSERT_EQ(t.size(), 2u);
    EXPECT_EQ(t.utterances()[0].speaker, "Host1");
    EXPECT_EQ(t.utterances()[0].text, "hi");
}

TEST(ParseTranscript, EmptyInputThrows) {
    EXPECT_THROW(parse_transcript("\n\n# only a comment\n", Format::script), EmptyTranscript);
    EXPECT_THROW(parse_transcript("", Format::jsonl), EmptyTranscript);
}

TEST(ParseTranscript, JsonlMissingFieldIsMalformed) {
    EXPECT_THROW(parse_transcript(R"({"speaker":"A"})", Format::jsonl), MalformedLine);
    EXPECT_THROW(parse_transcript("not json", Format::jsonl), MalformedLine);
    EXPECT_THROW(parse_transcript(R"({"speaker":"A","text":"   "})", Format::jsonl), MalformedLine);
}

TEST(ParseTranscript, RoundTripBothFormats) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const auto t = testing::interview({"Host", "Guest"}, 2 + rng() % 20, 1 + rng() % 30, rng());
        EXPECT_EQ(parse_transcript(to_jsonl(t), Format::jsonl, t.id()), t);
        EXPECT_EQ(parse_transcript(to_script(t), Format::script, t.id()), t);
    }
}

TEST(ParseTranscript, JsonlRoundTripKeepsColonsAndUnicode) {
    const auto t = Transcript::from_pairs("x", {{"Mark: Jr", "time: 10:30, caf\xC3\xA9"}, {"Host", "\"quoted\""}});
    EXPECT_EQ(parse_transcript(to_jsonl(t), Format::jsonl, "x"), t);
}

TEST(Anonymize, ReplacesSpeakersAndText) {
    const auto t = Transcript::from_pairs(
        "d1", {{"Interviewer", "Welcome, Elon Musk."}, {"Elon Musk", "Thanks. Elon Musk is happy; Elon Muskrat is not."}});
    const auto a = anonymize(t, {{"Elon Musk", "Mark1"}, {"Interviewer", "Host1"}});
    EXPECT_EQ(a.roles(), (std::vector<std::string>{"Host1", "Mark1"}));
    EXPECT_EQ(a.utterances()[0].text, "Welcome, Mark1.");
    EXPECT_EQ(a.utterances()[1].text, "Thanks. Mark1 is happy; Elon Muskrat is not.");
}

TEST(Anonymize, EmptyMapIsIdentity) {
    const auto t = testing::interview({"A", "B"}, 6, 5);
    EXPECT_EQ(anonymize(t, {}), t);
}

TEST(Anonymize, UnusedKeyThrows) {
    const auto t = Transcript::from_pairs("d", {{"A", "hi"}, {"B", "yo"}});
    try {
        anonymize(t, {{"Nobody", "X"}});
        FAIL();
    } catch (const UnusedMapping& e) {
        EXPECT_EQ(e.name(), "Nobody");
    }
}

TEST(Anonymize, IsCaseSensitive) {
    const auto t = Transcript::from_pairs("d", {{"A", "elon musk said"}, {"B", "Elon Musk"}});
    const auto a = anonymize(t, {{"Elon Musk", "Mark1"}});
    EXPECT_EQ(a.utterances()[0].text, "elon musk said");
    EXPECT_EQ(a.utterances()[1].text, "Mark1");
}

TEST(Anonymize, Idempotent) {
    const std::map<std::string, std::string> map = {{"Elon Musk", "Mark1"}, {"Interviewer", "Host1"}};
    const auto t = Transcript::from_pairs("d", {{"Interviewer", "So, Elon Musk"}, {"Elon Musk", "Yes."}});
    const auto once = anonymize(t, map);
    EXPECT_EQ(anonymize(once, map), once);
}

TEST(Split, HalfAndSeventyPercent) {
    const auto hundred = testing::interview({"A", "B"}, 100, 3);
    const auto s = split(hundred, 0.5);
    EXPECT_EQ(s.train.size(), 50u);
    EXPECT_EQ(s.test.size(), 50u);

    const auto ten = testing::interview({"A", "B"}, 10, 3);
    const auto s7 = split(ten, 0.7);
    EXPECT_EQ(s7.train.size(), 7u);
    EXPECT_EQ(s7.test.size(), 3u);
}

TEST(Split, HalfUpRoundingEnumeration) {
    // Integer oracles: round_half_up(n/2) = (n+1)/2, round_half_up(7n/10) = (7n+5)/10.
    for (std::size_t n = 2; n <= 10; ++n) {
        const auto t = testing::interview({"A", "B"}, n, 2);
        EXPECT_EQ(split(t, 0.5).train.size(), (n + 1) / 2) << n;
        const std::size_t expect70 = (7 * n + 5) / 10;
        if (expect70 < n) {
            EXPECT_EQ(split(t, 0.7).train.size(), expect70) << n;
        } else {
            EXPECT_THROW(split(t, 0.7), TooFewUtterances) << n;
        }
    }
    EXPECT_EQ(split(testing::interview({"A", "B"}, 3, 2), 0.5).train.size(), 2u);
}

TEST(Split, PartitionsByIndex) {
    const auto t = testing::interview({"A", "B"}, 37, 4);
    const auto s = split(t, 0.3);
    std::set<std::size_t> train;
    std::set<std::size_t> all;
    for (const auto& u : s.train.utterances()) train.insert(u.index);
    for (const auto& u : s.test.utterances()) {
        EXPECT_FALSE(train.count(u.index));
        all.insert(u.index);
    }
    all.insert(train.begin(), train.end());
    EXPECT_EQ(all.size(), 37u);
    EXPECT_EQ(*all.rbegin(), 36u);
    EXPECT_EQ(s.test.utterances().front().index, s.train.size());
}

TEST(Split, RejectsBadInput) {
    const auto t = testing::interview({"A", "B"}, 2, 2);
    EXPECT_THROW(split(t, 0.0), std::invalid_argument);
    EXPECT_THROW(split(t, 1.0), std::invalid_argument);
    EXPECT_THROW(split(t, 0.9), TooFewUtterances);
    EXPECT_THROW(split(Transcript::from_pairs("one", {{"A", "x"}}), 0.5), TooFewUtterances);
}

std::string words(std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += "w" + std::to_string(i) + (i + 1 < n ? " " : "");
    return s;
}

TEST(Segment, ThirteenThousandWords) {
    const auto segs = segment(words(13000), 4400, 2200);
    ASSERT_EQ(segs.size(), 5u);
    const std::size_t starts[] = {0, 2200, 4400, 6600, 8800};
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(segs[i].ordinal, i + 1);
        EXPECT_EQ(segs[i].start_word, starts[i]);
    }
    EXPECT_EQ(segs.back().end_word, 13000u);
    EXPECT_EQ(segs[0].text.substr(0, 6), "w0 w1 ");
}

TEST(Segment, ShorterThanWindow) {
    const auto segs = segment(words(4000), 4400, 2200);
    ASSERT_EQ(segs.size(), 1u);
    EXPECT_EQ(segs[0].end_word, 4000u);
}

TEST(Segment, StopsWhenEndReached) {
    const auto segs = segment(words(10000), 4400, 2200);
    ASSERT_EQ(segs.size(), 4u);
    EXPECT_EQ(segs.back().start_word, 6600u);
    EXPECT_EQ(segs.back().end_word, 10000u);
}

TEST(Segment, Errors) {
    EXPECT_THROW(segment("  \n ", 10, 5), EmptyText);
    EXPECT_THROW(segment("a b", 0, 1), std::invalid_argument);
    EXPECT_THROW(segment("a b", 4, 0), std::invalid_argument);
    EXPECT_THROW(segment("a b", 4, 5), std::invalid_argument);
}

TEST(Segment, CoverageAndOverlapProperty) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t total = 1 + rng() % 400;
        const std::size_t window = 1 + rng() % 60;
        const std::size_t stride = 1 + rng() % window;
        const auto segs = segment(words(total), window, stride);
        std::vector<int> covered(total, 0);
        for (std::size_t i = 0; i < segs.size(); ++i) {
            const auto& s = segs[i];
            ASSERT_LE(s.word_count(), window);
            ASSERT_EQ(s.start_word, i * stride);
            for (auto w = s.start_word; w < s.end_word; ++w) covered[w] = 1;
            if (i > 0 && segs[i - 1].word_count() == window)
                ASSERT_EQ(s.start_word, segs[i - 1].end_word - (window - stride));
            ASSERT_EQ(s.word_count(), words_of(s.text).size());
        }
        ASSERT_EQ(segs.back().end_word, total);
        for (std::size_t i = 0; i + 1 < segs.size(); ++i) ASSERT_LT(segs[i].end_word, total);
        ASSERT_EQ(std::count(covered.begin(), covered.end(), 1), static_cast<long>(total));
    }
}

TEST(ParagraphsOf, CountsAndUnknownRole) {
    const auto t = testing::interview({"Host", "Mark2"}, 6, 3);
    EXPECT_EQ(paragraphs_of(t, "Mark2").size(), 3u);
    EXPECT_EQ(paragraphs_of(t, "Mark2")[0], t.utterances()[1].text);
    EXPECT_THROW(paragraphs_of(t, "Tony"), UnknownRole);
}

TEST(LoadTranscript, InfersFormatFromExtension) {
    testing::TempDir dir;
    testing::write_file(dir.path() / "a.txt", "A: one\nB: two\n");
    testing::write_file(dir.path() / "b.jsonl", R"({"speaker":"A","text":"one"})" "\n");
    EXPECT_EQ(load_transcript((dir.path() / "a.txt").string()).size(), 2u);
    EXPECT_EQ(load_transcript((dir.path() / "b.jsonl").string()).size(), 1u);
}

} // namespace
} // namespace stylecast::corpus
