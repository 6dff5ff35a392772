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

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "fakes.hpp"
#include "stylecast/eval_harness.hpp"

namespace stylecast::eval {
namespace {

using testing::FakeProvider;

struct JudgeHarness {
    std::shared_ptr<FakeProvider> provider = std::make_shared<FakeProvider>();
    llm::Gateway gateway{std::make_shared<llm::LiveBackend>(provider)};
    prompt::PromptKit prompts;
};

std::vector<HumanScoreSheet> sheets_from(const std::string& csv) {
    std::istringstream in(csv);
    return ingest_human_sheet(in);
}

const std::string kHeader =
    "evaluator_id,conversation_id,word_choice,sentence_structure,figurative_language,sentence_arrangement\n";

// Synthetic attribution corpus: role r speaks only words from role_vocabulary(r).
AttributionCorpus synthetic_corpus(std::size_t roles, std::size_t per_role, std::uint64_t seed) {
    AttributionCorpus c;
    const std::vector<std::string> names = {"Mark1", "Tony", "Mark2", "Host1", "Host2"};
    for (std::size_t r = 0; r < roles; ++r)
        for (std::size_t i = 0; i < per_role; ++i)
            c.rows.push_back({names[r], testing::filler(12 + i % 9, testing::role_vocabulary(r), seed + r * 7919 + i)});
    return c;
}

TEST(Judge, ThreePassesInRange) {
    JudgeHarness h;
    const auto scores = judge(h.gateway, h.prompts, testing::test_endpoint("claude35"), "c7", "A: hi\nB: yo",
                              {"Mark1 paragraph one.", "Mark1 paragraph two."});
    ASSERT_EQ(scores.size(), 3u);
    for (int i = 0; i < 3; ++i) {
        EXPECT_EQ(scores[static_cast<std::size_t>(i)].pass, i + 1);
        EXPECT_GE(scores[static_cast<std::size_t>(i)].score, 1);
        EXPECT_LE(scores[static_cast<std::size_t>(i)].score, 10);
        EXPECT_EQ(scores[static_cast<std::size_t>(i)].conversation_id, "c7");
    }
    for (const auto& r : h.provider->requests()) {
        EXPECT_EQ(r.temperature, 0.0);
        EXPECT_EQ(r.max_output_tokens, 768u);
        EXPECT_EQ(r.tag, "judge");
    }
}

TEST(Judge, SinglePass) {
    JudgeHarness h;
    JudgeOptions one;
    one.passes = 1;
    EXPECT_EQ(judge(h.gateway, h.prompts, testing::test_endpoint(), "c", "A: x", {"ref"}, one).size(), 1u);
    one.passes = 0;
    EXPECT_THROW(judge(h.gateway, h.prompts, testing::test_endpoint(), "c", "A: x", {"ref"}, one),
                 std::invalid_argument);
}

TEST(Judge, UnparseableRetriedOncePerPass) {
    JudgeHarness h;
    h.provider->set_override([](const llm::CompletionRequest&, std::size_t call) -> std::optional<std::string> {
        if (call == 1) return "I refuse to give a number";
        return "fine\nscore: 6";
    });
    const auto scores = judge(h.gateway, h.prompts, testing::test_endpoint(), "c", "A: x", {"ref"});
    EXPECT_EQ(scores.size(), 3u);
    EXPECT_EQ(h.provider->calls(), 4u);

    JudgeHarness never;
    never.provider->set_override(
        [](const llm::CompletionRequest&, std::size_t) -> std::optional<std::string> { return "score: 42"; });
    EXPECT_THROW(judge(never.gateway, never.prompts, testing::test_endpoint(), "c", "A: x", {"ref"}),
                 prompt::UnparseableScore);
    EXPECT_EQ(never.provider->calls(), 2u);
}

TEST(Judge, EmptyReferenceRejectedBeforeCalls) {
    JudgeHarness h;
    EXPECT_THROW(judge(h.gateway, h.prompts, testing::test_endpoint(), "c", "A: x", {}), prompt::EmptyInput);
    EXPECT_EQ(h.provider->calls(), 0u);
}

TEST(Judge, ScoreJsonRoundTrip) {
    const JudgeScore s{"run/3", 2, 8, "close"};
    const auto back = judge_score_from_json(to_json(s));
    EXPECT_EQ(back.conversation_id, "run/3");
    EXPECT_EQ(back.pass, 2);
    EXPECT_EQ(back.score, 8);
    EXPECT_THROW(judge_score_from_json({{"conversation_id", "x"}, {"pass", 1}, {"score", 11}}), std::invalid_argument);
}

TEST(Aggregate, Examples) {
    const std::vector<double> a = {7, 6, 8};
    EXPECT_DOUBLE_EQ(aggregate(a), 7.00);
    const std::vector<double> single = {13.3};
    EXPECT_DOUBLE_EQ(aggregate(single), 13.30);
    const std::vector<double> thirds = {1, 1, 2};
    EXPECT_DOUBLE_EQ(aggregate(thirds), 1.33);
    const std::vector<double> half = {1.005};
    EXPECT_DOUBLE_EQ(aggregate(half), 1.01);
    const std::vector<double> half2 = {2.675};
    EXPECT_DOUBLE_EQ(aggregate(half2), 2.68);
    EXPECT_THROW(aggregate(std::vector<double>{}), EmptyScores);
}

TEST(Aggregate, ThirtyScoresTwoDecimals) {
    // 30 judge scores summing to 213 average 7.10.
    std::vector<double> s(30, 7.0);
    for (int i = 0; i < 3; ++i) s[static_cast<std::size_t>(i)] = 8.0;
    EXPECT_DOUBLE_EQ(aggregate(s), 7.10);
}

TEST(Aggregate, MatchesBruteForceMean) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> s(1 + rng() % 60);
        long sum = 0;
        for (auto& x : s) {
            const int v = 1 + static_cast<int>(rng() % 20);
            x = v;
            sum += v;
        }
        const double oracle = static_cast<double>(sum) / static_cast<double>(s.size());
        ASSERT_NEAR(mean(s), oracle, 1e-9);
        // Integer oracle for the rounded value: floor((200*sum + n) / (2n)) / 100.
        const long n = static_cast<long>(s.size());
        const long cents = (200 * sum + n) / (2 * n);
        ASSERT_NEAR(aggregate(s), static_cast<double>(cents) / 100.0, 1e-12);
    }
}

TEST(HumanSheet, TotalAndValidation) {
    const auto ok = sheets_from(kHeader + "e1,c7,5,4,3,4\n");
    ASSERT_EQ(ok.size(), 1u);
    EXPECT_EQ(ok[0].total(), 16);
    EXPECT_EQ(ok[0].conversation_id, "c7");

    try {
        sheets_from(kHeader + "e1,c7,5,4,3,4\ne2,c7,6,4,3,4\n");
        FAIL();
    } catch (const MalformedRow& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    EXPECT_THROW(sheets_from(kHeader + "e1,c7,5,4,3\n"), MalformedRow);
    EXPECT_THROW(sheets_from(kHeader + "e1,c7,5,4,x,4\n"), MalformedRow);
    EXPECT_THROW(sheets_from(kHeader + "e1,c7,5,4,3.5,4\n"), MalformedRow);
    EXPECT_THROW(sheets_from(kHeader + "e1,c7,0,4,3,4\n"), MalformedRow);
    EXPECT_THROW(sheets_from("evaluator_id,conversation_id,word_choice\ne1,c1,3\n"), MalformedRow);
}

TEST(HumanSheet, ColumnsInAnyOrderWithCrlf) {
    const auto s = sheets_from(
        "conversation_id,sentence_arrangement,evaluator_id,figurative_language,sentence_structure,word_choice\r\n"
        "c1,1,e9,2,3,4\r\n\r\n");
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0].evaluator_id, "e9");
    EXPECT_EQ(s[0].word_choice, 4);
    EXPECT_EQ(s[0].sentence_arrangement, 1);
}

TEST(HumanSheet, RandomValidTotalsInRange) {
    std::mt19937_64 rng(5);
    std::string csv = kHeader;
    for (int i = 0; i < 1000; ++i) {
        csv += "e" + std::to_string(i % 3) + ",c" + std::to_string(i);
        for (int k = 0; k < 4; ++k) csv += "," + std::to_string(1 + rng() % 5);
        csv += "\n";
    }
    const auto sheets = sheets_from(csv);
    ASSERT_EQ(sheets.size(), 1000u);
    for (const auto& s : sheets) {
        ASSERT_GE(s.total(), 4);
        ASSERT_LE(s.total(), 20);
        ASSERT_EQ(s.total(), s.word_choice + s.sentence_structure + s.figurative_language + s.sentence_arrangement);
    }
}

TEST(HumanSheet, ThreeEvaluatorsThirtyConversations) {
    std::mt19937_64 rng(8);
    std::string csv = kHeader;
    std::map<std::string, std::pair<long, long>> oracle; // group -> (sum, count)
    std::vector<ConversationRef> refs;
    for (int c = 1; c <= 30; ++c) refs.push_back({std::to_string(c), c <= 10 ? "Mark1/gpt4" : c <= 20 ? "Mark1/gemini15" : "Mark1/llama3"});
    for (int e = 1; e <= 3; ++e)
        for (int c = 1; c <= 30; ++c) {
            int total = 0;
            csv += "e" + std::to_string(e) + "," + std::to_string(c);
            for (int k = 0; k < 4; ++k) {
                const int v = 1 + static_cast<int>(rng() % 5);
                total += v;
                csv += "," + std::to_string(v);
            }
            csv += "\n";
            auto& o = oracle[refs[static_cast<std::size_t>(c - 1)].group];
            o.first += total;
            ++o.second;
        }
    ReportInputs in;
    in.conversations = refs;
    in.human_sheets = sheets_from(csv);
    ASSERT_EQ(in.human_sheets.size(), 90u);
    const auto rows = build_report(in);
    ASSERT_EQ(rows.size(), 3u);
    for (const auto& row : rows) {
        ASSERT_TRUE(row.human);
        EXPECT_EQ(row.human->n_scores, 30u);
        const auto& o = oracle.at(row.group);
        EXPECT_NEAR(row.human->mean, static_cast<double>(o.first) / static_cast<double>(o.second), 1e-9);
    }
}

TEST(HumanSheet, Task2FixtureFifteenPerPrompt) {
    std::ifstream in(std::string(STYLECAST_FIXTURE_DIR) + "/task2_human_scores.csv");
    ASSERT_TRUE(in);
    const auto sheets = ingest_human_sheet(in);
    ASSERT_EQ(sheets.size(), 45u);
    ReportInputs inputs;
    const char* families[] = {"standard", "cot", "tot"};
    for (int c = 1; c <= 15; ++c) inputs.conversations.push_back({std::to_string(c), families[(c - 1) / 5]});
    inputs.human_sheets = sheets;
    const auto rows = build_report(inputs);
    ASSERT_EQ(rows.size(), 3u);
    for (const auto& row : rows) {
        ASSERT_TRUE(row.human);
        EXPECT_EQ(row.human->n_scores, 15u);
        EXPECT_EQ(row.n_conversations, 5u);
        EXPECT_FALSE(row.judge);
    }
}

TEST(AttributionCorpusTest, BuildFromTranscripts) {
    std::vector<corpus::Transcript> ts;
    ts.push_back(testing::interview({"Host1", "Mark1"}, 240, 8, 1));
    ts.push_back(testing::interview({"Host2", "Tony"}, 120, 8, 2));
    AttributionOptions opt;
    const auto c = build_attribution_corpus(ts, "Mark1", opt);
    EXPECT_EQ(c.roles(), (std::vector<std::string>{"Host1", "Mark1", "Host2", "Tony"}));
    EXPECT_EQ(c.count("Mark1"), 100u);
    EXPECT_EQ(c.count("Tony"), 60u);
    EXPECT_EQ(c.warnings.size(), 2u);
    EXPECT_THROW(build_attribution_corpus(ts, "Nobody"), corpus::UnknownRole);

    opt.exclude_roles = {"Host1", "Host2"};
    EXPECT_EQ(build_attribution_corpus(ts, "Mark1", opt).roles().size(), 2u);
}

TEST(AttributionCorpusTest, FiveByHundredAndReplacement) {
    const auto c = synthetic_corpus(5, 100, 1);
    EXPECT_EQ(c.rows.size(), 500u);
    std::vector<std::string> mark2_test(120, "Mark2 test paragraph");
    const auto swapped = replace_role(c, "Mark1", "Mark2", mark2_test);
    EXPECT_EQ(swapped.count("Mark1"), 0u);
    EXPECT_EQ(swapped.count("Mark2"), 200u);
    EXPECT_EQ(swapped.rows.size(), 500u);
}

TEST(AttributionCorpusTest, JsonlRoundTrip) {
    testing::TempDir dir;
    const auto c = synthetic_corpus(2, 5, 3);
    testing::write_file(dir.path() / "c.jsonl", to_jsonl(c));
    const auto back = load_attribution_corpus(dir.path() / "c.jsonl");
    ASSERT_EQ(back.rows.size(), c.rows.size());
    EXPECT_EQ(back.rows[7].paragraph, c.rows[7].paragraph);
    testing::write_file(dir.path() / "t.jsonl", R"({"speaker":"Mark2","text":"hi"})" "\n");
    EXPECT_EQ(load_attribution_corpus(dir.path() / "t.jsonl").rows[0].role, "Mark2");
}

TEST(Features, NgramsAndWords) {
    const auto f = extract_features("Ab ab", FeatureSpec{1, 2, true});
    EXPECT_TRUE(f.count("c:A"));
    EXPECT_TRUE(f.count("c:b "));
    EXPECT_TRUE(f.count("w:ab"));
    EXPECT_FALSE(f.count("w:Ab"));
    double norm = 0;
    for (const auto& [k, v] : f) norm += v * v;
    EXPECT_NEAR(norm, 1.0, 1e-12);
    // 'b' occurs twice among the unigrams; 'A' once.
    EXPECT_NEAR(f.at("c:b") / f.at("c:A"), 2.0, 1e-12);
    EXPECT_TRUE(extract_features("", FeatureSpec{}).empty());
}

TEST(Features, MultibyteCharactersStayWhole) {
    const auto f = extract_features("caf\xC3\xA9", FeatureSpec{1, 1, false});
    EXPECT_TRUE(f.count("c:\xC3\xA9"));
    EXPECT_EQ(f.size(), 4u);
}

TEST(Classifier, SeparableCorpusAndDeterminism) {
    const auto c = synthetic_corpus(5, 100, 11);
    const auto a = train_classifier(c, "Mark2");
    const auto b = train_classifier(c, "Mark2");
    EXPECT_GE(a.validation_accuracy(), 0.95);
    EXPECT_EQ(a.weights(), b.weights());
    EXPECT_EQ(a.bias(), b.bias());

    const auto held_out = synthetic_corpus(5, 40, 999);
    for (const auto& row : held_out.rows) EXPECT_EQ(a.predict(row.paragraph), b.predict(row.paragraph));
}

TEST(Classifier, SingleClassRejected) {
    AttributionCorpus only;
    only.rows = {{"Mark2", "a"}, {"Mark2", "b"}};
    EXPECT_THROW(train_classifier(only, "Mark2"), SingleClassCorpus);
    EXPECT_THROW(train_classifier(synthetic_corpus(2, 5, 1), "Nobody"), SingleClassCorpus);
}

TEST(Classifier, JsonRoundTripPredictsIdentically) {
    const auto c = synthetic_corpus(3, 30, 4);
    const auto clf = train_classifier(c, "Tony");
    const auto back = StyleClassifier::from_json(nlohmann::json::parse(clf.to_json().dump()));
    EXPECT_EQ(back.target_role(), "Tony");
    EXPECT_EQ(back.vocabulary_size(), clf.vocabulary_size());
    for (const auto& row : c.rows) EXPECT_DOUBLE_EQ(back.probability(row.paragraph), clf.probability(row.paragraph));
    auto wrong = clf.to_json();
    wrong["kind"] = "bert";
    EXPECT_THROW(StyleClassifier::from_json(wrong), std::invalid_argument);
}

TEST(SuccessRate, CountsAndBounds) {
    const auto c = synthetic_corpus(5, 60, 21);
    const auto clf = train_classifier(c, "Mark2");
    std::vector<generation::Conversation> convs(5);
    std::mt19937_64 rng(4);
    for (auto& conv : convs)
        for (int p = 0; p < 10; ++p)
            conv.paragraphs.push_back(
                {p % 2 ? 'B' : 'A', testing::filler(12, testing::role_vocabulary(rng() % 5), rng())});
    const auto rate = success_rate(convs, clf);
    EXPECT_EQ(rate.total, 50u);
    EXPECT_LE(rate.predicted_target, rate.total);
    EXPECT_GE(rate.rate(), 0.0);
    EXPECT_LE(rate.rate(), 1.0);
    EXPECT_THROW(success_rate({}, clf), std::invalid_argument);

    SuccessRate fixed{51, 100};
    EXPECT_DOUBLE_EQ(fixed.rate(), 0.51);
}

TEST(SuccessRate, NeverTargetGivesZero) {
    // Conversations use only the non-target vocabulary.
    AttributionCorpus c;
    for (int i = 0; i < 20; ++i) c.rows.push_back({"Other", testing::filler(10, testing::role_vocabulary(0), i)});
    for (int i = 0; i < 20; ++i) c.rows.push_back({"Target", testing::filler(10, testing::role_vocabulary(1), i)});
    const auto clf = train_classifier(c, "Target");
    std::vector<generation::Conversation> convs(1);
    for (int p = 0; p < 10; ++p)
        convs[0].paragraphs.push_back({'A', testing::filler(10, testing::role_vocabulary(0), 500 + p)});
    EXPECT_DOUBLE_EQ(success_rate(convs, clf).rate(), 0.0);
}

TEST(Report, JudgeOnlyRowsHaveNullTracks) {
    ReportInputs in;
    in.conversations = {{"1", "standard"}, {"2", "cot"}};
    in.judge_scores = {{"1", 1, 7, ""}, {"1", 2, 6, ""}, {"2", 1, 8, ""}, {"ghost", 1, 3, ""}};
    const auto rows = build_report(in);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].group, "standard");
    EXPECT_EQ(rows[0].judge->n_scores, 2u);
    EXPECT_DOUBLE_EQ(rows[0].judge->rounded(), 6.5);
    const auto j = to_json(rows);
    EXPECT_TRUE(j[0]["mean_human_score"].is_null());
    EXPECT_TRUE(j[0]["success_rate"].is_null());
    EXPECT_TRUE(j[0]["classifier"].is_null());
    EXPECT_EQ(j[1]["mean_judge_score"], 8.0);
}

TEST(Report, AttributionAndClassifierMetadata) {
    ReportInputs in;
    in.conversations = {{"1", "tot"}, {"2", "tot"}};
    in.attribution = {{"1", 6, 10}, {"2", 4, 10}};
    in.classifier = ClassifierInfo{std::string(StyleClassifier::kind), "Mark2", 0.96};
    const auto j = to_json(build_report(in));
    ASSERT_EQ(j.size(), 1u);
    EXPECT_EQ(j[0]["predicted_target"], 10);
    EXPECT_EQ(j[0]["predicted_total"], 20);
    EXPECT_DOUBLE_EQ(j[0]["success_rate"].get<double>(), 0.5);
    EXPECT_EQ(j[0]["classifier"]["kind"], "ngram-linear-v1");
    EXPECT_EQ(j[0]["classifier"]["target_role"], "Mark2");
}

} // namespace
} // namespace stylecast::eval
