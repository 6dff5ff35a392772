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

#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "stylecast/corpus.hpp"
#include "stylecast/error.hpp"
#include "stylecast/generation.hpp"
#include "stylecast/llm_gateway.hpp"
#include "stylecast/prompt_kit.hpp"

namespace stylecast::eval {

class EmptyScores : public Error {
public:
    EmptyScores() : Error("no scores to aggregate") {}
};

class MalformedRow : public Error {
public:
    MalformedRow(std::size_t line, const std::string& reason)
        : Error("score sheet line " + std::to_string(line) + ": " + reason), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class SingleClassCorpus : public Error {
public:
    explicit SingleClassCorpus(const std::string& target)
        : Error("attribution corpus needs rows both from and not from " + target) {}
};

// ---------------------------------------------------------------------------
// LLM judge

struct JudgeScore {
    std::string conversation_id;
    int pass = 1; // 1-based
    int score = 1; // 1..10
    std::string analysis;
};

struct JudgeOptions {
    int passes = 3;
    std::size_t output_tokens = 768;
    double temperature = 0.0;
};

/// `passes` independent judge calls for one conversation. A reply without a
/// usable score is retried once per pass; a second failure throws
/// prompt::UnparseableScore.
std::vector<JudgeScore> judge(llm::Gateway& gateway, const prompt::PromptKit& prompts,
                              const llm::ModelEndpoint& endpoint, const std::string& conversation_id,
                              std::string_view conversation, const std::vector<std::string>& reference_paragraphs,
                              const JudgeOptions& options = {});

nlohmann::json to_json(const JudgeScore& s);
JudgeScore judge_score_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Aggregation

/// Arithmetic mean; throws EmptyScores.
double mean(std::span<const double> scores);
double round_half_up(double value, int decimals = 2);
/// mean() rounded half-up to 2 decimals.
double aggregate(std::span<const double> scores);

// ---------------------------------------------------------------------------
// Human Likert sheets

struct HumanScoreSheet {
    std::string evaluator_id;
    std::string conversation_id;
    int word_choice = 1;
    int sentence_structure = 1;
    int figurative_language = 1;
    int sentence_arrangement = 1;

    int total() const { return word_choice + sentence_structure + figurative_language + sentence_arrangement; }
};

/// CSV with header
/// evaluator_id,conversation_id,word_choice,sentence_structure,figurative_language,sentence_arrangement
/// (columns in any order). Every criterion must be an integer in 1..5.
std::vector<HumanScoreSheet> ingest_human_sheet(std::istream& csv);

// ---------------------------------------------------------------------------
// Authorship attribution

struct AttributionRow {
    std::string role;
    std::string paragraph;
};

struct AttributionCorpus {
    std::vector<AttributionRow> rows;
    std::vector<std::string> warnings;

    std::vector<std::string> roles() const;
    std::size_t count(std::string_view role) const;
};

struct AttributionOptions {
    std::size_t per_role = 100;
    std::vector<std::string> exclude_roles;
};

/// The first `per_role` paragraphs of every role across `transcripts`. Roles
/// with fewer paragraphs contribute all they have and add a warning.
AttributionCorpus build_attribution_corpus(const std::vector<corpus::Transcript>& transcripts,
                                           std::string_view target_role, const AttributionOptions& options = {});

/// Drops the rows of `from_role` and adds up to `per_role` of `paragraphs`
/// labelled `to_role`.
AttributionCorpus replace_role(const AttributionCorpus& corpus, std::string_view from_role, std::string_view to_role,
                               const std::vector<std::string>& paragraphs, std::size_t per_role = 100);

std::string to_jsonl(const AttributionCorpus& corpus);
/// Reads {"role","paragraph"} (or {"speaker","text"}) lines.
AttributionCorpus load_attribution_corpus(const std::filesystem::path& path);

struct FeatureSpec {
    int min_char_n = 1;
    int max_char_n = 3;
    bool word_unigrams = true;
};

struct TrainOptions {
    double validation_fraction = 0.2;
    std::uint64_t seed = 7;
    double l2 = 1e-4;
    double learning_rate = 1.0;
    int max_iterations = 2000;
    double tolerance = 1e-5; // gradient norm
    FeatureSpec features{};
};

/// Sparse, L2-normalised n-gram frequency vector keyed by feature string.
std::unordered_map<std::string, double> extract_features(std::string_view paragraph, const FeatureSpec& spec);

/// Binary stylometric classifier: target role = 1, every other role = 0.
/// Logistic regression over character n-grams and lowercased word unigrams.
class StyleClassifier {
public:
    static constexpr std::string_view kind = "ngram-linear-v1";

    const std::string& target_role() const { return target_role_; }
    const FeatureSpec& features() const { return features_; }
    double validation_accuracy() const { return validation_accuracy_; }
    std::size_t vocabulary_size() const { return vocabulary_.size(); }
    const std::vector<double>& weights() const { return weights_; }
    double bias() const { return bias_; }

    double probability(std::string_view paragraph) const;
    /// 1 when the paragraph is attributed to the target role.
    int predict(std::string_view paragraph) const;

    nlohmann::json to_json() const;
    static StyleClassifier from_json(const nlohmann::json& j);

private:
    friend StyleClassifier train_classifier(const AttributionCorpus&, std::string_view, const TrainOptions&);

    std::string target_role_;
    FeatureSpec features_;
    std::map<std::string, std::size_t> vocabulary_;
    std::vector<double> weights_;
    double bias_ = 0.0;
    double validation_accuracy_ = 0.0;
    std::size_t iterations_ = 0;
};

/// Stratified hold-out of `validation_fraction` per class (seeded), class-
/// balanced logistic loss with L2, accelerated gradient descent until the
/// gradient norm drops below tolerance. Deterministic for a fixed seed.
StyleClassifier train_classifier(const AttributionCorpus& corpus, std::string_view target_role,
                                 const TrainOptions& options = {});

struct SuccessRate {
    std::size_t predicted_target = 0;
    std::size_t total = 0;

    double rate() const { return total == 0 ? 0.0 : static_cast<double>(predicted_target) / static_cast<double>(total); }
};

/// Fraction of all paragraphs of `conversations` attributed to the target.
SuccessRate success_rate(std::span<const generation::Conversation> conversations, const StyleClassifier& clf);

// ---------------------------------------------------------------------------
// Report

struct ConversationRef {
    std::string id;
    std::string group;
};

struct AttributionCount {
    std::string conversation_id;
    std::size_t predicted_target = 0;
    std::size_t total = 0;
};

struct ClassifierInfo {
    std::string kind{StyleClassifier::kind};
    std::string target_role;
    double validation_accuracy = 0.0;
};

struct ReportInputs {
    std::vector<ConversationRef> conversations;
    std::vector<JudgeScore> judge_scores;
    std::vector<HumanScoreSheet> human_sheets;
    std::vector<AttributionCount> attribution;
    std::optional<ClassifierInfo> classifier;
};

struct TrackSummary {
    std::size_t n_scores = 0;
    double mean = 0.0; // unrounded
    double rounded() const { return round_half_up(mean); }
};

struct EvaluationReport {
    std::string group;
    std::size_t n_conversations = 0;
    std::optional<TrackSummary> judge;
    std::optional<TrackSummary> human;
    std::optional<SuccessRate> attribution;
    std::optional<ClassifierInfo> classifier;
};

/// One row per group, in order of first appearance. A track with no data for
/// a group is left empty.
std::vector<EvaluationReport> build_report(const ReportInputs& inputs);

nlohmann::json to_json(const EvaluationReport& row);
nlohmann::json to_json(const std::vector<EvaluationReport>& rows);

} // namespace stylecast::eval
