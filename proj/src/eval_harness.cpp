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

#include "stylecast/eval_harness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "stylecast/logging.hpp"

namespace stylecast::eval {

using nlohmann::json;

namespace {

const std::vector<std::string> kSheetColumns = {"evaluator_id",       "conversation_id",     "word_choice",
                                                "sentence_structure", "figurative_language", "sentence_arrangement"};

std::string trim_field(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return std::string(s);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(trim_field(field));
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

int criterion(const std::string& value, const std::string& column, std::size_t line) {
    int score = 0;
    std::size_t used = 0;
    try {
        score = std::stoi(value, &used);
    } catch (const std::exception&) {
        throw MalformedRow(line, column + " is not an integer: '" + value + "'");
    }
    if (used != value.size()) throw MalformedRow(line, column + " is not an integer: '" + value + "'");
    if (score < 1 || score > 5) throw MalformedRow(line, column + " = " + std::to_string(score) + " outside 1..5");
    return score;
}

} // namespace

std::vector<JudgeScore> judge(llm::Gateway& gateway, const prompt::PromptKit& prompts,
                              const llm::ModelEndpoint& endpoint, const std::string& conversation_id,
                              std::string_view conversation, const std::vector<std::string>& reference_paragraphs,
                              const JudgeOptions& options) {
    if (options.passes < 1) throw std::invalid_argument("passes must be at least 1");
    std::string reference;
    for (const auto& p : reference_paragraphs) {
        if (!reference.empty()) reference += "\n\n";
        reference += p;
    }
    // Renders once unfitted so empty inputs raise EmptyInput before any fitting.
    (void)prompts.judge(conversation, reference_paragraphs);
    const auto prompt = generation::fit_prompt(endpoint, options.output_tokens, reference, llm::Keep::head,
                                               [&](std::string_view ref) {
                                                   return prompts.judge(conversation, {std::string(ref)});
                                               });
    const llm::CompletionRequest req{endpoint, prompt, options.output_tokens, "judge", options.temperature};

    std::vector<JudgeScore> scores;
    for (int pass = 1; pass <= options.passes; ++pass) {
        for (int ask = 1;; ++ask) {
            const auto reply = gateway.complete(req);
            try {
                scores.push_back({conversation_id, pass, prompt::parse_judge_score(reply.text), reply.text});
                break;
            } catch (const prompt::UnparseableScore& e) {
                if (ask == 2) throw;
                logger()->warn("judge pass {} for conversation {}: {}; asking again", pass, conversation_id, e.what());
            }
        }
    }
    return scores;
}

json to_json(const JudgeScore& s) {
    return {{"conversation_id", s.conversation_id}, {"pass", s.pass}, {"score", s.score}, {"analysis", s.analysis}};
}

JudgeScore judge_score_from_json(const json& j) {
    JudgeScore s{j.at("conversation_id").get<std::string>(), j.at("pass").get<int>(), j.at("score").get<int>(),
                 j.value("analysis", "")};
    if (s.score < 1 || s.score > 10) throw std::invalid_argument("judge score outside 1..10");
    return s;
}

double mean(std::span<const double> scores) {
    if (scores.empty()) throw EmptyScores();
    return std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
}

double round_half_up(double value, int decimals) {
    const double scale = std::pow(10.0, decimals);
    // The epsilon absorbs representation error so x.xx5 rounds up.
    return std::floor(value * scale + 0.5 + 1e-9) / scale;
}

double aggregate(std::span<const double> scores) { return round_half_up(mean(scores), 2); }

std::vector<HumanScoreSheet> ingest_human_sheet(std::istream& csv) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::size_t> column_of(kSheetColumns.size());

    while (std::getline(csv, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        if (line.find_first_not_of(" \t") != std::string::npos) break;
    }
    const auto header = split_csv(line);
    for (std::size_t c = 0; c < kSheetColumns.size(); ++c) {
        const auto it = std::find(header.begin(), header.end(), kSheetColumns[c]);
        if (it == header.end()) throw MalformedRow(line_no, "header lacks column " + kSheetColumns[c]);
        column_of[c] = static_cast<std::size_t>(it - header.begin());
    }

    std::vector<HumanScoreSheet> sheets;
    while (std::getline(csv, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const auto fields = split_csv(line);
        if (fields.size() != header.size())
            throw MalformedRow(line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                            std::to_string(fields.size()));
        HumanScoreSheet sheet;
        sheet.evaluator_id = fields[column_of[0]];
        sheet.conversation_id = fields[column_of[1]];
        if (sheet.evaluator_id.empty()) throw MalformedRow(line_no, "empty evaluator_id");
        if (sheet.conversation_id.empty()) throw MalformedRow(line_no, "empty conversation_id");
        sheet.word_choice = criterion(fields[column_of[2]], kSheetColumns[2], line_no);
        sheet.sentence_structure = criterion(fields[column_of[3]], kSheetColumns[3], line_no);
        sheet.figurative_language = criterion(fields[column_of[4]], kSheetColumns[4], line_no);
        sheet.sentence_arrangement = criterion(fields[column_of[5]], kSheetColumns[5], line_no);
        sheets.push_back(std::move(sheet));
    }
    return sheets;
}

std::vector<std::string> AttributionCorpus::roles() const {
    std::vector<std::string> out;
    for (const auto& row : rows)
        if (std::find(out.begin(), out.end(), row.role) == out.end()) out.push_back(row.role);
    return out;
}

std::size_t AttributionCorpus::count(std::string_view role) const {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [&](const AttributionRow& r) { return r.role == role; }));
}

AttributionCorpus build_attribution_corpus(const std::vector<corpus::Transcript>& transcripts,
                                           std::string_view target_role, const AttributionOptions& options) {
    if (options.per_role == 0) throw std::invalid_argument("per_role must be positive");
    std::vector<std::string> roles;
    std::map<std::string, std::vector<std::string>> paragraphs;
    for (const auto& t : transcripts) {
        for (const auto& u : t.utterances()) {
            if (std::find(options.exclude_roles.begin(), options.exclude_roles.end(), u.speaker) !=
                options.exclude_roles.end())
                continue;
            if (!paragraphs.count(u.speaker)) roles.push_back(u.speaker);
            paragraphs[u.speaker].push_back(u.text);
        }
    }
    if (!paragraphs.count(std::string(target_role))) throw corpus::UnknownRole(std::string(target_role));

    AttributionCorpus out;
    for (const auto& role : roles) {
        const auto& available = paragraphs.at(role);
        if (available.size() < options.per_role) {
            out.warnings.push_back(role + " has " + std::to_string(available.size()) + " paragraphs, fewer than " +
                                   std::to_string(options.per_role));
            logger()->warn("attribution corpus: {}", out.warnings.back());
        }
        const std::size_t take = std::min(available.size(), options.per_role);
        for (std::size_t i = 0; i < take; ++i) out.rows.push_back({role, available[i]});
    }
    return out;
}

AttributionCorpus replace_role(const AttributionCorpus& corpus, std::string_view from_role, std::string_view to_role,
                               const std::vector<std::string>& paragraphs, std::size_t per_role) {
    AttributionCorpus out;
    out.warnings = corpus.warnings;
    for (const auto& row : corpus.rows)
        if (row.role != from_role) out.rows.push_back(row);
    if (paragraphs.size() < per_role) {
        out.warnings.push_back(std::string(to_role) + " has " + std::to_string(paragraphs.size()) +
                               " paragraphs, fewer than " + std::to_string(per_role));
        logger()->warn("attribution corpus: {}", out.warnings.back());
    }
    const std::size_t take = std::min(paragraphs.size(), per_role);
    for (std::size_t i = 0; i < take; ++i) out.rows.push_back({std::string(to_role), paragraphs[i]});
    return out;
}

std::string to_jsonl(const AttributionCorpus& corpus) {
    std::string out;
    for (const auto& row : corpus.rows) {
        out += json{{"role", row.role}, {"paragraph", row.paragraph}}.dump();
        out += '\n';
    }
    return out;
}

AttributionCorpus load_attribution_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw llm::IoError("cannot open attribution corpus: " + path.string());
    AttributionCorpus out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const json j = json::parse(line);
            if (j.contains("role"))
                out.rows.push_back({j.at("role").get<std::string>(), j.at("paragraph").get<std::string>()});
            else
                out.rows.push_back({j.at("speaker").get<std::string>(), j.at("text").get<std::string>()});
        } catch (const json::exception& e) {
            throw corpus::MalformedLine(line_no, e.what());
        }
    }
    return out;
}

SuccessRate success_rate(std::span<const generation::Conversation> conversations, const StyleClassifier& clf) {
    if (conversations.empty()) throw std::invalid_argument("success_rate needs at least one conversation");
    SuccessRate out;
    for (const auto& c : conversations) {
        for (const auto& p : c.paragraphs) {
            ++out.total;
            out.predicted_target += static_cast<std::size_t>(clf.predict(p.text));
        }
    }
    return out;
}

std::vector<EvaluationReport> build_report(const ReportInputs& inputs) {
    std::vector<EvaluationReport> rows;
    std::map<std::string, std::size_t> row_of_group;
    std::map<std::string, std::size_t> row_of_conversation;
    for (const auto& c : inputs.conversations) {
        auto [it, inserted] = row_of_group.try_emplace(c.group, rows.size());
        if (inserted) rows.push_back({c.group, 0, std::nullopt, std::nullopt, std::nullopt, std::nullopt});
        ++rows[it->second].n_conversations;
        row_of_conversation[c.id] = it->second;
    }

    const auto row_for = [&](const std::string& conversation_id, const char* track) -> std::optional<std::size_t> {
        const auto it = row_of_conversation.find(conversation_id);
        if (it == row_of_conversation.end()) {
            logger()->warn("report: {} entry for unknown conversation '{}' ignored", track, conversation_id);
            return std::nullopt;
        }
        return it->second;
    };

    std::vector<std::vector<double>> judge_scores(rows.size());
    std::vector<std::vector<double>> human_scores(rows.size());
    for (const auto& s : inputs.judge_scores)
        if (const auto row = row_for(s.conversation_id, "judge")) judge_scores[*row].push_back(s.score);
    for (const auto& s : inputs.human_sheets)
        if (const auto row = row_for(s.conversation_id, "human")) human_scores[*row].push_back(s.total());
    for (const auto& a : inputs.attribution) {
        if (const auto row = row_for(a.conversation_id, "attribution")) {
            auto& r = rows[*row];
            if (!r.attribution) r.attribution = SuccessRate{};
            r.attribution->predicted_target += a.predicted_target;
            r.attribution->total += a.total;
            r.classifier = inputs.classifier;
        }
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!judge_scores[i].empty()) rows[i].judge = TrackSummary{judge_scores[i].size(), mean(judge_scores[i])};
        if (!human_scores[i].empty()) rows[i].human = TrackSummary{human_scores[i].size(), mean(human_scores[i])};
    }
    return rows;
}

json to_json(const EvaluationReport& row) {
    json j = {{"group", row.group}, {"n_conversations", row.n_conversations}};
    j["n_judge_scores"] = row.judge ? json(row.judge->n_scores) : json(nullptr);
    j["mean_judge_score"] = row.judge ? json(row.judge->rounded()) : json(nullptr);
    j["n_human_scores"] = row.human ? json(row.human->n_scores) : json(nullptr);
    j["mean_human_score"] = row.human ? json(row.human->rounded()) : json(nullptr);
    j["predicted_target"] = row.attribution ? json(row.attribution->predicted_target) : json(nullptr);
    j["predicted_total"] = row.attribution ? json(row.attribution->total) : json(nullptr);
    j["success_rate"] = row.attribution ? json(round_half_up(row.attribution->rate(), 4)) : json(nullptr);
    if (row.classifier) {
        j["classifier"] = {{"kind", row.classifier->kind},
                           {"target_role", row.classifier->target_role},
                           {"validation_accuracy", round_half_up(row.classifier->validation_accuracy, 4)}};
    } else {
        j["classifier"] = nullptr;
    }
    return j;
}

json to_json(const std::vector<EvaluationReport>& rows) {
    json out = json::array();
    for (const auto& row : rows) out.push_back(to_json(row));
    return out;
}

} // namespace stylecast::eval
