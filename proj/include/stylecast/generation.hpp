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

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stylecast/corpus.hpp"
#include "stylecast/error.hpp"
#include "stylecast/llm_gateway.hpp"
#include "stylecast/prompt_kit.hpp"

namespace stylecast::generation {

class MalformedGeneration : public Error {
public:
    MalformedGeneration(std::string model, int ordinal, const std::string& why)
        : Error("malformed generation from " + model + " (#" + std::to_string(ordinal) + "): " + why),
          model_(std::move(model)), ordinal_(ordinal) {}
    const std::string& model() const { return model_; }
    int ordinal() const { return ordinal_; }

private:
    std::string model_;
    int ordinal_;
};

struct Paragraph {
    char speaker = 'A'; // 'A' or 'B'
    std::string text;

    friend bool operator==(const Paragraph&, const Paragraph&) = default;
};

struct Provenance {
    std::string task;   // "task1" | "task2"
    std::string model;  // endpoint name
    std::string family; // zero_shot | standard | cot | tot
    int ordinal = 0;    // repeat (task1) or segment (task2), 1-based
    std::string target_role;
    std::string dataset;

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct Conversation {
    std::vector<Paragraph> paragraphs;
    Provenance provenance;

    /// "A: ...\nB: ..." form.
    std::string text() const;

    friend bool operator==(const Conversation&, const Conversation&) = default;
};

/// Reads "A: ..." / "B: ..." paragraphs. Unlabelled lines continue the
/// current paragraph; text before the first label is ignored. Returns nullopt
/// unless exactly `expected` paragraphs alternate A, B, A, ...
std::optional<std::vector<Paragraph>> parse_conversation(std::string_view raw, int expected);

enum class Stage { plan, conversation, description, response };

std::string_view to_string(Stage stage);
Stage stage_from_string(std::string_view name);

/// The generate -> ballot -> select record of one tree-of-thoughts stage.
struct CandidateSet {
    Stage stage = Stage::plan;
    std::vector<std::string> candidates;
    std::vector<prompt::VoteBallot> ballots;
    int winner_index = 1; // 1-based

    const std::string& winner() const { return candidates.at(static_cast<std::size_t>(winner_index - 1)); }
};

/// Candidate with the most valid ballots; ties go to the lowest index. With
/// no valid ballot at all, candidate 1 wins and a warning is logged.
int tally(std::span<const prompt::VoteBallot> ballots, int n_candidates);

struct TotTrace {
    std::size_t segment = 0;
    CandidateSet plan_set;
    CandidateSet conversation_set;
    Conversation best_conversation;
};

struct Limits {
    std::size_t generation_output_tokens = 1500;
    std::size_t vote_output_tokens = 400;
    double vote_temperature = 0.0;
};

/// Renders `render(text)` with `variable_text` cut down, in whole words, until
/// the request fits the endpoint's context. Throws llm::BudgetExceeded when
/// even one word does not fit.
prompt::RenderedPrompt fit_prompt(const llm::ModelEndpoint& endpoint, std::size_t max_output_tokens,
                                  std::string_view variable_text, llm::Keep keep,
                                  const std::function<prompt::RenderedPrompt(std::string_view)>& render);

struct SelectionSpec {
    Stage stage = Stage::plan;
    std::string tag; // ".generate" and ".vote" are appended
    prompt::RenderedPrompt generation_prompt;
    std::function<prompt::RenderedPrompt(const std::vector<std::string>&)> vote_prompt;
    /// Optional per-candidate check; a rejected candidate triggers the re-ask.
    std::function<bool(std::string_view)> accept_candidate;
    int n_candidates = 3;
    int n_ballots = 5;
};

/// One generation call yielding n_candidates items, then n_ballots vote calls.
/// A malformed generation is re-asked once; a second failure propagates
/// (prompt::CountMismatch or MalformedGeneration).
CandidateSet tot_select(llm::Gateway& gateway, const llm::ModelEndpoint& endpoint, const SelectionSpec& spec,
                        const Limits& limits);

struct PipelineContext {
    llm::Gateway& gateway;
    const prompt::PromptKit& prompts;
    Limits limits{};
};

struct Task1Options {
    int repeats = 10;
    int n_paragraphs = 10;
    std::string dataset;
};

/// Cross-model imitation: for every model, `repeats` independent zero-shot
/// new-conversation generations over the whole training text.
std::vector<Conversation> run_task1(PipelineContext& ctx, const std::vector<llm::ModelEndpoint>& models,
                                    const corpus::CorpusSplit& dataset, std::string_view target_role,
                                    const Task1Options& options = {});

enum class Task2Prompt { standard, cot, tot };

std::string_view to_string(Task2Prompt family);
Task2Prompt task2_prompt_from_string(std::string_view name);

struct Task2Options {
    std::size_t window = 4400;
    std::size_t stride = 2200;
    int n_paragraphs = 10;
    int n_candidates = 3;
    int n_ballots = 5;
    std::string dataset;
};

struct Task2Result {
    std::vector<Conversation> conversations; // one per segment
    std::vector<TotTrace> traces;            // tot only
};

/// Prompt comparison: one continuation per sliding-window segment of the
/// training text. tot runs the plan stage over all segments, then the
/// conversation stage.
Task2Result run_task2(PipelineContext& ctx, const llm::ModelEndpoint& endpoint, Task2Prompt family,
                      const corpus::CorpusSplit& dataset, std::string_view target_role = "Mark2",
                      const Task2Options& options = {});

} // namespace stylecast::generation
