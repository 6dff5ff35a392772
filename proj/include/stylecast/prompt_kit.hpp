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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stylecast/error.hpp"

namespace stylecast::prompt {

class TemplateError : public Error {
public:
    using Error::Error;
};

class EmptyGivenText : public Error {
public:
    EmptyGivenText() : Error("given text is empty") {}
};

class TooFewCandidates : public Error {
public:
    explicit TooFewCandidates(std::size_t n)
        : Error("a vote needs at least 2 candidates, got " + std::to_string(n)) {}
};

class MissingReference : public Error {
public:
    MissingReference() : Error("style-match vote requires reference text") {}
};

class MissingStyleDescription : public Error {
public:
    MissingStyleDescription() : Error("response prompt requires a style description") {}
};

class EmptyInput : public Error {
public:
    explicit EmptyInput(const std::string& what) : Error("empty input: " + what) {}
};

class UnparseableScore : public Error {
public:
    explicit UnparseableScore(const std::string& why) : Error("unparseable judge score: " + why) {}
};

class CountMismatch : public Error {
public:
    CountMismatch(std::size_t found, std::size_t expected)
        : Error("expected " + std::to_string(expected) + " items, found " + std::to_string(found)),
          found_(found), expected_(expected) {}
    std::size_t found() const { return found_; }
    std::size_t expected() const { return expected_; }

private:
    std::size_t found_;
    std::size_t expected_;
};

enum class Family {
    zero_shot,
    cot,
    tot_plan,
    tot_conversation,
    tot_vote_plan,
    tot_vote_conversation,
    chat_style_description,
    chat_response,
    chat_vote_description,
    chat_vote_response,
    judge,
};

std::string_view to_string(Family family);
Family family_from_string(std::string_view name);
const std::vector<Family>& all_families();

/// Slots a family's template may reference.
const std::vector<std::string>& declared_slots(Family family);

struct Element {
    std::string name;
    std::string text;
};

/// One prompt family parsed from its asset file.
///
/// File layout: `### <element_name>` starts an element, `### @<name>` starts a
/// fragment (a selectable phrase substituted into a slot by the renderer).
/// Slots are written `{slot_name}`.
class PromptTemplate {
public:
    static PromptTemplate parse(Family family, std::string_view source);

    Family family() const { return family_; }
    const std::vector<Element>& elements() const { return elements_; }
    const std::string& fragment(const std::string& name) const;
    /// Short content hash of the asset; recorded in run manifests.
    const std::string& version() const { return version_; }
    std::vector<std::string> referenced_slots() const;

private:
    Family family_ = Family::zero_shot;
    std::vector<Element> elements_;
    std::map<std::string, std::string> fragments_;
    std::string version_;
};

class TemplateLibrary {
public:
    /// Templates compiled in from assets/templates.
    static TemplateLibrary builtin();
    /// Builtin templates overridden by any `<family>.txt` found in `dir`.
    static TemplateLibrary load_dir(const std::filesystem::path& dir);

    const PromptTemplate& get(Family family) const;
    std::map<std::string, std::string> versions() const;

private:
    std::map<Family, PromptTemplate> templates_;
};

/// Hex SHA-256 of `text`.
std::string fingerprint(std::string_view text);

struct RenderedPrompt {
    Family family = Family::zero_shot;
    std::string text;
    std::map<std::string, std::string> slots;
    std::string fingerprint;
    std::string template_version;
};

struct VoteBallot {
    int chosen_index = 0; // 1-based; 0 marks an invalid ballot
    std::string raw_response;

    bool valid() const { return chosen_index > 0; }
};

enum class GenerationMode { new_conversation, continuation };
enum class VoteCriterion { task_fit, style_match };

struct HistoryTurn {
    std::string user_msg;
    std::string reply;
};

/// Renders every prompt family from a template library. Stateless and safe to
/// share across threads.
class PromptKit {
public:
    PromptKit();
    explicit PromptKit(TemplateLibrary templates);

    RenderedPrompt zero_shot(std::string_view target_role, std::string_view given_text, int n_paragraphs,
                             GenerationMode mode) const;
    /// Continuation prompt identical to zero_shot() outside the instruction
    /// element, which carries a three-step plan.
    RenderedPrompt cot(std::string_view target_role, std::string_view given_text, int n_paragraphs) const;
    RenderedPrompt tot_plan(std::string_view target_role, std::string_view given_text, int n_plans,
                            int n_paragraphs = 10) const;
    RenderedPrompt tot_conversation(std::string_view target_role, std::string_view given_text,
                                    std::string_view plan, int n_candidates, int n_paragraphs = 10) const;
    RenderedPrompt tot_vote(const std::vector<std::string>& candidates, VoteCriterion criterion,
                            const std::optional<std::string>& reference, std::string_view target_role) const;
    RenderedPrompt chat_style_description(std::string_view given_text, int n_candidates) const;
    RenderedPrompt chat_response(const std::optional<std::string>& style_description,
                                 const std::vector<HistoryTurn>& history, std::string_view user_msg,
                                 int n_candidates) const;
    RenderedPrompt chat_vote_description(const std::vector<std::string>& candidates,
                                         std::string_view given_text) const;
    RenderedPrompt chat_vote_response(const std::vector<std::string>& candidates, std::string_view reference,
                                      std::string_view user_msg) const;
    RenderedPrompt judge(std::string_view conversation, const std::vector<std::string>& reference_paragraphs) const;

    const TemplateLibrary& templates() const { return templates_; }

private:
    RenderedPrompt render(Family family, std::map<std::string, std::string> slots) const;

    TemplateLibrary templates_;
};

/// Display header for an element name: "given_text" -> "Given Text".
std::string element_header(std::string_view element_name);

/// Last "choice k" in the reply (case-insensitive; "best choice: k" included),
/// else a bare trailing integer. Out-of-range or absent yields an invalid ballot.
VoteBallot parse_vote(std::string_view raw, int n_candidates);

/// Last "score: k" in the reply; throws UnparseableScore unless 1 <= k <= 10.
int parse_judge_score(std::string_view raw);

/// Splits a multi-item reply on sequentially numbered markers. Labelled markers
/// ("Plan 2:", "Conversation 3.") take precedence; otherwise line-leading
/// "2." / "2)" markers are used. Throws CountMismatch unless exactly
/// `expected` items are found.
std::vector<std::string> parse_numbered_list(std::string_view raw, std::size_t expected);

} // namespace stylecast::prompt
