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

#include <chrono>
#include <cstddef>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stylecast/error.hpp"
#include "stylecast/generation.hpp"
#include "stylecast/llm_gateway.hpp"
#include "stylecast/prompt_kit.hpp"

namespace stylecast::chat {

class SessionBusy : public Error {
public:
    explicit SessionBusy(const std::string& id) : Error("session " + id + " already has a message in flight") {}
};

struct PersonaProfile {
    std::string given_text;
    generation::CandidateSet description_set; // stage: description
    std::string best_description;
};

using TurnTrace = generation::CandidateSet; // stage: response

struct Turn {
    int ordinal = 0; // 1-based
    std::string user_msg;
    std::string reply; // the winning candidate; the only text the user sees
    TurnTrace trace;
    std::chrono::milliseconds latency{0};
};

/// One conversation with a persona. Turns are appended only by
/// ChatEngine::respond, one message at a time.
class ChatSession {
public:
    ChatSession(std::string id, std::string persona, PersonaProfile profile, std::string created_at,
                std::vector<Turn> turns = {});

    const std::string& id() const { return id_; }
    const std::string& persona() const { return persona_; }
    const PersonaProfile& profile() const { return profile_; }
    const std::string& created_at() const { return created_at_; }

    std::vector<Turn> turns() const;
    std::size_t turn_count() const;

private:
    friend class ChatEngine;

    std::string id_;
    std::string persona_;
    PersonaProfile profile_;
    std::string created_at_;
    mutable std::mutex turns_mutex_;
    std::vector<Turn> turns_;
    std::mutex in_flight_;
};

struct ChatConfig {
    int n_candidates = 3;
    int n_ballots = 5;
    generation::Limits limits{};
    std::size_t description_output_tokens = 1500;
    std::size_t response_output_tokens = 1024;
};

class ChatEngine {
public:
    ChatEngine(llm::Gateway& gateway, const prompt::PromptKit& prompts, llm::ModelEndpoint endpoint,
               ChatConfig config = {});

    /// Generates candidate style descriptions of `given_text` and keeps the one
    /// the ballots pick. Throws prompt::EmptyGivenText on blank input.
    PersonaProfile init_persona(std::string_view given_text) const;

    /// Generates candidate replies, votes on style match against the persona's
    /// text, appends the winner to the session and returns the new turn.
    /// Throws SessionBusy when another respond() on `session` is running.
    Turn respond(ChatSession& session, std::string_view user_msg) const;

    const llm::ModelEndpoint& endpoint() const { return endpoint_; }

private:
    llm::Gateway& gateway_;
    const prompt::PromptKit& prompts_;
    llm::ModelEndpoint endpoint_;
    ChatConfig config_;
};

/// Estimated tokens of one turn as it appears in the history block.
std::size_t turn_tokens(const Turn& turn);

/// Longest suffix of `turns` such that fixed_tokens plus the kept turns fit in
/// `budget`. The current user message belongs to fixed_tokens and is never
/// dropped.
std::vector<Turn> trim_history(std::span<const Turn> turns, std::size_t budget, std::size_t fixed_tokens);

/// Current UTC time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_timestamp();

} // namespace stylecast::chat
