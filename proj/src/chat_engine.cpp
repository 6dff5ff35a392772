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

#include "stylecast/chat_engine.hpp"

#include <ctime>
#include <stdexcept>

namespace stylecast::chat {

ChatSession::ChatSession(std::string id, std::string persona, PersonaProfile profile, std::string created_at,
                         std::vector<Turn> turns)
    : id_(std::move(id)), persona_(std::move(persona)), profile_(std::move(profile)),
      created_at_(std::move(created_at)), turns_(std::move(turns)) {}

std::vector<Turn> ChatSession::turns() const {
    std::lock_guard lock(turns_mutex_);
    return turns_;
}

std::size_t ChatSession::turn_count() const {
    std::lock_guard lock(turns_mutex_);
    return turns_.size();
}

ChatEngine::ChatEngine(llm::Gateway& gateway, const prompt::PromptKit& prompts, llm::ModelEndpoint endpoint,
                       ChatConfig config)
    : gateway_(gateway), prompts_(prompts), endpoint_(std::move(endpoint)), config_(config) {
    endpoint_.validate();
}

PersonaProfile ChatEngine::init_persona(std::string_view given_text) const {
    if (given_text.find_first_not_of(" \t\r\n") == std::string_view::npos) throw prompt::EmptyGivenText();

    generation::SelectionSpec spec;
    spec.stage = generation::Stage::description;
    spec.tag = "chat.description";
    spec.n_candidates = config_.n_candidates;
    spec.n_ballots = config_.n_ballots;
    spec.generation_prompt = generation::fit_prompt(
        endpoint_, config_.description_output_tokens, given_text, llm::Keep::head,
        [&](std::string_view text) { return prompts_.chat_style_description(text, config_.n_candidates); });
    spec.vote_prompt = [&](const std::vector<std::string>& descriptions) {
        return generation::fit_prompt(endpoint_, config_.limits.vote_output_tokens, given_text, llm::Keep::head,
                                      [&](std::string_view text) { return prompts_.chat_vote_description(descriptions, text); });
    };

    auto limits = config_.limits;
    limits.generation_output_tokens = config_.description_output_tokens;
    PersonaProfile profile;
    profile.given_text = std::string(given_text);
    profile.description_set = generation::tot_select(gateway_, endpoint_, spec, limits);
    profile.best_description = profile.description_set.winner();
    return profile;
}

Turn ChatEngine::respond(ChatSession& session, std::string_view user_msg) const {
    std::unique_lock in_flight(session.in_flight_, std::try_to_lock);
    if (!in_flight.owns_lock()) throw SessionBusy(session.id());
    if (user_msg.find_first_not_of(" \t\r\n") == std::string_view::npos) throw prompt::EmptyInput("user message");

    const auto started = std::chrono::steady_clock::now();
    const auto& profile = session.profile();
    const auto history_turns = session.turns();

    const auto render_with = [&](const std::vector<Turn>& turns) {
        std::vector<prompt::HistoryTurn> history;
        for (const auto& t : turns) history.push_back({t.user_msg, t.reply});
        return prompts_.chat_response(profile.best_description, history, user_msg, config_.n_candidates);
    };
    const llm::CompletionRequest empty_history{endpoint_, render_with({}), config_.response_output_tokens, "", std::nullopt};
    const auto kept = trim_history(history_turns, endpoint_.max_context_tokens, llm::request_tokens(empty_history));

    generation::SelectionSpec spec;
    spec.stage = generation::Stage::response;
    spec.tag = "chat.response";
    spec.n_candidates = config_.n_candidates;
    spec.n_ballots = config_.n_ballots;
    spec.generation_prompt = render_with(kept);
    spec.vote_prompt = [&](const std::vector<std::string>& replies) {
        return generation::fit_prompt(endpoint_, config_.limits.vote_output_tokens, profile.given_text, llm::Keep::head,
                                      [&](std::string_view text) { return prompts_.chat_vote_response(replies, text, user_msg); });
    };

    auto limits = config_.limits;
    limits.generation_output_tokens = config_.response_output_tokens;
    Turn turn;
    turn.user_msg = std::string(user_msg);
    turn.trace = generation::tot_select(gateway_, endpoint_, spec, limits);
    turn.reply = turn.trace.winner();
    turn.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);

    std::lock_guard lock(session.turns_mutex_);
    turn.ordinal = static_cast<int>(session.turns_.size()) + 1;
    session.turns_.push_back(turn);
    return turn;
}

std::size_t turn_tokens(const Turn& turn) {
    return llm::estimate_tokens("User: " + turn.user_msg + "\nYou: " + turn.reply);
}

std::vector<Turn> trim_history(std::span<const Turn> turns, std::size_t budget, std::size_t fixed_tokens) {
    if (budget == 0) throw std::invalid_argument("history budget must be positive");
    std::size_t used = fixed_tokens;
    std::size_t first_kept = turns.size();
    while (first_kept > 0) {
        const std::size_t cost = turn_tokens(turns[first_kept - 1]);
        if (used + cost > budget) break;
        used += cost;
        --first_kept;
    }
    return {turns.begin() + static_cast<std::ptrdiff_t>(first_kept), turns.end()};
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace stylecast::chat
