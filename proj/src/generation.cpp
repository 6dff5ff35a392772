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

#include "stylecast/generation.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>

#include "stylecast/logging.hpp"

namespace stylecast::generation {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// "A: text", "**A:** text", "- B: text" -> ('A', "text").
std::optional<std::pair<char, std::string_view>> speaker_label(std::string_view line) {
    line = trim(line);
    while (!line.empty() && (line.front() == '*' || line.front() == '-' || line.front() == '>')) {
        line.remove_prefix(1);
        line = trim(line);
    }
    if (line.size() < 2 || (line[0] != 'A' && line[0] != 'B')) return std::nullopt;
    std::size_t pos = 1;
    while (pos < line.size() && line[pos] == '*') ++pos;
    if (pos >= line.size() || line[pos] != ':') return std::nullopt;
    ++pos;
    while (pos < line.size() && line[pos] == '*') ++pos;
    return std::pair{line[0], trim(line.substr(pos))};
}

template <typename Parse>
auto generate_validated(llm::Gateway& gateway, const llm::CompletionRequest& req, int ordinal, Parse parse)
    -> decltype(parse(std::string_view{})) {
    std::string why;
    for (int ask = 1; ask <= 2; ++ask) {
        const auto result = gateway.complete(req);
        try {
            if (auto parsed = parse(result.text)) return parsed;
            why = "reply does not match the requested format";
        } catch (const prompt::CountMismatch& e) {
            if (ask == 2) throw;
            why = e.what();
        }
        if (ask == 1) logger()->warn("{} '{}' #{}: {}; asking again", req.endpoint.name, req.tag, ordinal, why);
    }
    throw MalformedGeneration(req.endpoint.name, ordinal, why);
}

llm::CompletionRequest generation_request(const llm::ModelEndpoint& endpoint, prompt::RenderedPrompt prompt,
                                          std::string tag, const Limits& limits) {
    return {endpoint, std::move(prompt), limits.generation_output_tokens, std::move(tag), std::nullopt};
}

std::string join_paragraphs(const std::vector<std::string>& paragraphs) {
    std::string out;
    for (const auto& p : paragraphs) {
        if (!out.empty()) out += "\n\n";
        out += p;
    }
    return out;
}

Conversation to_conversation(std::vector<Paragraph> paragraphs, Provenance provenance) {
    return {std::move(paragraphs), std::move(provenance)};
}

void require_role(const corpus::CorpusSplit& dataset, std::string_view target_role) {
    if (!dataset.train.has_role(target_role)) throw corpus::UnknownRole(std::string(target_role));
}

} // namespace

std::string Conversation::text() const {
    std::string out;
    for (const auto& p : paragraphs) {
        if (!out.empty()) out += '\n';
        out += p.speaker;
        out += ": ";
        out += p.text;
    }
    return out;
}

std::optional<std::vector<Paragraph>> parse_conversation(std::string_view raw, int expected) {
    std::vector<Paragraph> paragraphs;
    std::istringstream in{std::string(raw)};
    std::string line;
    while (std::getline(in, line)) {
        if (auto label = speaker_label(line)) {
            paragraphs.push_back({label->first, std::string(label->second)});
            continue;
        }
        const auto body = trim(line);
        if (body.empty() || paragraphs.empty()) continue;
        auto& current = paragraphs.back().text;
        if (!current.empty()) current += ' ';
        current += body;
    }
    if (static_cast<int>(paragraphs.size()) != expected) return std::nullopt;
    for (std::size_t i = 0; i < paragraphs.size(); ++i) {
        if (paragraphs[i].speaker != (i % 2 == 0 ? 'A' : 'B')) return std::nullopt;
        if (trim(paragraphs[i].text).empty()) return std::nullopt;
    }
    return paragraphs;
}

std::string_view to_string(Stage stage) {
    switch (stage) {
    case Stage::plan: return "plan";
    case Stage::conversation: return "conversation";
    case Stage::description: return "description";
    case Stage::response: return "response";
    }
    return "plan";
}

Stage stage_from_string(std::string_view name) {
    for (const Stage s : {Stage::plan, Stage::conversation, Stage::description, Stage::response})
        if (to_string(s) == name) return s;
    throw std::invalid_argument("unknown stage: " + std::string(name));
}

int tally(std::span<const prompt::VoteBallot> ballots, int n_candidates) {
    if (n_candidates < 2) throw std::invalid_argument("tally needs at least 2 candidates");
    std::vector<int> votes(static_cast<std::size_t>(n_candidates) + 1, 0);
    for (const auto& b : ballots)
        if (b.valid() && b.chosen_index <= n_candidates) ++votes[static_cast<std::size_t>(b.chosen_index)];

    int winner = 1;
    for (int k = 2; k <= n_candidates; ++k)
        if (votes[static_cast<std::size_t>(k)] > votes[static_cast<std::size_t>(winner)]) winner = k;
    if (votes[static_cast<std::size_t>(winner)] == 0)
        logger()->warn("all {} ballots invalid; selecting candidate 1", ballots.size());
    return winner;
}

prompt::RenderedPrompt fit_prompt(const llm::ModelEndpoint& endpoint, std::size_t max_output_tokens,
                                  std::string_view variable_text, llm::Keep keep,
                                  const std::function<prompt::RenderedPrompt(std::string_view)>& render) {
    const auto fits = [&](std::string_view text) {
        llm::CompletionRequest probe{endpoint, render(text), max_output_tokens, "", std::nullopt};
        return llm::request_tokens(probe) <= endpoint.max_context_tokens;
    };
    const auto fitted = llm::truncate_to_fit(variable_text, keep, fits);
    if (!fitted) {
        llm::CompletionRequest probe{endpoint, render(variable_text), max_output_tokens, "", std::nullopt};
        throw llm::BudgetExceeded(llm::request_tokens(probe), endpoint.max_context_tokens);
    }
    if (fitted->size() < variable_text.size()) {
        logger()->warn("{}: text truncated from {} to {} words to fit {} tokens", endpoint.name,
                       corpus::words_of(variable_text).size(), corpus::words_of(*fitted).size(),
                       endpoint.max_context_tokens);
    }
    return render(*fitted);
}

CandidateSet tot_select(llm::Gateway& gateway, const llm::ModelEndpoint& endpoint, const SelectionSpec& spec,
                        const Limits& limits) {
    if (spec.n_candidates < 2) throw std::invalid_argument("n_candidates must be at least 2");
    if (spec.n_ballots < 1) throw std::invalid_argument("n_ballots must be at least 1");

    CandidateSet set;
    set.stage = spec.stage;
    const auto gen_req = generation_request(endpoint, spec.generation_prompt, spec.tag + ".generate", limits);
    set.candidates = *generate_validated(
        gateway, gen_req, 1, [&](std::string_view reply) -> std::optional<std::vector<std::string>> {
            auto items = prompt::parse_numbered_list(reply, static_cast<std::size_t>(spec.n_candidates));
            if (spec.accept_candidate &&
                !std::all_of(items.begin(), items.end(), [&](const std::string& c) { return spec.accept_candidate(c); }))
                return std::nullopt;
            return items;
        });

    const llm::CompletionRequest vote_req{endpoint, spec.vote_prompt(set.candidates), limits.vote_output_tokens,
                                          spec.tag + ".vote", limits.vote_temperature};
    for (int i = 0; i < spec.n_ballots; ++i)
        set.ballots.push_back(prompt::parse_vote(gateway.complete(vote_req).text, spec.n_candidates));
    set.winner_index = tally(set.ballots, spec.n_candidates);
    return set;
}

std::vector<Conversation> run_task1(PipelineContext& ctx, const std::vector<llm::ModelEndpoint>& models,
                                    const corpus::CorpusSplit& dataset, std::string_view target_role,
                                    const Task1Options& options) {
    if (options.repeats < 1) throw std::invalid_argument("repeats must be at least 1");
    require_role(dataset, target_role);
    const std::string given_text = corpus::to_script(dataset.train);

    std::vector<Conversation> out;
    for (const auto& model : models) {
        const auto prompt = fit_prompt(model, ctx.limits.generation_output_tokens, given_text, llm::Keep::head,
                                       [&](std::string_view text) {
                                           return ctx.prompts.zero_shot(target_role, text, options.n_paragraphs,
                                                                        prompt::GenerationMode::new_conversation);
                                       });
        const auto req = generation_request(model, prompt, "task1.generate", ctx.limits);
        for (int repeat = 1; repeat <= options.repeats; ++repeat) {
            auto paragraphs = generate_validated(ctx.gateway, req, repeat, [&](std::string_view reply) {
                return parse_conversation(reply, options.n_paragraphs);
            });
            out.push_back(to_conversation(
                std::move(*paragraphs),
                {"task1", model.name, "zero_shot", repeat, std::string(target_role), options.dataset}));
        }
    }
    return out;
}

std::string_view to_string(Task2Prompt family) {
    switch (family) {
    case Task2Prompt::standard: return "standard";
    case Task2Prompt::cot: return "cot";
    case Task2Prompt::tot: return "tot";
    }
    return "standard";
}

Task2Prompt task2_prompt_from_string(std::string_view name) {
    for (const auto f : {Task2Prompt::standard, Task2Prompt::cot, Task2Prompt::tot})
        if (to_string(f) == name) return f;
    throw std::invalid_argument("unknown prompt: " + std::string(name) + " (expected standard|cot|tot)");
}

Task2Result run_task2(PipelineContext& ctx, const llm::ModelEndpoint& endpoint, Task2Prompt family,
                      const corpus::CorpusSplit& dataset, std::string_view target_role,
                      const Task2Options& options) {
    require_role(dataset, target_role);
    const auto segments = corpus::segment(corpus::to_script(dataset.train), options.window, options.stride);
    const std::string family_name(to_string(family));
    const int n = options.n_paragraphs;
    const auto& limits = ctx.limits;
    const auto provenance = [&](const corpus::Segment& s) {
        return Provenance{"task2", endpoint.name, family_name, static_cast<int>(s.ordinal), std::string(target_role),
                          options.dataset};
    };

    Task2Result result;
    if (family != Task2Prompt::tot) {
        for (const auto& seg : segments) {
            const auto prompt = fit_prompt(endpoint, limits.generation_output_tokens, seg.text, llm::Keep::tail,
                                           [&](std::string_view text) {
                                               return family == Task2Prompt::cot
                                                          ? ctx.prompts.cot(target_role, text, n)
                                                          : ctx.prompts.zero_shot(target_role, text, n,
                                                                                  prompt::GenerationMode::continuation);
                                           });
            const auto req = generation_request(endpoint, prompt, "task2." + family_name + ".generate", limits);
            auto paragraphs = generate_validated(ctx.gateway, req, static_cast<int>(seg.ordinal),
                                                 [&](std::string_view reply) { return parse_conversation(reply, n); });
            result.conversations.push_back(to_conversation(std::move(*paragraphs), provenance(seg)));
        }
        return result;
    }

    const std::string reference = join_paragraphs(corpus::paragraphs_of(dataset.train, target_role));
    const auto accept_conversation = [n](std::string_view c) { return parse_conversation(c, n).has_value(); };

    std::vector<CandidateSet> plan_sets;
    for (const auto& seg : segments) {
        SelectionSpec spec;
        spec.stage = Stage::plan;
        spec.tag = "tot.plan";
        spec.n_candidates = options.n_candidates;
        spec.n_ballots = options.n_ballots;
        spec.generation_prompt =
            fit_prompt(endpoint, limits.generation_output_tokens, seg.text, llm::Keep::tail, [&](std::string_view text) {
                return ctx.prompts.tot_plan(target_role, text, options.n_candidates, n);
            });
        spec.vote_prompt = [&](const std::vector<std::string>& plans) {
            return ctx.prompts.tot_vote(plans, prompt::VoteCriterion::task_fit, std::nullopt, target_role);
        };
        plan_sets.push_back(tot_select(ctx.gateway, endpoint, spec, limits));
    }

    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto& seg = segments[i];
        const std::string& best_plan = plan_sets[i].winner();
        SelectionSpec spec;
        spec.stage = Stage::conversation;
        spec.tag = "tot.conversation";
        spec.n_candidates = options.n_candidates;
        spec.n_ballots = options.n_ballots;
        spec.accept_candidate = accept_conversation;
        spec.generation_prompt =
            fit_prompt(endpoint, limits.generation_output_tokens, seg.text, llm::Keep::tail, [&](std::string_view text) {
                return ctx.prompts.tot_conversation(target_role, text, best_plan, options.n_candidates, n);
            });
        spec.vote_prompt = [&](const std::vector<std::string>& conversations) {
            return fit_prompt(endpoint, limits.vote_output_tokens, reference, llm::Keep::head,
                              [&](std::string_view ref) {
                                  return ctx.prompts.tot_vote(conversations, prompt::VoteCriterion::style_match,
                                                              std::string(ref), target_role);
                              });
        };
        auto conversation_set = tot_select(ctx.gateway, endpoint, spec, limits);
        auto best = to_conversation(*parse_conversation(conversation_set.winner(), n), provenance(seg));
        result.conversations.push_back(best);
        result.traces.push_back({seg.ordinal, plan_sets[i], std::move(conversation_set), std::move(best)});
    }
    return result;
}

} // namespace stylecast::generation
