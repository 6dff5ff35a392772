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

#include "stylecast/run_store.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace stylecast::generation {

using nlohmann::json;

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw llm::IoError("cannot write " + path.string());
    out << content;
    if (!out) throw llm::IoError("failed writing " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw llm::IoError("cannot read " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

std::string_view wire_name(llm::WireFormat wire) { return wire == llm::WireFormat::anthropic ? "anthropic" : "openai"; }

} // namespace

std::string group_key(const Provenance& p) {
    if (p.task == "task1") return p.target_role + "/" + p.model;
    return p.family;
}

json to_json(const Provenance& p) {
    return {{"task", p.task},       {"model", p.model},   {"family", p.family},
            {"ordinal", p.ordinal}, {"target_role", p.target_role}, {"dataset", p.dataset}};
}

Provenance provenance_from_json(const json& j) {
    return {j.at("task").get<std::string>(),        j.at("model").get<std::string>(),
            j.at("family").get<std::string>(),      j.at("ordinal").get<int>(),
            j.value("target_role", std::string()), j.value("dataset", std::string())};
}

json to_json(const CandidateSet& set) {
    json ballots = json::array();
    for (const auto& b : set.ballots)
        ballots.push_back({{"chosen_index", b.valid() ? json(b.chosen_index) : json(nullptr)}, {"raw_response", b.raw_response}});
    return {{"stage", to_string(set.stage)},
            {"candidates", set.candidates},
            {"ballots", ballots},
            {"winner_index", set.winner_index}};
}

CandidateSet candidate_set_from_json(const json& j) {
    CandidateSet set;
    set.stage = stage_from_string(j.at("stage").get<std::string>());
    set.candidates = j.at("candidates").get<std::vector<std::string>>();
    for (const auto& b : j.at("ballots")) {
        prompt::VoteBallot ballot;
        ballot.chosen_index = b.at("chosen_index").is_null() ? 0 : b.at("chosen_index").get<int>();
        ballot.raw_response = b.value("raw_response", "");
        set.ballots.push_back(std::move(ballot));
    }
    set.winner_index = j.at("winner_index").get<int>();
    return set;
}

json to_json(const TotTrace& trace) {
    return {{"segment", trace.segment},
            {"plan_set", to_json(trace.plan_set)},
            {"conversation_set", to_json(trace.conversation_set)},
            {"best_conversation", trace.best_conversation.text()},
            {"provenance", to_json(trace.best_conversation.provenance)}};
}

json to_json(const llm::ModelEndpoint& e) {
    return {{"name", e.name},
            {"base_url", e.base_url},
            {"model", e.model},
            {"auth_env_var", e.auth_env_var},
            {"wire", wire_name(e.wire)},
            {"max_context_tokens", e.max_context_tokens},
            {"temperature", e.temperature}};
}

std::string conversation_jsonl(const Conversation& c) {
    std::string out;
    for (const auto& p : c.paragraphs) {
        out += json{{"speaker", std::string(1, p.speaker)}, {"text", p.text}}.dump();
        out += '\n';
    }
    return out;
}

std::filesystem::path write_run(const std::filesystem::path& runs_dir, const RunArtifacts& run) {
    if (run.run_id.empty() || run.run_id.find('/') != std::string::npos || run.run_id == "." || run.run_id == "..")
        throw std::invalid_argument("invalid run id: " + run.run_id);
    const auto dir = runs_dir / run.run_id;
    std::filesystem::create_directories(dir / "conversations");
    // Stale files from an earlier run with the same id would break replay comparisons.
    for (const auto& sub : {"conversations", "traces"})
        if (std::filesystem::exists(dir / sub))
            for (const auto& entry : std::filesystem::directory_iterator(dir / sub)) std::filesystem::remove(entry.path());

    json conversations = json::array();
    for (std::size_t i = 0; i < run.conversations.size(); ++i) {
        const std::string id = std::to_string(i + 1);
        const std::string file = "conversations/" + id + ".jsonl";
        write_file(dir / file, conversation_jsonl(run.conversations[i]));
        json entry = to_json(run.conversations[i].provenance);
        entry["id"] = id;
        entry["file"] = file;
        entry["group"] = group_key(run.conversations[i].provenance);
        conversations.push_back(std::move(entry));
    }

    json traces = json::array();
    if (!run.traces.empty()) {
        std::filesystem::create_directories(dir / "traces");
        for (const auto& trace : run.traces) {
            const std::string file = "traces/" + std::to_string(trace.segment) + ".json";
            write_file(dir / file, to_json(trace).dump(2) + "\n");
            traces.push_back(file);
        }
    }

    json endpoints = json::array();
    for (const auto& e : run.endpoints) endpoints.push_back(to_json(e));

    const json manifest = {{"run_id", run.run_id},
                           {"task", run.task},
                           {"config", run.config},
                           {"endpoints", endpoints},
                           {"templates", run.template_versions},
                           {"conversations", conversations},
                           {"traces", traces},
                           {"gateway_calls", run.gateway_calls}};
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    return dir;
}

LoadedRun load_run(const std::filesystem::path& run_dir) {
    LoadedRun run;
    run.dir = run_dir;
    run.manifest = json::parse(read_file(run_dir / "manifest.json"));
    run.run_id = run.manifest.at("run_id").get<std::string>();
    for (const auto& entry : run.manifest.at("conversations")) {
        Conversation c;
        c.provenance = provenance_from_json(entry);
        std::istringstream lines(read_file(run_dir / entry.at("file").get<std::string>()));
        std::string line;
        while (std::getline(lines, line)) {
            if (line.empty()) continue;
            const json p = json::parse(line);
            c.paragraphs.push_back({p.at("speaker").get<std::string>().at(0), p.at("text").get<std::string>()});
        }
        run.conversations.push_back({entry.at("id").get<std::string>(), std::move(c)});
    }
    return run;
}

std::vector<json> list_runs(const std::filesystem::path& runs_dir) {
    std::vector<json> out;
    if (!std::filesystem::is_directory(runs_dir)) return out;
    for (const auto& entry : std::filesystem::directory_iterator(runs_dir)) {
        const auto manifest = entry.path() / "manifest.json";
        if (entry.is_directory() && std::filesystem::exists(manifest)) out.push_back(json::parse(read_file(manifest)));
    }
    std::sort(out.begin(), out.end(),
              [](const json& a, const json& b) { return a.at("run_id").get<std::string>() < b.at("run_id").get<std::string>(); });
    return out;
}

} // namespace stylecast::generation
