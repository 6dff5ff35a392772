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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stylecast/generation.hpp"

namespace stylecast::generation {

// Run directory layout:
//   <runs>/<run-id>/manifest.json
//   <runs>/<run-id>/conversations/<n>.jsonl   one {"speaker","text"} per paragraph
//   <runs>/<run-id>/traces/<segment>.json     tree-of-thoughts runs only
//   <runs>/<run-id>/cassette.jsonl            record mode

struct RunArtifacts {
    std::string run_id;
    std::string task;
    nlohmann::json config = nlohmann::json::object();
    std::vector<llm::ModelEndpoint> endpoints;
    std::map<std::string, std::string> template_versions;
    std::vector<Conversation> conversations;
    std::vector<TotTrace> traces;
    std::size_t gateway_calls = 0;
};

struct StoredConversation {
    std::string id; // "1", "2", ... within the run
    Conversation conversation;
};

struct LoadedRun {
    std::string run_id;
    std::filesystem::path dir;
    nlohmann::json manifest;
    std::vector<StoredConversation> conversations;
};

/// Report grouping: "<role>/<model>" for task1, the prompt family otherwise.
std::string group_key(const Provenance& p);

nlohmann::json to_json(const Provenance& p);
Provenance provenance_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CandidateSet& set);
CandidateSet candidate_set_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TotTrace& trace);
nlohmann::json to_json(const llm::ModelEndpoint& endpoint);

std::string conversation_jsonl(const Conversation& c);

/// Writes all artifacts under runs_dir/run_id and returns that directory.
/// Output is a pure function of `run`, so replays are byte-identical.
std::filesystem::path write_run(const std::filesystem::path& runs_dir, const RunArtifacts& run);

LoadedRun load_run(const std::filesystem::path& run_dir);

/// Manifests of every run directory under runs_dir, ordered by run id.
std::vector<nlohmann::json> list_runs(const std::filesystem::path& runs_dir);

} // namespace stylecast::generation
