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
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "stylecast/error.hpp"
#include "stylecast/prompt_kit.hpp"

namespace stylecast::llm {

class BudgetExceeded : public Error {
public:
    BudgetExceeded(std::size_t needed, std::size_t limit)
        : Error("prompt needs " + std::to_string(needed) + " tokens but the endpoint allows " + std::to_string(limit)),
          needed_(needed), limit_(limit) {}
    std::size_t needed() const { return needed_; }
    std::size_t limit() const { return limit_; }

private:
    std::size_t needed_;
    std::size_t limit_;
};

class ProviderError : public Error {
public:
    ProviderError(const std::string& what, bool transient, int status = 0)
        : Error(what), transient_(transient), status_(status) {}
    bool transient() const { return transient_; }
    int status() const { return status_; }

private:
    bool transient_;
    int status_;
};

class CassetteMiss : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

enum class WireFormat { openai, anthropic };

struct ModelEndpoint {
    std::string name;     // label used in runs and cassettes, e.g. "llama3"
    std::string base_url; // e.g. https://api.openai.com/v1
    std::string model;    // provider model id; defaults to name
    std::string auth_env_var;
    WireFormat wire = WireFormat::openai;
    std::size_t max_context_tokens = 8000;
    double temperature = 0.7;
    int timeout_seconds = 120;
    std::string system_prompt; // sent as a system message when non-empty

    /// Throws std::invalid_argument when an invariant does not hold.
    void validate() const;
};

/// Reads a JSON array (or {"endpoints": [...]}) of endpoint objects.
std::vector<ModelEndpoint> load_endpoints(const std::filesystem::path& path);
std::vector<ModelEndpoint> parse_endpoints(std::string_view json_text);
const ModelEndpoint& find_endpoint(const std::vector<ModelEndpoint>& endpoints, std::string_view name);

struct CompletionRequest {
    ModelEndpoint endpoint;
    prompt::RenderedPrompt prompt;
    std::size_t max_output_tokens = 1024;
    std::string tag;                   // pipeline stage, e.g. "tot.plan.vote"
    std::optional<double> temperature; // overrides endpoint.temperature
};

enum class ReplySource { live, replay };

struct CompletionResult {
    std::string text;
    std::chrono::milliseconds latency{0};
    int attempt = 1;
    ReplySource source = ReplySource::live;
    int occurrence = 1;
};

/// ceil(words * 4 / 3) over whitespace-delimited words.
std::size_t estimate_tokens(std::string_view text);

/// Tokens a request needs: prompt (plus system prompt) and the output reserve.
std::size_t request_tokens(const CompletionRequest& req);

enum class Keep { head, tail };

/// Longest head (or tail) of `text`, in whole words, for which `fits` holds.
/// Returns nullopt when not even one word fits. `fits` must be monotone in
/// the word count.
std::optional<std::string> truncate_to_fit(std::string_view text, Keep keep,
                                           const std::function<bool(std::string_view)>& fits);

/// Sends one request to a provider; throws ProviderError.
class Transport {
public:
    virtual ~Transport() = default;
    virtual std::string send(const CompletionRequest& req) = 0;
};

/// OpenAI-compatible chat completions or the Anthropic messages API over
/// HTTP(S). The key is read from the endpoint's env var on every call.
class HttpTransport : public Transport {
public:
    std::string send(const CompletionRequest& req) override;
};

struct RetryPolicy {
    int max_attempts = 4;
    std::chrono::milliseconds initial_delay{500};
    double multiplier = 2.0;
    std::chrono::milliseconds max_delay{8000};

    /// Delay before attempt `attempt + 1`.
    std::chrono::milliseconds delay_after(int attempt) const;
};

/// Produces replies for requests. The gateway numbers repeated identical
/// requests with `occurrence` (1-based).
class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;
    virtual CompletionResult complete(const CompletionRequest& req, int occurrence) = 0;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

class LiveBackend : public CompletionBackend {
public:
    explicit LiveBackend(std::shared_ptr<Transport> transport, RetryPolicy retry = {}, Sleeper sleeper = {});
    CompletionResult complete(const CompletionRequest& req, int occurrence) override;

private:
    std::shared_ptr<Transport> transport_;
    RetryPolicy retry_;
    Sleeper sleeper_;
};

struct CassetteEntry {
    std::string model;
    std::string fingerprint;
    std::string tag;
    int occurrence = 1;
    std::string prompt_text;
    std::string reply_text;

    friend bool operator==(const CassetteEntry&, const CassetteEntry&) = default;
};

std::string to_json_line(const CassetteEntry& entry);

/// Recorded calls keyed by (model, fingerprint, tag, occurrence).
class Cassette {
public:
    Cassette() = default;
    explicit Cassette(std::vector<CassetteEntry> entries);
    static Cassette load(const std::filesystem::path& path);

    const CassetteEntry* find(const std::string& model, const std::string& fingerprint, const std::string& tag,
                              int occurrence) const;
    std::size_t size() const { return entries_.size(); }
    const std::vector<CassetteEntry>& entries() const { return entries_; }

private:
    std::vector<CassetteEntry> entries_;
    std::map<std::tuple<std::string, std::string, std::string, int>, std::size_t> index_;
};

/// Writes a session as cassette jsonl, one line per call.
void record_cassette(const std::vector<CassetteEntry>& session, const std::filesystem::path& path);

class ReplayBackend : public CompletionBackend {
public:
    explicit ReplayBackend(Cassette cassette);
    CompletionResult complete(const CompletionRequest& req, int occurrence) override;

private:
    Cassette cassette_;
};

enum class Mode { live, record, replay };

Mode parse_mode(std::string_view name);
std::string_view to_string(Mode mode);
/// STYLECAST_MODE, or `fallback` when unset.
Mode mode_from_env(Mode fallback = Mode::live);

/// Entry point for every model call: budget check, occurrence numbering,
/// session log, optional cassette recording. Safe for concurrent use.
class Gateway {
public:
    explicit Gateway(std::shared_ptr<CompletionBackend> backend);

    CompletionResult complete(const CompletionRequest& req);

    /// Appends each completed call to `path` as it happens (record mode).
    void record_to(const std::filesystem::path& path);

    std::vector<CassetteEntry> session() const;
    std::size_t call_count() const;

private:
    std::shared_ptr<CompletionBackend> backend_;
    mutable std::mutex mutex_;
    std::map<std::tuple<std::string, std::string, std::string>, int> occurrences_;
    std::vector<CassetteEntry> session_;
    std::unique_ptr<std::ofstream> recorder_;
};

/// Builds a gateway for `mode`. Replay loads `cassette`; record truncates it
/// and appends every call.
std::unique_ptr<Gateway> make_gateway(Mode mode, const std::filesystem::path& cassette,
                                      std::shared_ptr<Transport> transport = std::make_shared<HttpTransport>());

} // namespace stylecast::llm
