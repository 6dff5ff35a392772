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

#include "stylecast/llm_gateway.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "stylecast/corpus.hpp"
#include "stylecast/logging.hpp"

namespace stylecast::llm {

using nlohmann::json;

namespace {

WireFormat wire_from_string(const std::string& name) {
    if (name == "openai") return WireFormat::openai;
    if (name == "anthropic") return WireFormat::anthropic;
    throw std::invalid_argument("unknown wire format: " + name);
}

ModelEndpoint endpoint_from_json(const json& j) {
    ModelEndpoint e;
    e.name = j.at("name").get<std::string>();
    e.base_url = j.at("base_url").get<std::string>();
    e.model = j.value("model", e.name);
    e.auth_env_var = j.value("auth_env_var", "");
    e.wire = wire_from_string(j.value("wire", "openai"));
    e.max_context_tokens = j.value("max_context_tokens", e.max_context_tokens);
    e.temperature = j.value("temperature", e.temperature);
    e.timeout_seconds = j.value("timeout_seconds", e.timeout_seconds);
    e.system_prompt = j.value("system_prompt", "");
    e.validate();
    return e;
}

} // namespace

void ModelEndpoint::validate() const {
    if (name.empty()) throw std::invalid_argument("endpoint name must not be empty");
    if (max_context_tokens == 0) throw std::invalid_argument("endpoint " + name + ": max_context_tokens must be > 0");
    if (!(temperature >= 0.0)) throw std::invalid_argument("endpoint " + name + ": temperature must be >= 0");
}

std::vector<ModelEndpoint> parse_endpoints(std::string_view json_text) {
    const json doc = json::parse(json_text);
    const json& list = doc.is_object() ? doc.at("endpoints") : doc;
    std::vector<ModelEndpoint> out;
    for (const auto& item : list) out.push_back(endpoint_from_json(item));
    return out;
}

std::vector<ModelEndpoint> load_endpoints(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open endpoint config: " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_endpoints(text.str());
}

const ModelEndpoint& find_endpoint(const std::vector<ModelEndpoint>& endpoints, std::string_view name) {
    const auto it = std::find_if(endpoints.begin(), endpoints.end(), [&](const auto& e) { return e.name == name; });
    if (it == endpoints.end()) throw std::invalid_argument("no endpoint named " + std::string(name));
    return *it;
}

std::size_t estimate_tokens(std::string_view text) {
    std::size_t words = 0;
    bool in_word = false;
    for (const char c : text) {
        const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (!space && !in_word) ++words;
        in_word = !space;
    }
    return (words * 4 + 2) / 3;
}

std::size_t request_tokens(const CompletionRequest& req) {
    return estimate_tokens(req.prompt.text) + estimate_tokens(req.endpoint.system_prompt) + req.max_output_tokens;
}

std::optional<std::string> truncate_to_fit(std::string_view text, Keep keep,
                                           const std::function<bool(std::string_view)>& fits) {
    if (fits(text)) return std::string(text);
    const auto words = corpus::words_of(text);
    const auto take = [&](std::size_t n) {
        return keep == Keep::head ? corpus::join_words(words, 0, n)
                                  : corpus::join_words(words, words.size() - n, words.size());
    };
    // Largest n in [1, size) with fits(take(n)).
    std::size_t lo = 0;
    std::size_t hi = words.size();
    while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (fits(take(mid)))
            lo = mid;
        else
            hi = mid;
    }
    if (lo == 0) return std::nullopt;
    return take(lo);
}

std::chrono::milliseconds RetryPolicy::delay_after(int attempt) const {
    const double scaled = static_cast<double>(initial_delay.count()) * std::pow(multiplier, attempt - 1);
    const auto capped = std::min(scaled, static_cast<double>(max_delay.count()));
    return std::chrono::milliseconds(static_cast<long long>(capped));
}

LiveBackend::LiveBackend(std::shared_ptr<Transport> transport, RetryPolicy retry, Sleeper sleeper)
    : transport_(std::move(transport)), retry_(retry), sleeper_(std::move(sleeper)) {
    if (!transport_) throw std::invalid_argument("LiveBackend needs a transport");
    if (retry_.max_attempts < 1) throw std::invalid_argument("max_attempts must be at least 1");
    if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

CompletionResult LiveBackend::complete(const CompletionRequest& req, int occurrence) {
    const auto started = std::chrono::steady_clock::now();
    for (int attempt = 1;; ++attempt) {
        try {
            std::string text = transport_->send(req);
            if (text.find_first_not_of(" \t\r\n") == std::string::npos)
                throw ProviderError("empty reply from " + req.endpoint.name, true);
            CompletionResult result;
            result.text = std::move(text);
            result.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
            result.attempt = attempt;
            result.source = ReplySource::live;
            result.occurrence = occurrence;
            return result;
        } catch (const ProviderError& e) {
            if (!e.transient() || attempt >= retry_.max_attempts) throw;
            const auto delay = retry_.delay_after(attempt);
            logger()->warn("{} call '{}' failed (attempt {}/{}): {}; retrying in {} ms", req.endpoint.name, req.tag,
                           attempt, retry_.max_attempts, e.what(), delay.count());
            sleeper_(delay);
        }
    }
}

std::string to_json_line(const CassetteEntry& entry) {
    return json{{"model", entry.model},
                {"fingerprint", entry.fingerprint},
                {"tag", entry.tag},
                {"occurrence", entry.occurrence},
                {"prompt_text", entry.prompt_text},
                {"reply_text", entry.reply_text}}
        .dump();
}

Cassette::Cassette(std::vector<CassetteEntry> entries) : entries_(std::move(entries)) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        index_.insert_or_assign(std::tuple{e.model, e.fingerprint, e.tag, e.occurrence}, i);
    }
}

Cassette Cassette::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open cassette: " + path.string());
    std::vector<CassetteEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const json j = json::parse(line);
            entries.push_back({j.at("model").get<std::string>(), j.at("fingerprint").get<std::string>(),
                               j.at("tag").get<std::string>(), j.at("occurrence").get<int>(),
                               j.value("prompt_text", ""), j.at("reply_text").get<std::string>()});
        } catch (const json::exception& e) {
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": bad cassette entry: " + e.what());
        }
    }
    return Cassette(std::move(entries));
}

const CassetteEntry* Cassette::find(const std::string& model, const std::string& fingerprint, const std::string& tag,
                                    int occurrence) const {
    const auto it = index_.find(std::tuple{model, fingerprint, tag, occurrence});
    return it == index_.end() ? nullptr : &entries_[it->second];
}

void record_cassette(const std::vector<CassetteEntry>& session, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write cassette: " + path.string());
    for (const auto& entry : session) out << to_json_line(entry) << '\n';
    if (!out) throw IoError("failed writing cassette: " + path.string());
}

ReplayBackend::ReplayBackend(Cassette cassette) : cassette_(std::move(cassette)) {}

CompletionResult ReplayBackend::complete(const CompletionRequest& req, int occurrence) {
    const auto* entry = cassette_.find(req.endpoint.name, req.prompt.fingerprint, req.tag, occurrence);
    if (entry == nullptr)
        throw CassetteMiss("no cassette entry for model=" + req.endpoint.name + " tag=" + req.tag +
                           " fingerprint=" + req.prompt.fingerprint.substr(0, 12) +
                           " occurrence=" + std::to_string(occurrence));
    CompletionResult result;
    result.text = entry->reply_text;
    result.source = ReplySource::replay;
    result.occurrence = occurrence;
    return result;
}

Mode parse_mode(std::string_view name) {
    if (name == "live") return Mode::live;
    if (name == "record") return Mode::record;
    if (name == "replay") return Mode::replay;
    throw std::invalid_argument("unknown mode: " + std::string(name) + " (expected live|record|replay)");
}

std::string_view to_string(Mode mode) {
    switch (mode) {
    case Mode::live: return "live";
    case Mode::record: return "record";
    case Mode::replay: return "replay";
    }
    return "live";
}

Mode mode_from_env(Mode fallback) {
    const char* value = std::getenv("STYLECAST_MODE");
    return value == nullptr || *value == '\0' ? fallback : parse_mode(value);
}

Gateway::Gateway(std::shared_ptr<CompletionBackend> backend) : backend_(std::move(backend)) {
    if (!backend_) throw std::invalid_argument("Gateway needs a backend");
}

CompletionResult Gateway::complete(const CompletionRequest& req) {
    const std::size_t needed = request_tokens(req);
    if (needed > req.endpoint.max_context_tokens) throw BudgetExceeded(needed, req.endpoint.max_context_tokens);

    int occurrence = 0;
    {
        std::lock_guard lock(mutex_);
        occurrence = ++occurrences_[std::tuple{req.endpoint.name, req.prompt.fingerprint, req.tag}];
    }
    CompletionResult result = backend_->complete(req, occurrence);

    CassetteEntry entry{req.endpoint.name, req.prompt.fingerprint, req.tag, occurrence, req.prompt.text, result.text};
    std::lock_guard lock(mutex_);
    if (recorder_) {
        *recorder_ << to_json_line(entry) << '\n';
        recorder_->flush();
        if (!*recorder_) throw IoError("failed appending to cassette");
    }
    session_.push_back(std::move(entry));
    return result;
}

void Gateway::record_to(const std::filesystem::path& path) {
    auto out = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (!*out) throw IoError("cannot write cassette: " + path.string());
    std::lock_guard lock(mutex_);
    recorder_ = std::move(out);
}

std::vector<CassetteEntry> Gateway::session() const {
    std::lock_guard lock(mutex_);
    return session_;
}

std::size_t Gateway::call_count() const {
    std::lock_guard lock(mutex_);
    return session_.size();
}

std::unique_ptr<Gateway> make_gateway(Mode mode, const std::filesystem::path& cassette,
                                      std::shared_ptr<Transport> transport) {
    if (mode == Mode::replay) return std::make_unique<Gateway>(std::make_shared<ReplayBackend>(Cassette::load(cassette)));
    auto gateway = std::make_unique<Gateway>(std::make_shared<LiveBackend>(std::move(transport)));
    if (mode == Mode::record) {
        if (cassette.has_parent_path()) std::filesystem::create_directories(cassette.parent_path());
        gateway->record_to(cassette);
    }
    return gateway;
}

} // namespace stylecast::llm
