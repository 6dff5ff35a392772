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
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "stylecast/chat_engine.hpp"
#include "stylecast/error.hpp"

namespace httplib {
class Server;
}

namespace stylecast::service {

class NotFound : public Error {
public:
    using Error::Error;
};

class BadRequest : public Error {
public:
    using Error::Error;
};

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path persona_dir = "personas";
    std::filesystem::path data_dir = "data";
    std::filesystem::path runs_dir = "runs";
    std::string mode = "live";
    std::filesystem::path cassette;
    std::filesystem::path endpoints = "config/endpoints.json";
    std::string model = "gpt4";
    std::string cors_origin = "http://localhost:5173";
};

ServiceConfig parse_service_config(const nlohmann::json& j);
ServiceConfig load_service_config(const std::filesystem::path& path);

/// Append-only sessions.jsonl: one "session" record at creation, one "turn"
/// record per exchange.
class SessionStore {
public:
    explicit SessionStore(std::filesystem::path path);

    void append_session(const chat::ChatSession& session);
    void append_turn(const std::string& session_id, const chat::Turn& turn);
    /// Every session in the file with its turns ordered by ordinal.
    std::vector<std::unique_ptr<chat::ChatSession>> load() const;

    const std::filesystem::path& path() const { return path_; }

private:
    void append(const nlohmann::json& record);

    std::filesystem::path path_;
    std::mutex mutex_;
};

/// The HTTP-independent half of the service. Personas are `<persona_id>.txt`
/// files in the persona directory.
class ChatService {
public:
    ChatService(const chat::ChatEngine& engine, std::filesystem::path persona_dir, std::filesystem::path runs_dir,
                SessionStore& store);

    nlohmann::json personas() const;
    /// SessionResource: session_id, persona, turn_count, created_at.
    nlohmann::json create_session(const std::string& persona_id);
    /// MessageExchange: session_id, ordinal, user_msg, reply, latency_ms.
    nlohmann::json post_message(const std::string& session_id, const std::string& text);
    nlohmann::json get_session(const std::string& session_id, bool include_trace) const;
    nlohmann::json list_runs() const;
    nlohmann::json run_report(const std::string& run_id) const;

private:
    std::shared_ptr<chat::ChatSession> find(const std::string& session_id) const;

    const chat::ChatEngine& engine_;
    std::filesystem::path persona_dir_;
    std::filesystem::path runs_dir_;
    SessionStore& store_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<chat::ChatSession>> sessions_;
    std::size_t next_id_ = 1;
};

/// JSON over HTTP/1.1 in front of a ChatService.
class HttpServer {
public:
    HttpServer(ChatService& service, std::string cors_origin);
    ~HttpServer();

    /// Binds `host:port`; port 0 picks a free port. Returns the bound port.
    int bind(const std::string& host, int port);
    /// Serves on a background thread after bind().
    void start();
    /// Serves on the calling thread until stop().
    void listen();
    void stop();

private:
    void install_routes();

    ChatService& service_;
    std::string cors_origin_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
};

} // namespace stylecast::service
