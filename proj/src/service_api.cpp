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

#include "stylecast/service_api.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <httplib.h>

#include "stylecast/logging.hpp"
#include "stylecast/run_store.hpp"

namespace stylecast::service {

using nlohmann::json;

ServiceConfig parse_service_config(const json& j) {
    ServiceConfig c;
    c.host = j.value("host", c.host);
    c.port = j.value("port", c.port);
    c.persona_dir = j.value("persona_dir", c.persona_dir.string());
    c.data_dir = j.value("data_dir", c.data_dir.string());
    c.runs_dir = j.value("runs_dir", c.runs_dir.string());
    c.mode = j.value("mode", c.mode);
    c.cassette = j.value("cassette", c.cassette.string());
    c.endpoints = j.value("endpoints", c.endpoints.string());
    c.model = j.value("model", c.model);
    c.cors_origin = j.value("cors_origin", c.cors_origin);
    if (c.port < 0 || c.port > 65535) throw std::invalid_argument("port out of range");
    (void)llm::parse_mode(c.mode);
    return c;
}

ServiceConfig load_service_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw llm::IoError("cannot open service config: " + path.string());
    return parse_service_config(json::parse(in));
}

// ---------------------------------------------------------------------------

namespace {

json turn_json(const chat::Turn& t, bool include_trace) {
    json j = {{"ordinal", t.ordinal}, {"user_msg", t.user_msg}, {"reply", t.reply}, {"latency_ms", t.latency.count()}};
    if (include_trace) j["trace"] = generation::to_json(t.trace);
    return j;
}

} // namespace

SessionStore::SessionStore(std::filesystem::path path) : path_(std::move(path)) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
}

void SessionStore::append(const json& record) {
    std::lock_guard lock(mutex_);
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    if (!out) throw llm::IoError("cannot append to " + path_.string());
    out << record.dump() << '\n';
    out.flush();
    if (!out) throw llm::IoError("write failed: " + path_.string());
}

void SessionStore::append_session(const chat::ChatSession& session) {
    const auto& p = session.profile();
    append({{"type", "session"},
            {"session_id", session.id()},
            {"persona", session.persona()},
            {"created_at", session.created_at()},
            {"profile",
             {{"given_text", p.given_text},
              {"best_description", p.best_description},
              {"description_set", generation::to_json(p.description_set)}}}});
}

void SessionStore::append_turn(const std::string& session_id, const chat::Turn& turn) {
    json record = turn_json(turn, true);
    record["type"] = "turn";
    record["session_id"] = session_id;
    append(record);
}

std::vector<std::unique_ptr<chat::ChatSession>> SessionStore::load() const {
    std::vector<std::unique_ptr<chat::ChatSession>> out;
    std::ifstream in(path_);
    if (!in) return out;

    struct Pending {
        std::string persona;
        std::string created_at;
        chat::PersonaProfile profile;
        std::vector<chat::Turn> turns;
    };
    std::vector<std::string> order;
    std::map<std::string, Pending> pending;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            // A torn final line from a crash mid-append is dropped.
            logger()->warn("{}:{}: skipping unreadable record: {}", path_.string(), line_no, e.what());
            continue;
        }
        const auto id = j.at("session_id").get<std::string>();
        if (j.at("type") == "session") {
            Pending p;
            p.persona = j.at("persona").get<std::string>();
            p.created_at = j.at("created_at").get<std::string>();
            const auto& prof = j.at("profile");
            p.profile.given_text = prof.at("given_text").get<std::string>();
            p.profile.best_description = prof.at("best_description").get<std::string>();
            p.profile.description_set = generation::candidate_set_from_json(prof.at("description_set"));
            if (pending.emplace(id, std::move(p)).second) order.push_back(id);
        } else {
            const auto it = pending.find(id);
            if (it == pending.end()) {
                logger()->warn("{}:{}: turn for unknown session {}", path_.string(), line_no, id);
                continue;
            }
            chat::Turn t;
            t.ordinal = j.at("ordinal").get<int>();
            t.user_msg = j.at("user_msg").get<std::string>();
            t.reply = j.at("reply").get<std::string>();
            t.latency = std::chrono::milliseconds(j.value("latency_ms", 0));
            t.trace = generation::candidate_set_from_json(j.at("trace"));
            it->second.turns.push_back(std::move(t));
        }
    }
    for (const auto& id : order) {
        auto& p = pending.at(id);
        std::sort(p.turns.begin(), p.turns.end(), [](const auto& a, const auto& b) { return a.ordinal < b.ordinal; });
        out.push_back(std::make_unique<chat::ChatSession>(id, p.persona, std::move(p.profile), p.created_at,
                                                          std::move(p.turns)));
    }
    return out;
}

// ---------------------------------------------------------------------------

ChatService::ChatService(const chat::ChatEngine& engine, std::filesystem::path persona_dir,
                         std::filesystem::path runs_dir, SessionStore& store)
    : engine_(engine), persona_dir_(std::move(persona_dir)), runs_dir_(std::move(runs_dir)), store_(store) {
    for (auto& s : store_.load()) {
        const auto& id = s->id();
        if (id.size() > 1 && id[0] == 's' && std::all_of(id.begin() + 1, id.end(), ::isdigit))
            next_id_ = std::max(next_id_, static_cast<std::size_t>(std::stoull(id.substr(1))) + 1);
        sessions_.emplace(id, std::shared_ptr<chat::ChatSession>(std::move(s)));
    }
    if (!sessions_.empty()) logger()->info("restored {} sessions from {}", sessions_.size(), store_.path().string());
}

json ChatService::personas() const {
    std::vector<std::string> ids;
    if (std::filesystem::is_directory(persona_dir_))
        for (const auto& entry : std::filesystem::directory_iterator(persona_dir_))
            if (entry.is_regular_file() && entry.path().extension() == ".txt") ids.push_back(entry.path().stem().string());
    std::sort(ids.begin(), ids.end());
    return ids;
}

json ChatService::create_session(const std::string& persona_id) {
    const auto valid_id = !persona_id.empty() && persona_id.find_first_of("/\\") == std::string::npos &&
                          persona_id != "." && persona_id != "..";
    const auto file = persona_dir_ / (persona_id + ".txt");
    if (!valid_id || !std::filesystem::is_regular_file(file)) throw NotFound("unknown persona: " + persona_id);
    std::ifstream in(file, std::ios::binary);
    std::ostringstream text;
    text << in.rdbuf();

    auto profile = engine_.init_persona(text.str());

    std::shared_ptr<chat::ChatSession> session;
    {
        std::lock_guard lock(mutex_);
        const auto id = "s" + std::to_string(next_id_++);
        session = std::make_shared<chat::ChatSession>(id, persona_id, std::move(profile), chat::utc_timestamp());
        store_.append_session(*session);
        sessions_.emplace(id, session);
    }
    return {{"session_id", session->id()},
            {"persona", session->persona()},
            {"turn_count", 0},
            {"created_at", session->created_at()}};
}

std::shared_ptr<chat::ChatSession> ChatService::find(const std::string& session_id) const {
    std::lock_guard lock(mutex_);
    const auto it = sessions_.find(session_id);
    if (it == sessions_.end()) throw NotFound("unknown session: " + session_id);
    return it->second;
}

json ChatService::post_message(const std::string& session_id, const std::string& text) {
    const auto session = find(session_id);
    const auto turn = engine_.respond(*session, text);
    store_.append_turn(session_id, turn);
    return {{"session_id", session_id},
            {"ordinal", turn.ordinal},
            {"user_msg", turn.user_msg},
            {"reply", turn.reply},
            {"latency_ms", turn.latency.count()}};
}

json ChatService::get_session(const std::string& session_id, bool include_trace) const {
    const auto session = find(session_id);
    const auto turns = session->turns();
    json j = {{"session_id", session->id()},
              {"persona", session->persona()},
              {"turn_count", turns.size()},
              {"created_at", session->created_at()}};
    j["turns"] = json::array();
    for (const auto& t : turns) j["turns"].push_back(turn_json(t, include_trace));
    if (include_trace) {
        j["persona_trace"] = {{"best_description", session->profile().best_description},
                              {"description_set", generation::to_json(session->profile().description_set)}};
    }
    return j;
}

json ChatService::list_runs() const { return generation::list_runs(runs_dir_); }

json ChatService::run_report(const std::string& run_id) const {
    const auto dir = runs_dir_ / run_id;
    if (run_id.empty() || run_id.find_first_of("/\\") != std::string::npos || run_id == "." || run_id == ".." ||
        !std::filesystem::is_regular_file(dir / "manifest.json"))
        throw NotFound("unknown run: " + run_id);
    std::ifstream in(dir / "report.json");
    if (!in) throw NotFound("run " + run_id + " has no report");
    return json::parse(in);
}

// ---------------------------------------------------------------------------

namespace {

void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json; charset=utf-8");
}

bool parse_flag(const std::string& value) {
    if (value.empty() || value == "false" || value == "0" || value == "no") return false;
    if (value == "true" || value == "1" || value == "yes") return true;
    throw BadRequest("include_trace must be true or false, got '" + value + "'");
}

std::string string_field(const httplib::Request& req, const char* name) {
    json body;
    try {
        body = json::parse(req.body);
    } catch (const json::exception&) {
        throw BadRequest("request body is not JSON");
    }
    if (!body.is_object() || !body.contains(name) || !body[name].is_string())
        throw BadRequest(std::string("body needs a string field '") + name + "'");
    return body[name].get<std::string>();
}

template <typename F>
httplib::Server::Handler guarded(F handler) {
    return [handler](const httplib::Request& req, httplib::Response& res) {
        try {
            handler(req, res);
        } catch (const NotFound& e) {
            reply(res, 404, {{"error", e.what()}});
        } catch (const BadRequest& e) {
            reply(res, 400, {{"error", e.what()}});
        } catch (const chat::SessionBusy& e) {
            reply(res, 409, {{"error", e.what()}});
        } catch (const llm::ProviderError& e) {
            logger()->error("provider failure: {}", e.what());
            reply(res, 503, {{"error", e.what()}});
        } catch (const llm::CassetteMiss& e) {
            logger()->error("replay miss: {}", e.what());
            reply(res, 503, {{"error", e.what()}});
        } catch (const prompt::EmptyInput& e) {
            reply(res, 400, {{"error", e.what()}});
        } catch (const prompt::EmptyGivenText& e) {
            reply(res, 400, {{"error", e.what()}});
        } catch (const std::exception& e) {
            logger()->error("{} {}: {}", req.method, req.path, e.what());
            reply(res, 500, {{"error", e.what()}});
        }
    };
}

} // namespace

HttpServer::HttpServer(ChatService& service, std::string cors_origin)
    : service_(service), cors_origin_(std::move(cors_origin)), server_(std::make_unique<httplib::Server>()) {
    install_routes();
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::install_routes() {
    auto& s = *server_;
    if (!cors_origin_.empty()) {
        s.set_default_headers({{"Access-Control-Allow-Origin", cors_origin_},
                               {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                               {"Access-Control-Allow-Headers", "Content-Type"}});
    }
    s.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    s.Get("/health", guarded([](const httplib::Request&, httplib::Response& res) { reply(res, 200, {{"status", "ok"}}); }));
    s.Get("/personas", guarded([this](const httplib::Request&, httplib::Response& res) {
              reply(res, 200, service_.personas());
          }));
    s.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
               reply(res, 201, service_.create_session(string_field(req, "persona_id")));
           }));
    s.Post(R"(/sessions/([^/]+)/messages)", guarded([this](const httplib::Request& req, httplib::Response& res) {
               reply(res, 200, service_.post_message(req.matches[1], string_field(req, "text")));
           }));
    s.Get(R"(/sessions/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
              const bool trace = parse_flag(req.get_param_value("include_trace"));
              reply(res, 200, service_.get_session(req.matches[1], trace));
          }));
    s.Get("/runs", guarded([this](const httplib::Request&, httplib::Response& res) {
              reply(res, 200, service_.list_runs());
          }));
    s.Get(R"(/runs/([^/]+)/report)", guarded([this](const httplib::Request& req, httplib::Response& res) {
              reply(res, 200, service_.run_report(req.matches[1]));
          }));
    s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty()) reply(res, res.status, {{"error", httplib::status_message(res.status)}});
    });
}

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = server_->bind_to_any_port(host);
        if (bound < 0) throw llm::IoError("cannot bind " + host);
        return bound;
    }
    if (!server_->bind_to_port(host, port)) throw llm::IoError("cannot bind " + host + ":" + std::to_string(port));
    return port;
}

void HttpServer::start() {
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
}

void HttpServer::listen() { server_->listen_after_bind(); }

void HttpServer::stop() {
    server_->stop();
    if (thread_.joinable()) thread_.join();
}

} // namespace stylecast::service
