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

#include <httplib.h>

#include <cstdlib>

#include <nlohmann/json.hpp>

#include "stylecast/llm_gateway.hpp"

namespace stylecast::llm {

using nlohmann::json;

namespace {

struct Url {
    std::string origin; // scheme://host[:port]
    std::string path;   // without trailing slash
};

Url split_url(const std::string& base_url) {
    const auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) throw ProviderError("base_url lacks a scheme: " + base_url, false);
    const auto path_start = base_url.find('/', scheme_end + 3);
    Url url;
    url.origin = base_url.substr(0, path_start);
    url.path = path_start == std::string::npos ? "" : base_url.substr(path_start);
    while (!url.path.empty() && url.path.back() == '/') url.path.pop_back();
    return url;
}

bool transient_status(int status) { return status == 408 || status == 429 || status >= 500; }

std::string api_key(const ModelEndpoint& endpoint) {
    if (endpoint.auth_env_var.empty()) return {};
    const char* value = std::getenv(endpoint.auth_env_var.c_str());
    if (value == nullptr || *value == '\0')
        throw ProviderError("environment variable " + endpoint.auth_env_var + " is not set", false);
    return value;
}

double temperature_of(const CompletionRequest& req) { return req.temperature.value_or(req.endpoint.temperature); }

json openai_body(const CompletionRequest& req) {
    json messages = json::array();
    if (!req.endpoint.system_prompt.empty())
        messages.push_back({{"role", "system"}, {"content", req.endpoint.system_prompt}});
    messages.push_back({{"role", "user"}, {"content", req.prompt.text}});
    return {{"model", req.endpoint.model},
            {"messages", messages},
            {"temperature", temperature_of(req)},
            {"max_tokens", req.max_output_tokens}};
}

json anthropic_body(const CompletionRequest& req) {
    json body = {{"model", req.endpoint.model},
                 {"max_tokens", req.max_output_tokens},
                 {"temperature", temperature_of(req)},
                 {"messages", json::array({{{"role", "user"}, {"content", req.prompt.text}}})}};
    if (!req.endpoint.system_prompt.empty()) body["system"] = req.endpoint.system_prompt;
    return body;
}

std::string openai_text(const json& reply) {
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
}

std::string anthropic_text(const json& reply) {
    std::string text;
    for (const auto& block : reply.at("content"))
        if (block.value("type", "") == "text") text += block.at("text").get<std::string>();
    return text;
}

} // namespace

std::string HttpTransport::send(const CompletionRequest& req) {
    const auto& endpoint = req.endpoint;
    const Url url = split_url(endpoint.base_url);
    const std::string key = api_key(endpoint);

    httplib::Client client(url.origin);
    client.set_connection_timeout(std::chrono::seconds(30));
    client.set_read_timeout(std::chrono::seconds(endpoint.timeout_seconds));
    client.set_write_timeout(std::chrono::seconds(endpoint.timeout_seconds));

    httplib::Headers headers;
    std::string path;
    json body;
    if (endpoint.wire == WireFormat::anthropic) {
        path = url.path + "/v1/messages";
        body = anthropic_body(req);
        headers.emplace("anthropic-version", "2023-06-01");
        if (!key.empty()) headers.emplace("x-api-key", key);
    } else {
        path = url.path + "/chat/completions";
        body = openai_body(req);
        if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);
    }

    auto response = client.Post(path, headers, body.dump(), "application/json");
    if (!response)
        throw ProviderError(endpoint.name + ": request failed: " + httplib::to_string(response.error()), true);
    if (response->status != 200) {
        throw ProviderError(endpoint.name + ": HTTP " + std::to_string(response->status) + ": " +
                                response->body.substr(0, 300),
                            transient_status(response->status), response->status);
    }
    try {
        const json reply = json::parse(response->body);
        return endpoint.wire == WireFormat::anthropic ? anthropic_text(reply) : openai_text(reply);
    } catch (const json::exception& e) {
        throw ProviderError(endpoint.name + ": unexpected response body: " + e.what(), false, response->status);
    }
}

} // namespace stylecast::llm
