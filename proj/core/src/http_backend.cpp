// Copyright 2026 The relassess Authors
// SPDX-License-Identifier: Apache-2.0

#include <httplib.h>

#include <chrono>
#include <cstdlib>

#include "relassess/digest.hpp"
#include "relassess/gateway.hpp"
#include "relassess/pipeline.hpp"

namespace relassess {

namespace {

struct Endpoint {
    std::string base;  // scheme://host[:port]
    std::string path;
};

Endpoint split_endpoint(const std::string& uri) {
    const auto scheme_end = uri.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint '" + uri + "' is not an absolute URI");
    const auto path_start = uri.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {uri, "/"};
    return {uri.substr(0, path_start), uri.substr(path_start)};
}

}  // namespace

json HttpBackend::build_payload(const ChatRequest& request, const ModelConfig& config) {
    json content = json::array();
    for (const auto& part : request.user_content) {
        if (const auto* text = std::get_if<TextPart>(&part)) {
            content.push_back({{"type", "text"}, {"text", text->text}});
        } else {
            const auto& image = std::get<ImagePart>(part);
            content.push_back({{"type", "image_url"},
                               {"image_url", {{"url", "data:" + image.media_type + ";base64," + base64_encode(image.bytes)}}}});
        }
    }
    json messages = json::array();
    if (!request.system_prompt.empty()) messages.push_back({{"role", "system"}, {"content", request.system_prompt}});
    messages.push_back({{"role", "user"}, {"content", content}});
    return json{{"model", config.model_id},
                {"messages", messages},
                {"temperature", request.temperature.to_double()},
                {"stream", false}};
}

ChatResponse HttpBackend::send(const ChatRequest& request, const ModelConfig& config) {
    httplib::Headers headers;
    if (!config.api_key_env.empty()) {
        const char* key = std::getenv(config.api_key_env.c_str());
        if (key == nullptr || *key == '\0') {
            throw AuthError("credential env var '" + config.api_key_env + "' is not set for model '" + config.model_id + "'");
        }
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    const Endpoint endpoint = split_endpoint(config.endpoint);
    httplib::Client client(endpoint.base);
    const auto timeout = std::chrono::milliseconds(config.request_timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    const auto started = std::chrono::steady_clock::now();
    const auto result = client.Post(endpoint.path, headers, build_payload(request, config).dump(), "application/json");
    if (!result) {
        throw TransientBackendError("request to '" + config.endpoint + "' failed: " + httplib::to_string(result.error()));
    }
    const int status = result->status;
    if (status == 401 || status == 403) throw AuthError("backend rejected credentials (HTTP " + std::to_string(status) + ")");
    if (status == 429 || status >= 500) throw TransientBackendError("backend returned HTTP " + std::to_string(status));
    if (status != 200) {
        throw BackendUnavailable("backend returned HTTP " + std::to_string(status) + ": " + result->body.substr(0, 200));
    }

    json body = json::parse(result->body, nullptr, false);
    if (body.is_discarded()) throw TransientBackendError("backend returned a non-JSON body");
    ChatResponse response;
    try {
        const auto& message = body.at("choices").at(0).at("message");
        response.raw_text = message.at("content").is_string() ? message.at("content").get<std::string>() : std::string();
    } catch (const json::exception&) {
        throw TransientBackendError("backend response has no choices[0].message.content");
    }
    if (auto usage = body.find("usage"); usage != body.end() && usage->is_object()) {
        response.usage.input_tokens = usage->value("prompt_tokens", 0ULL);
        response.usage.output_tokens = usage->value("completion_tokens", 0ULL);
    } else {
        response.usage.input_tokens = StubBackend::estimate_tokens(request.system_prompt.size() + request.user_text().size());
        response.usage.output_tokens = StubBackend::estimate_tokens(response.raw_text.size());
    }
    response.latency_ms = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count());
    response.backend_id = id();
    return response;
}

std::vector<std::uint8_t> fetch_url_bytes(const std::string& url, std::uint32_t timeout_ms) {
    Endpoint endpoint;
    try {
        endpoint = split_endpoint(url);
    } catch (const ConfigError& e) {
        throw MissingImage(e.what());
    }
    httplib::Client client(endpoint.base);
    const auto timeout = std::chrono::milliseconds(timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_follow_location(true);
    const auto result = client.Get(endpoint.path);
    if (!result) throw MissingImage("cannot fetch '" + url + "': " + httplib::to_string(result.error()));
    if (result->status != 200) throw MissingImage("fetching '" + url + "' returned HTTP " + std::to_string(result->status));
    return {result->body.begin(), result->body.end()};
}

}  // namespace relassess
