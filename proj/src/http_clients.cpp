// Copyright 2026 the zpfp authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// The only translation unit that touches httplib. Keep it that way, and keep
// Eigen-including project headers above httplib.h: the system networking
// headers httplib drags in define macros that break Eigen's templates when
// included first.

#include "zpfp/clients.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include "zpfp/errors.hpp"

#include <json.hpp>

#include <httplib.h>  // CPPHTTPLIB_OPENSSL_SUPPORT comes from the build

namespace zpfp {

namespace {

using nlohmann::json;

/// Splits "scheme://host:port/some/prefix" into the client origin and the
/// path prefix (possibly empty, no trailing slash).
std::pair<std::string, std::string> split_url(const std::string& base_url) {
    std::size_t scheme_end = base_url.find("://");
    std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    std::size_t slash = base_url.find('/', host_start);
    if (slash == std::string::npos) return {base_url, ""};
    std::string origin = base_url.substr(0, slash);
    std::string prefix = base_url.substr(slash);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {origin, prefix};
}

httplib::Headers auth_headers(const std::string& auth_token_env) {
    httplib::Headers headers;
    if (!auth_token_env.empty()) {
        const char* token = std::getenv(auth_token_env.c_str());
        if (token != nullptr && token[0] != '\0') {
            headers.emplace("Authorization", std::string("Bearer ") + token);
        }
    }
    return headers;
}

/// POST with retries (transport failures and 5xx only) and JSON decoding.
json post_json(const std::string& base_url, const std::string& path, const json& body,
               double timeout_seconds, const std::string& auth_token_env, int max_retries,
               int backoff_ms) {
    auto [origin, prefix] = split_url(base_url);
    httplib::Client client(origin);
    auto sec = static_cast<time_t>(timeout_seconds);
    auto usec = static_cast<time_t>((timeout_seconds - static_cast<double>(sec)) * 1e6);
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);

    httplib::Headers headers = auth_headers(auth_token_env);
    std::string payload = body.dump();
    std::string url = origin + prefix + path;

    std::string last_transport;
    int last_status = 0;
    for (int attempt = 0; attempt <= max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(static_cast<long long>(backoff_ms) << (attempt - 1)));
        }
        httplib::Result result = client.Post(prefix + path, headers, payload, "application/json");
        if (!result) {
            last_transport = httplib::to_string(result.error());
            continue;
        }
        int status = result->status;
        if (status >= 200 && status < 300) {
            json parsed = json::parse(result->body, nullptr, false);
            if (parsed.is_discarded()) {
                throw MalformedResponseError("invalid JSON in response from " + url);
            }
            return parsed;
        }
        if (status >= 500) {
            last_transport.clear();
            last_status = status;
            continue;
        }
        throw HttpStatusError("endpoint " + url + " returned status " + std::to_string(status),
                              status);
    }
    if (!last_transport.empty()) {
        throw TransportError("no response from " + url + " after " +
                             std::to_string(max_retries + 1) + " attempts: " + last_transport);
    }
    throw HttpStatusError("endpoint " + url + " still returned status " +
                              std::to_string(last_status) + " after " +
                              std::to_string(max_retries + 1) + " attempts",
                          last_status);
}

}  // namespace

std::string complete(const ChatEndpoint& endpoint, const std::string& prompt) {
    endpoint.validate();
    json body{{"model", endpoint.model_id},
              {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
              {"temperature", endpoint.temperature},
              {"max_tokens", endpoint.max_tokens}};
    json resp = post_json(endpoint.base_url, "/v1/chat/completions", body,
                          endpoint.timeout_seconds, endpoint.auth_token_env,
                          endpoint.max_retries, endpoint.backoff_ms);
    if (!resp.contains("choices") || !resp["choices"].is_array() || resp["choices"].empty()) {
        throw MalformedResponseError("chat response has no choices array");
    }
    const json& first = resp["choices"][0];
    if (!first.contains("message") || !first["message"].contains("content") ||
        !first["message"]["content"].is_string()) {
        throw MalformedResponseError("chat response lacks choices[0].message.content");
    }
    std::string content = first["message"]["content"].get<std::string>();
    if (content.empty()) {
        throw MalformedResponseError("chat response content is empty");
    }
    return content;
}

Eigen::VectorXd embed_text(const EmbeddingEndpoint& endpoint, const std::string& text) {
    endpoint.validate();
    json body{{"model", endpoint.model_id}, {"input", text}};
    json resp = post_json(endpoint.base_url, "/v1/embeddings", body, endpoint.timeout_seconds,
                          endpoint.auth_token_env, endpoint.max_retries, endpoint.backoff_ms);
    if (!resp.contains("data") || !resp["data"].is_array() || resp["data"].empty()) {
        throw MalformedResponseError("embedding response has no data array");
    }
    const json& first = resp["data"][0];
    if (!first.contains("embedding") || !first["embedding"].is_array()) {
        throw MalformedResponseError("embedding response lacks data[0].embedding");
    }
    const json& emb = first["embedding"];
    if (static_cast<int>(emb.size()) != endpoint.dim) {
        throw EmbeddingDimError("embedding has length " + std::to_string(emb.size()) +
                                ", expected " + std::to_string(endpoint.dim));
    }
    Eigen::VectorXd v(endpoint.dim);
    for (int i = 0; i < endpoint.dim; ++i) {
        const json& x = emb[static_cast<std::size_t>(i)];
        if (!x.is_number()) {
            throw MalformedResponseError("embedding entry " + std::to_string(i) +
                                         " is not a number");
        }
        v(i) = x.get<double>();
    }
    return v;
}

}  // namespace zpfp
