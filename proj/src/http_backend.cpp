#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>
#include <json.hpp>
#include <thread>

#include "logsieve/errors.hpp"
#include "logsieve/llm_gateway.hpp"

namespace logsieve {

std::string build_chat_request(const Prompt& prompt, const CompletionSettings& settings) {
    nlohmann::ordered_json body;
    body["model"] = settings.model;
    body["messages"] = nlohmann::ordered_json::array({
        {{"role", "system"}, {"content", prompt.instruction}},
        {{"role", "user"}, {"content", prompt.user_message()}},
    });
    body["temperature"] = settings.temperature;
    body["seed"] = settings.seed;
    body["max_tokens"] = settings.max_output_tokens;
    return body.dump();
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    const std::string& url = config_.base_url;
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw std::invalid_argument("base URL needs a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    origin_ = url.substr(0, path_start);
    path_prefix_ = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    if (config_.max_attempts == 0) config_.max_attempts = 1;
}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::complete(const Prompt& prompt, const CompletionSettings& settings) {
    httplib::Client client{origin_};
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);

    httplib::Headers headers;
    if (!config_.api_key_env.empty()) {
        if (const char* key = std::getenv(config_.api_key_env.c_str()); key != nullptr && *key != '\0')
            headers.emplace("Authorization", std::string{"Bearer "} + key);
    }
    const std::string body = build_chat_request(prompt, settings);
    const std::string path = path_prefix_ + "/chat/completions";

    std::string last_error;
    auto backoff = config_.initial_backoff;
    for (std::size_t attempt = 1; attempt <= config_.max_attempts; ++attempt) {
        if (attempt > 1) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
        auto res = client.Post(path, headers, body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) throw BackendUnavailable("HTTP " + std::to_string(res->status) + ": " + res->body);

        const auto reply = nlohmann::json::parse(res->body, nullptr, false);
        if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty())
            throw BackendUnavailable("malformed completion response");
        const auto& choice = reply["choices"][0];
        if (choice.value("finish_reason", "") == "length")
            throw OutputTruncated("completion hit max_output_tokens=" + std::to_string(settings.max_output_tokens));
        const auto& message = choice["message"];
        if (!message.contains("content") || !message["content"].is_string())
            throw BackendUnavailable("completion response has no message content");
        return message["content"].get<std::string>();
    }
    throw BackendUnavailable("giving up after " + std::to_string(config_.max_attempts) + " attempts: " + last_error);
}

}  // namespace logsieve
