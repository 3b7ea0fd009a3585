#pragma once

#include <semaphore>
#include <thread>

#include <httplib.h>

#include "spage/llm.hpp"

namespace spage {

// Vendor-neutral completion transport: POST <base_url><path> with a JSON body
//   {"model", "prompt", "temperature", "top_p", "max_tokens", "schema_hint"?}
// expecting 200 and {"text": "..."} back. Bearer auth from the api key.
// Transport failures (connect errors, 5xx) retry with exponential backoff;
// anything the server answered with 4xx does not.
class HttpCompletionBackend : public CompletionBackend {
public:
    explicit HttpCompletionBackend(HttpBackendConfig config)
        : config_(std::move(config)), gate_(std::max(1, config_.max_concurrent_requests)) {
        if (config_.base_url.empty())
            throw BackendError("no backend URL configured (set SPAGE_LLM_BASE_URL)");
    }

    std::string complete(const CompletionRequest& request) override {
        nlohmann::ordered_json body;
        body["model"] = request.model;
        body["prompt"] = request.prompt;
        body["temperature"] = request.temperature;
        body["top_p"] = request.top_p;
        body["max_tokens"] = request.max_tokens;
        if (request.schema_hint) body["schema_hint"] = *request.schema_hint;
        const std::string payload = body.dump();

        httplib::Headers headers;
        if (!config_.api_key.empty())
            headers.emplace("Authorization", "Bearer " + config_.api_key);

        auto backoff = config_.initial_backoff;
        std::string last_error;
        for (int attempt = 0; attempt <= config_.retries; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(backoff);
                backoff *= 2;
            }
            gate_.acquire();
            httplib::Client client(config_.base_url);
            client.set_connection_timeout(10);
            client.set_read_timeout(120);
            auto res = client.Post(config_.path, headers, payload, "application/json");
            gate_.release();
            if (!res) {
                last_error = "transport error: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status >= 500) {
                last_error = "server error: HTTP " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200)
                throw BackendError("backend rejected request: HTTP " +
                                   std::to_string(res->status) + " " + res->body);
            try {
                auto doc = nlohmann::json::parse(res->body);
                return doc.at("text").get<std::string>();
            } catch (const std::exception& e) {
                throw BackendError(std::string("malformed backend response: ") + e.what());
            }
        }
        throw BackendError("backend unreachable after " + std::to_string(config_.retries + 1) +
                           " attempts: " + last_error);
    }

private:
    HttpBackendConfig config_;
    std::counting_semaphore<> gate_;
};

}  // namespace spage
