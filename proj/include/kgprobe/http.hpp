#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <string>
#include <thread>

#include "json.hpp"
#include "kgprobe/errors.hpp"

namespace kgprobe {

struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds initial_backoff{1000};
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

// POSTs a JSON body. Transport failures and 5xx/429 statuses raise
// TransportError; other statuses are returned to the caller.
HttpResponse post_json(const std::string& url, const nlohmann::json& body,
                       const std::map<std::string, std::string>& headers,
                       std::chrono::seconds timeout = std::chrono::seconds(60));

// Runs `call` until it succeeds or the policy is exhausted. Only
// TransportError is retried; backoff doubles after each failure. The final
// error reports the total attempt count.
template <typename F>
auto with_retries(const RetryPolicy& policy, F&& call, const std::function<void(std::chrono::milliseconds)>& sleeper = {})
    -> decltype(call()) {
    auto backoff = policy.initial_backoff;
    const int attempts = policy.attempts < 1 ? 1 : policy.attempts;
    for (int attempt = 1;; ++attempt) {
        try {
            return call();
        } catch (const TransportError& e) {
            if (attempt >= attempts) throw TransportError(e.detail(), attempt);
        }
        if (sleeper)
            sleeper(backoff);
        else
            std::this_thread::sleep_for(backoff);
        backoff *= 2;
    }
}


// Extracts a JSON value by slash path ("choices/0/text" or "/choices/0/text").
const nlohmann::json& at_path(const nlohmann::json& doc, const std::string& path);

}  // namespace kgprobe
