#include "topicpipe/llm_client.hpp"

#include <cstdlib>

#include <nlohmann/json.hpp>

#include <httplib.h>

#include "topicpipe/errors.hpp"
#include "topicpipe/util.hpp"

namespace topicpipe::augment {

using json = nlohmann::ordered_json;

MockLLMClient::MockLLMClient(std::string model_id, std::vector<MockRule> rules,
                             std::string default_response)
    : model_id_(std::move(model_id)),
      rules_(std::move(rules)),
      default_response_(std::move(default_response)) {}

std::unique_ptr<MockLLMClient> MockLLMClient::from_rules_file(const std::string& path,
                                                              std::string model_id) {
    std::vector<MockRule> rules;
    std::string default_response;
    for (auto& [key, value] : util::parse_kv_file(path)) {
        if (key == "default") {
            default_response = value;
        } else {
            rules.push_back({key, value});
        }
    }
    return std::make_unique<MockLLMClient>(std::move(model_id), std::move(rules),
                                           std::move(default_response));
}

namespace {

struct InFlightGuard {
    std::atomic<int>& gauge;
    explicit InFlightGuard(std::atomic<int>& g, std::atomic<int>& high_water) : gauge(g) {
        const int now = gauge.fetch_add(1) + 1;
        int seen = high_water.load();
        while (now > seen && !high_water.compare_exchange_weak(seen, now)) {
        }
    }
    ~InFlightGuard() { gauge.fetch_sub(1); }
};

std::string substitute(std::string text, std::string_view token, std::string_view value) {
    const std::size_t pos = text.find(token);
    if (pos != std::string::npos) text.replace(pos, token.size(), value);
    return text;
}

}  // namespace

std::string MockLLMClient::complete(const std::string& prompt, const DecodingParams&) {
    calls_.fetch_add(1);
    InFlightGuard guard(in_flight_, max_concurrent_);
    if (delay_ms_ > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_));
    }
    std::string response = default_response_;
    for (const MockRule& rule : rules_) {
        if (prompt.find(rule.pattern) != std::string::npos) {
            response = rule.response;
            break;
        }
    }
    if (response == "<<error:auth>>") {
        throw ClientError(ClientErrorKind::Auth, "mock auth failure");
    }
    if (response == "<<error:rate_limit>>") {
        throw ClientError(ClientErrorKind::RateLimit, "mock rate limit");
    }
    if (response == "<<error:timeout>>") {
        throw ClientError(ClientErrorKind::Timeout, "mock timeout");
    }
    if (response == "<<error:malformed>>") {
        throw ClientError(ClientErrorKind::Malformed, "mock malformed response");
    }
    return substitute(std::move(response), "{prompt}", prompt);
}

namespace {

class HttpLLMClient : public LLMClient {
public:
    explicit HttpLLMClient(HttpClientConfig config) : config_(std::move(config)) {}

    const std::string& model_id() const override { return config_.model_id; }

    std::string complete(const std::string& prompt, const DecodingParams& params) override {
        return with_retries(config_.retry, [&] { return complete_once(prompt, params); });
    }

private:
    std::string complete_once(const std::string& prompt, const DecodingParams& params) {
        const char* key = config_.credential_env.empty()
                              ? nullptr
                              : std::getenv(config_.credential_env.c_str());
        if (!config_.credential_env.empty() && (key == nullptr || *key == '\0')) {
            throw ClientError(ClientErrorKind::Auth,
                              "credential env var " + config_.credential_env + " is not set");
        }
        httplib::Client client(config_.endpoint);
        client.set_connection_timeout(config_.timeout_ms / 1000,
                                      (config_.timeout_ms % 1000) * 1000);
        client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);
        httplib::Headers headers;
        if (key) headers.emplace("Authorization", std::string("Bearer ") + key);

        json body;
        body["model"] = config_.model_id;
        body["messages"] = json::array({json{{"role", "user"}, {"content", prompt}}});
        body["temperature"] = params.temperature;
        body["max_tokens"] = params.max_tokens;

        auto res = client.Post(config_.path, headers, body.dump(), "application/json");
        if (!res) {
            const auto err = res.error();
            const auto kind = (err == httplib::Error::ConnectionTimeout ||
                               err == httplib::Error::Read || err == httplib::Error::Write)
                                  ? ClientErrorKind::Timeout
                                  : ClientErrorKind::Network;
            throw ClientError(kind, "request failed: " + httplib::to_string(err));
        }
        if (res->status == 401 || res->status == 403) {
            throw ClientError(ClientErrorKind::Auth,
                              "authentication failed (" + std::to_string(res->status) + ")");
        }
        if (res->status == 429) {
            throw ClientError(ClientErrorKind::RateLimit, "rate limited (429)");
        }
        if (res->status == 408) {
            throw ClientError(ClientErrorKind::Timeout, "request timeout (408)");
        }
        if (res->status >= 500) {
            throw ClientError(ClientErrorKind::Network,
                              "server error (" + std::to_string(res->status) + ")");
        }
        if (res->status != 200) {
            throw ClientError(ClientErrorKind::Malformed,
                              "unexpected status " + std::to_string(res->status) + ": " +
                                  res->body.substr(0, 200));
        }
        json parsed = json::parse(res->body, nullptr, false);
        if (parsed.is_discarded() || !parsed.contains("choices") || !parsed["choices"].is_array() ||
            parsed["choices"].empty()) {
            throw ClientError(ClientErrorKind::Malformed, "unparseable completion response");
        }
        const json& choice = parsed["choices"][0];
        if (!choice.contains("message") || !choice["message"].contains("content") ||
            !choice["message"]["content"].is_string()) {
            throw ClientError(ClientErrorKind::Malformed, "completion missing message content");
        }
        return choice["message"]["content"].get<std::string>();
    }

    HttpClientConfig config_;
};

}  // namespace

std::unique_ptr<LLMClient> make_http_client(const HttpClientConfig& config) {
    return std::make_unique<HttpLLMClient>(config);
}

}  // namespace topicpipe::augment
