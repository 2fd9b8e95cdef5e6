#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "topicpipe/retry.hpp"

namespace topicpipe::augment {

struct DecodingParams {
    double temperature = 0.0;  // pinned low for reproducible cached corpora
    int max_tokens = 256;
};

class LLMClient {
public:
    virtual ~LLMClient() = default;
    virtual const std::string& model_id() const = 0;
    /// Returns the model's text response. Transient failures are retried
    /// internally (exponential backoff with jitter); throws ClientError once
    /// the policy is exhausted or immediately for auth/malformed errors.
    virtual std::string complete(const std::string& prompt, const DecodingParams& params) = 0;
};

/// First matching pattern (case-sensitive substring of the prompt) wins.
struct MockRule {
    std::string pattern;
    std::string response;
};

/// Deterministic scripted client for tests and offline runs. Response
/// strings may contain "{prompt}", replaced with the full prompt, or one of
/// the error directives <<error:auth>>, <<error:rate_limit>>,
/// <<error:timeout>>, <<error:malformed>> to raise the matching failure.
/// Counts calls and tracks the in-flight high-water mark.
class MockLLMClient : public LLMClient {
public:
    MockLLMClient(std::string model_id, std::vector<MockRule> rules,
                  std::string default_response);

    /// Rules file in the plain key-value format; the reserved key "default"
    /// sets the fallback response, every other pair is a pattern rule in
    /// file order.
    static std::unique_ptr<MockLLMClient> from_rules_file(const std::string& path,
                                                          std::string model_id);

    const std::string& model_id() const override { return model_id_; }
    std::string complete(const std::string& prompt, const DecodingParams& params) override;

    /// Artificial per-call latency; lets tests observe request overlap.
    void set_delay_ms(int ms) { delay_ms_ = ms; }

    int64_t call_count() const { return calls_.load(); }
    int max_concurrent() const { return max_concurrent_.load(); }

private:
    std::string model_id_;
    std::vector<MockRule> rules_;
    std::string default_response_;
    int delay_ms_ = 0;
    std::atomic<int64_t> calls_{0};
    std::atomic<int> in_flight_{0};
    std::atomic<int> max_concurrent_{0};
};

struct HttpClientConfig {
    std::string endpoint;  // scheme://host[:port]
    std::string path = "/v1/chat/completions";
    std::string model_id;
    std::string credential_env;  // env var holding the API key; never logged
    int timeout_ms = 30000;
    RetryPolicy retry;
};

/// Chat-completions HTTP client. 401/403 -> auth (aborts the run), 429 ->
/// rate limit (retried, aborts when exhausted), timeouts and 5xx retried,
/// unparseable bodies -> malformed (fails the document only).
std::unique_ptr<LLMClient> make_http_client(const HttpClientConfig& config);

}  // namespace topicpipe::augment
