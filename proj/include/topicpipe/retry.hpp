#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <random>
#include <thread>

#include "topicpipe/errors.hpp"

namespace topicpipe {

/// Exponential backoff with jitter, shared by the LLM client and the remote
/// embedding provider. Attempt k (1-based) that fails transiently sleeps
/// base_delay_ms * 2^(k-1), capped at max_delay_ms, then scaled by a random
/// factor in [1 - jitter, 1].
struct RetryPolicy {
    int max_attempts = 4;
    int base_delay_ms = 250;
    int max_delay_ms = 8000;
    double jitter = 0.5;  // fraction of the delay randomized away
};

/// Deterministic part of the backoff schedule; uniform01 supplies the jitter
/// draw so tests can pin it.
inline int backoff_delay_ms(const RetryPolicy& policy, int attempt, double uniform01) {
    int64_t delay = static_cast<int64_t>(policy.base_delay_ms) << std::min(attempt - 1, 30);
    delay = std::min<int64_t>(delay, policy.max_delay_ms);
    double scaled = static_cast<double>(delay) * (1.0 - policy.jitter * uniform01);
    return static_cast<int>(scaled);
}

inline bool retryable(ClientErrorKind kind) {
    return kind == ClientErrorKind::RateLimit || kind == ClientErrorKind::Timeout ||
           kind == ClientErrorKind::Network;
}

/// Runs f() up to policy.max_attempts times, sleeping between transient
/// failures. Auth and malformed-response errors are rethrown immediately;
/// transient errors are rethrown once attempts are exhausted.
template <typename F,
          typename Sleep = void (*)(int)>
auto with_retries(const RetryPolicy& policy, F&& f,
                  Sleep sleep_ms = [](int ms) {
                      std::this_thread::sleep_for(std::chrono::milliseconds(ms));
                  }) -> decltype(f()) {
    thread_local std::mt19937_64 rng{std::random_device{}()};
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    int attempt = 0;
    for (;;) {
        ++attempt;
        try {
            return f();
        } catch (const ClientError& e) {
            if (!retryable(e.kind()) || attempt >= policy.max_attempts) throw;
            sleep_ms(backoff_delay_ms(policy, attempt, uniform(rng)));
        }
    }
}

}  // namespace topicpipe
