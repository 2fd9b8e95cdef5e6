#pragma once

#include <stdexcept>
#include <string>

namespace topicpipe {

/// Bad user input: missing files, malformed rows, inconsistent arguments.
/// Maps to CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Failure classes surfaced by remote clients (LLM and embedding APIs).
enum class ClientErrorKind {
    Auth,       // credential rejected; the run must abort
    RateLimit,  // throttled; retried, aborts once attempts are exhausted
    Timeout,    // request deadline exceeded; retried
    Network,    // connect/transport failure; retried
    Malformed,  // response arrived but could not be parsed
};

/// Thrown by LLM/embedding clients after their retry policy is exhausted
/// (or immediately for non-retryable kinds). Maps to CLI exit code 3.
class ClientError : public std::runtime_error {
public:
    ClientError(ClientErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}

    ClientErrorKind kind() const { return kind_; }

    /// Auth failures and exhausted rate limits stop the whole run; the
    /// remaining kinds only fail the document being processed.
    bool aborts_run() const {
        return kind_ == ClientErrorKind::Auth || kind_ == ClientErrorKind::RateLimit;
    }

private:
    ClientErrorKind kind_;
};

/// A modeling stage failed (embed/reduce/cluster/represent). Carries the
/// stage name so the CLI can attribute the failure. Maps to exit code 4.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& msg)
        : std::runtime_error(stage + ": " + msg), stage_(std::move(stage)) {}

    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

}  // namespace topicpipe
