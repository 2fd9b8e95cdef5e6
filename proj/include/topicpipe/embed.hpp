#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "topicpipe/retry.hpp"

namespace topicpipe::embed {

/// Fixed-dimension real vector. Non-zero provider outputs are L2-normalized
/// to within 1e-9; the all-zeros vector (token-free text) is the one
/// exception.
struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }
    bool is_zero() const {
        for (double v : values) {
            if (v != 0.0) return false;
        }
        return true;
    }
    bool operator==(const EmbeddingVector&) const = default;
};

/// Deterministic bag-of-tokens embedding. Tokens are lowercased runs of
/// ASCII alphanumerics; each token t is hashed with 64-bit FNV-1a (standard
/// offset basis as the seed), h = fnv1a64(t); coordinate h mod dim receives
/// +1 when bit 63 of h is clear and -1 when it is set. The accumulated
/// vector is L2-normalized (multiplication by 1/norm); token-free text
/// yields the zero vector. Bit-identical across processes and platforms.
EmbeddingVector hashing_embed(const std::string& text, std::size_t dim);

/// dot(a,b) / (|a||b|), clamped to [-1, 1]. Throws std::invalid_argument on
/// dimension mismatch or a zero vector.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual const std::string& provider_id() const = 0;
    virtual std::size_t dim() const = 0;
    /// Order-preserving; output size equals input size.
    virtual std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) = 0;
};

/// Convenience wrapper over provider->embed_batch with the output-length
/// contract checked.
std::vector<EmbeddingVector> embed_texts(EmbeddingProvider& provider,
                                         const std::vector<std::string>& texts);

class HashingProvider : public EmbeddingProvider {
public:
    explicit HashingProvider(std::size_t dim);
    const std::string& provider_id() const override { return id_; }
    std::size_t dim() const override { return dim_; }
    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;

private:
    std::size_t dim_;
    std::string id_;
};

struct RemoteEmbedderConfig {
    std::string endpoint;       // e.g. https://api.openai.com
    std::string path = "/v1/embeddings";
    std::string model_id;
    std::string credential_env; // name of the env var holding the key
    std::size_t dim = 1536;
    std::size_t batch_size = 64;
    int timeout_ms = 30000;
    RetryPolicy retry;
    std::string cache_path;     // JSONL {text_digest, provider_id, values}; empty = no cache
};

/// OpenAI-style embeddings endpoint with the same retry policy as the LLM
/// client and a content-addressed JSONL cache.
std::unique_ptr<EmbeddingProvider> make_remote_provider(const RemoteEmbedderConfig& config);

/// Factory for the CLI: "hashing" -> HashingProvider(dim).
std::unique_ptr<EmbeddingProvider> make_hashing_provider(std::size_t dim);

}  // namespace topicpipe::embed
