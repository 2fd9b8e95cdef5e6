#include "topicpipe/embed.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#define CPPHTTPLIB_NO_EXCEPTIONS_SUPPORT_DISABLED
#include <httplib.h>

#include "topicpipe/errors.hpp"
#include "topicpipe/kernels.hpp"
#include "topicpipe/util.hpp"

namespace topicpipe::embed {

using json = nlohmann::ordered_json;

EmbeddingVector hashing_embed(const std::string& text, std::size_t dim) {
    if (dim < 2) throw std::invalid_argument("hashing_embed: dim must be >= 2");
    EmbeddingVector vec;
    vec.values.assign(dim, 0.0);
    bool any = false;
    for (const std::string& token : util::tokenize(text)) {
        const uint64_t h = util::fnv1a64(token);
        const double sign = (h >> 63) ? -1.0 : 1.0;
        vec.values[h % dim] += sign;
        any = true;
    }
    if (!any) return vec;
    const double norm_sq = kernels::dot(vec.values.data(), vec.values.data(), dim);
    if (norm_sq == 0.0) return vec;  // signs can cancel exactly
    kernels::scale(vec.values.data(), dim, 1.0 / std::sqrt(norm_sq));
    return vec;
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("cosine_similarity: dimension mismatch (" +
                                    std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) +
                                    ")");
    }
    const double na = kernels::dot(a.values.data(), a.values.data(), a.dim());
    const double nb = kernels::dot(b.values.data(), b.values.data(), b.dim());
    if (na == 0.0 || nb == 0.0) {
        throw std::invalid_argument("cosine_similarity: zero vector");
    }
    const double sim = kernels::dot(a.values.data(), b.values.data(), a.dim()) /
                       (std::sqrt(na) * std::sqrt(nb));
    return std::clamp(sim, -1.0, 1.0);
}

std::vector<EmbeddingVector> embed_texts(EmbeddingProvider& provider,
                                         const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out = provider.embed_batch(texts);
    if (out.size() != texts.size()) {
        throw StageError("embed", "provider " + provider.provider_id() + " returned " +
                                      std::to_string(out.size()) + " vectors for " +
                                      std::to_string(texts.size()) + " texts");
    }
    for (const EmbeddingVector& v : out) {
        if (v.dim() != provider.dim()) {
            throw StageError("embed", "provider returned wrong dimension");
        }
    }
    return out;
}

HashingProvider::HashingProvider(std::size_t dim)
    : dim_(dim), id_("hashing-fnv1a64-d" + std::to_string(dim)) {
    if (dim < 2) throw std::invalid_argument("HashingProvider: dim must be >= 2");
}

std::vector<EmbeddingVector> HashingProvider::embed_batch(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const std::string& t : texts) out.push_back(hashing_embed(t, dim_));
    return out;
}

std::unique_ptr<EmbeddingProvider> make_hashing_provider(std::size_t dim) {
    return std::make_unique<HashingProvider>(dim);
}

namespace {

void normalize(EmbeddingVector& v) {
    const double norm_sq = kernels::dot(v.values.data(), v.values.data(), v.dim());
    if (norm_sq > 0.0) kernels::scale(v.values.data(), v.dim(), 1.0 / std::sqrt(norm_sq));
}

class RemoteProvider : public EmbeddingProvider {
public:
    explicit RemoteProvider(RemoteEmbedderConfig config)
        : config_(std::move(config)),
          id_("remote-" + config_.model_id + "-d" + std::to_string(config_.dim)) {
        if (config_.cache_path.empty()) return;
        std::ifstream in(config_.cache_path);
        std::string line;
        while (std::getline(in, line)) {
            if (util::trim(line).empty()) continue;
            json rec = json::parse(line, nullptr, false);
            if (rec.is_discarded() || !rec.contains("text_digest") || !rec.contains("values")) {
                continue;  // tolerate torn tail lines from an interrupted run
            }
            if (rec.value("provider_id", "") != id_) continue;
            EmbeddingVector v;
            v.values = rec["values"].get<std::vector<double>>();
            cache_[rec["text_digest"].get<std::string>()] = std::move(v);
        }
    }

    const std::string& provider_id() const override { return id_; }
    std::size_t dim() const override { return config_.dim; }

    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override {
        std::vector<EmbeddingVector> out(texts.size());
        std::vector<std::size_t> missing;
        {
            std::lock_guard lock(mutex_);
            for (std::size_t i = 0; i < texts.size(); ++i) {
                auto it = cache_.find(util::hex_digest(texts[i]));
                if (it != cache_.end()) {
                    out[i] = it->second;
                } else {
                    missing.push_back(i);
                }
            }
        }
        for (std::size_t start = 0; start < missing.size(); start += config_.batch_size) {
            const std::size_t end = std::min(missing.size(), start + config_.batch_size);
            std::vector<std::string> batch;
            for (std::size_t k = start; k < end; ++k) batch.push_back(texts[missing[k]]);
            std::vector<EmbeddingVector> vecs = fetch(batch);
            std::lock_guard lock(mutex_);
            for (std::size_t k = start; k < end; ++k) {
                out[missing[k]] = vecs[k - start];
                store(texts[missing[k]], vecs[k - start]);
            }
        }
        return out;
    }

private:
    std::vector<EmbeddingVector> fetch(const std::vector<std::string>& batch) {
        return with_retries(config_.retry, [&] { return fetch_once(batch); });
    }

    std::vector<EmbeddingVector> fetch_once(const std::vector<std::string>& batch) {
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
        body["input"] = batch;
        auto res = client.Post(config_.path, headers, body.dump(), "application/json");
        if (!res) {
            throw ClientError(ClientErrorKind::Network,
                              "embedding request failed: " + httplib::to_string(res.error()));
        }
        if (res->status == 401 || res->status == 403) {
            throw ClientError(ClientErrorKind::Auth,
                              "embedding auth failed (" + std::to_string(res->status) + ")");
        }
        if (res->status == 429) {
            throw ClientError(ClientErrorKind::RateLimit, "embedding rate limited (429)");
        }
        if (res->status == 408) {
            throw ClientError(ClientErrorKind::Timeout, "embedding timeout (408)");
        }
        if (res->status >= 500) {
            throw ClientError(ClientErrorKind::Network,
                              "embedding server error (" + std::to_string(res->status) + ")");
        }
        if (res->status != 200) {
            throw ClientError(ClientErrorKind::Malformed,
                              "unexpected embedding status " + std::to_string(res->status));
        }
        json parsed = json::parse(res->body, nullptr, false);
        if (parsed.is_discarded() || !parsed.contains("data") || !parsed["data"].is_array() ||
            parsed["data"].size() != batch.size()) {
            throw ClientError(ClientErrorKind::Malformed, "unparseable embedding response");
        }
        std::vector<EmbeddingVector> vecs;
        vecs.reserve(batch.size());
        for (const json& item : parsed["data"]) {
            if (!item.contains("embedding") || !item["embedding"].is_array()) {
                throw ClientError(ClientErrorKind::Malformed, "embedding entry missing vector");
            }
            EmbeddingVector v;
            v.values = item["embedding"].get<std::vector<double>>();
            if (v.dim() != config_.dim) {
                throw ClientError(ClientErrorKind::Malformed,
                                  "embedding dim " + std::to_string(v.dim()) + ", expected " +
                                      std::to_string(config_.dim));
            }
            normalize(v);
            vecs.push_back(std::move(v));
        }
        return vecs;
    }

    // Caller holds mutex_.
    void store(const std::string& text, const EmbeddingVector& v) {
        const std::string digest = util::hex_digest(text);
        cache_[digest] = v;
        if (config_.cache_path.empty()) return;
        json rec;
        rec["text_digest"] = digest;
        rec["provider_id"] = id_;
        rec["values"] = v.values;
        std::ofstream out(config_.cache_path, std::ios::app);
        out << rec.dump() << '\n';
    }

    RemoteEmbedderConfig config_;
    std::string id_;
    std::mutex mutex_;
    std::unordered_map<std::string, EmbeddingVector> cache_;
};

}  // namespace

std::unique_ptr<EmbeddingProvider> make_remote_provider(const RemoteEmbedderConfig& config) {
    return std::make_unique<RemoteProvider>(config);
}

}  // namespace topicpipe::embed
