#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "topicpipe/corpus.hpp"
#include "topicpipe/llm_client.hpp"

namespace topicpipe::augment {

/// The default instruction text sent for every headline (asks for a brief
/// description of the primary actor).
extern const char* const kDefaultInstruction;

struct PromptTemplate {
    std::string instruction;               // contains the placeholder exactly once
    std::string placeholder = "{headline}";
    std::string template_id;               // content digest; keys the cache
};

/// Builds a template from instruction text; template_id is derived from the
/// instruction and placeholder so edited prompts invalidate cached entries.
PromptTemplate make_prompt_template(std::string instruction,
                                    std::string placeholder = "{headline}");

/// kDefaultInstruction followed by "Headline: {headline}".
PromptTemplate default_prompt_template();

/// Replaces the placeholder with doc.text. Throws ValidationError when the
/// placeholder is missing from the template.
std::string render_prompt(const PromptTemplate& tpl, const corpus::Document& doc);

struct ExclusionRule {
    std::vector<std::string> patterns = {"does not reference",
                                         "does not explicitly reference"};
    bool case_sensitive = false;
};

/// True iff any pattern occurs as a substring of text (case-insensitive
/// unless the rule says otherwise). Adding patterns never flips a true
/// result back to false.
bool apply_exclusion_rule(std::string_view text, const ExclusionRule& rule);

struct Augmentation {
    std::string doc_id;
    std::string response_text;
    std::string model_id;
    std::string template_id;
    std::string prompt_hash;  // digest(model_id, template_id, document text)
    std::string created_at;   // ISO-8601 UTC
    bool excluded = false;

    bool operator==(const Augmentation&) const = default;
};

/// Cache key digest, stable across runs: fnv1a64 over model_id, template_id
/// and the document text joined with 0x1f separators.
std::string prompt_hash(const std::string& model_id, const std::string& template_id,
                        const std::string& doc_text);

/// Append-only JSONL store keyed by (doc_id, prompt_hash); on reload the
/// last record for a key wins. Thread-safe.
class AugmentationStore {
public:
    /// Opens (and loads) the file at path, creating it on first write. An
    /// empty path keeps the store memory-only.
    explicit AugmentationStore(std::string path = "");

    std::optional<Augmentation> find(const std::string& doc_id,
                                     const std::string& prompt_hash) const;
    /// Most recently appended record for the doc id, regardless of prompt
    /// generation.
    std::optional<Augmentation> find_latest(const std::string& doc_id) const;
    void upsert(const Augmentation& augmentation);

    std::size_t size() const;
    std::vector<Augmentation> all() const;  // insertion order
    /// Digest over the sorted canonical records; independent of append order.
    std::string content_digest() const;
    const std::string& path() const { return path_; }

private:
    std::string path_;
    mutable std::mutex mutex_;
    std::vector<Augmentation> records_;                    // insertion order, deduped by key
    std::map<std::pair<std::string, std::string>, std::size_t> index_;  // key -> records_ pos
    std::map<std::string, std::size_t> latest_by_doc_;
};

struct AugmentOptions {
    DecodingParams decoding;
    ExclusionRule rule;
    std::size_t max_in_flight = 1;
};

struct AugmentFailure {
    std::string doc_id;
    std::string reason;
};

struct AugmentResult {
    std::vector<Augmentation> augmentations;  // one per augmented doc, corpus order
    std::vector<AugmentFailure> failures;     // persistent per-document failures
    std::size_t client_calls = 0;
    std::size_t cache_hits = 0;
};

/// Augments every document, serving warm cache entries without touching the
/// client and dispatching at most max_in_flight concurrent requests for the
/// rest. Every new augmentation is persisted before returning; auth and
/// exhausted-rate-limit errors abort (the partial store survives), other
/// failures land in the failure list and the run continues.
AugmentResult augment_corpus(const corpus::Corpus& corpus, const PromptTemplate& tpl,
                             LLMClient& client, AugmentationStore& store,
                             const AugmentOptions& options);

}  // namespace topicpipe::augment
