#pragma once

#include <optional>
#include <string>
#include <vector>

#include "topicpipe/augment.hpp"
#include "topicpipe/cluster.hpp"
#include "topicpipe/corpus.hpp"
#include "topicpipe/embed.hpp"
#include "topicpipe/reduce.hpp"
#include "topicpipe/represent.hpp"

namespace topicpipe::pipeline {

enum class InputMode { Raw, Augmented };

const char* input_mode_name(InputMode mode);
InputMode parse_input_mode(const std::string& name);

struct RunConfig {
    InputMode input_mode = InputMode::Raw;
    std::size_t min_topic_size = 90;  // 100 for augmented runs, 90 for raw
    std::size_t ngram_max = 2;
    std::size_t top_k_keywords = 10;
    std::size_t output_dim = 5;
    double neighborhood_quantile = 0.9;
    std::size_t min_core_neighbors = 5;
    std::string embedder_id;  // recorded from the provider at fit time
    std::size_t min_term_count = 2;
    double mmr_diversity = 0.3;
    std::size_t mmr_pool = 30;
    std::size_t representative_docs = 3;
    augment::ExclusionRule exclusion;
    int64_t seed = 0;
    std::vector<std::string> stopwords;  // empty -> builtin list
};

/// Digest of the canonical config serialization; part of the manifest.
std::string config_digest(const RunConfig& config);

enum class DocStatus { Assigned, Outlier, Excluded, Failed };

const char* doc_status_name(DocStatus status);

struct DocAssignment {
    std::string doc_id;
    int label = -1;  // topic id when assigned, -1 otherwise
    DocStatus status = DocStatus::Outlier;
};

struct TopicSummary {
    int topic_id = 0;
    std::size_t size = 0;
    std::vector<represent::ScoredTerm> keywords;
    std::vector<std::string> representative_doc_ids;
};

struct RunLedger {
    std::size_t assigned = 0;
    std::size_t outliers = 0;
    std::size_t excluded = 0;
    std::size_t failed = 0;
    std::vector<std::string> warnings;
};

struct TopicModelRun {
    std::string run_id;          // digest of (corpus digest, config digest); replay-stable
    std::string artifact_version;
    std::string created_at;      // the single timestamp field
    std::string corpus_digest;
    std::string kernel_backend;
    RunConfig config;
    std::optional<reduce::Reducer> reducer;   // absent when reduction was skipped
    std::vector<DocAssignment> assignments;   // corpus order
    std::vector<TopicSummary> topics;         // by topic id
    RunLedger ledger;
};

/// Runs embed -> reduce -> cluster -> represent over the corpus. Augmented
/// mode models augmentation response texts, drops rule-excluded ones before
/// embedding and counts store misses as failed documents; raw mode models
/// the document text and never consults the store. Deterministic for fixed
/// inputs: a second run from the same manifest serializes byte-identically
/// except for created_at.
TopicModelRun fit_topic_model(const corpus::Corpus& corpus,
                              const augment::AugmentationStore* augmentations,
                              const RunConfig& config, embed::EmbeddingProvider& provider);

/// Serialization of one run directory: manifest.json, assignments.jsonl,
/// topics.json, ledger.json.
std::string manifest_json(const TopicModelRun& run);
std::string assignments_jsonl(const TopicModelRun& run);
std::string topics_json(const TopicModelRun& run);
std::string ledger_json(const TopicModelRun& run);

void save_run(const TopicModelRun& run, const std::string& dir);
TopicModelRun load_run(const std::string& dir);

/// Rebuilds the RunConfig recorded in a manifest (for replays).
RunConfig config_from_manifest(const std::string& manifest_text);

struct RunComparison {
    std::string run_a;
    std::string run_b;
    std::string corpus_digest;
    std::size_t corpus_size = 0;
    std::size_t topics_a = 0;
    std::size_t topics_b = 0;
    RunLedger ledger_a, ledger_b;
    double coverage_a = 0.0, coverage_b = 0.0;  // assigned / corpus size
    std::vector<std::size_t> sizes_a, sizes_b;
    std::vector<std::vector<std::string>> keywords_a, keywords_b;  // top-k terms per topic
    std::vector<std::vector<double>> jaccard;  // topics_a x topics_b keyword overlap
};

/// Throws ValidationError when the runs cover different corpora.
RunComparison compare_runs(const TopicModelRun& a, const TopicModelRun& b);

std::string comparison_json(const RunComparison& cmp);
RunComparison comparison_from_json(const std::string& text);

}  // namespace topicpipe::pipeline
