#pragma once

#include <map>
#include <string>
#include <vector>

#include "topicpipe/embed.hpp"

namespace topicpipe::represent {

struct VocabularyConfig {
    std::size_t ngram_min = 1;
    std::size_t ngram_max = 2;
    std::vector<std::string> stopwords;  // empty -> builtin list
    std::size_t min_term_count = 2;     // minimum total occurrences across classes
};

/// Terms are lowercased alphanumeric n-grams; stopword unigrams are dropped
/// and n-grams are formed over adjacent surviving tokens, joined by single
/// spaces.
std::vector<std::string> extract_terms(const std::string& text, const VocabularyConfig& config);

struct ClassTermMatrix {
    std::vector<int> classes;                 // topic ids, ascending
    std::vector<std::string> terms;           // lexicographically ascending
    std::vector<std::vector<long long>> counts;  // classes x terms
};

/// Throws ValidationError when no topic has a document or when every term is
/// filtered away (degenerate corpus).
ClassTermMatrix build_class_term_matrix(const std::map<int, std::vector<std::string>>& docs_by_topic,
                                        const VocabularyConfig& config);

/// W[c,t] = tf(c,t) * ln(1 + A / f(t)) with tf the class count, f the
/// term's total count over classes, and A the mean class row sum. Zero
/// counts give exactly zero weight.
std::vector<std::vector<double>> ctfidf(const ClassTermMatrix& matrix);

struct ScoredTerm {
    std::string term;
    double score;
};

/// Per-class candidate lists ordered by c-TF-IDF weight (descending, ties by
/// term), ready for re-ranking.
std::vector<ScoredTerm> top_candidates(const ClassTermMatrix& matrix,
                                       const std::vector<std::vector<double>>& weights,
                                       std::size_t class_index, std::size_t limit);

/// KeyBERT-style maximal-marginal-relevance re-rank over the top candidates.
/// The topic embedding is the mean of the topic text embeddings; the first
/// pick is the pure similarity argmax and later picks maximize
/// (1-diversity)*cos(term, topic) - diversity*max(cos(term, selected)).
/// Ties break by higher c-TF-IDF score, then lexicographically. Returned
/// scores are the selection-stage values (similarity for the first pick, the
/// MMR objective after). A zero topic embedding falls back to c-TF-IDF
/// order and appends a note to warnings.
std::vector<ScoredTerm> keybert_rerank(const std::vector<ScoredTerm>& candidates,
                                       const std::vector<std::string>& topic_texts,
                                       embed::EmbeddingProvider& provider, std::size_t top_k,
                                       double diversity, std::size_t pool_size = 30,
                                       std::vector<std::string>* warnings = nullptr);

/// The n member ids most cosine-similar to the topic centroid; similarity
/// ties resolve to the lexicographically smaller id, n is capped at the
/// topic size.
std::vector<std::string> representative_documents(
    const std::vector<std::string>& topic_doc_ids,
    const std::map<std::string, embed::EmbeddingVector>& doc_vectors, std::size_t n);

}  // namespace topicpipe::represent
