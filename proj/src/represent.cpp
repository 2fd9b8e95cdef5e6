#include "topicpipe/represent.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "topicpipe/errors.hpp"
#include "topicpipe/kernels.hpp"
#include "topicpipe/stopwords.hpp"
#include "topicpipe/util.hpp"

namespace topicpipe::represent {

std::vector<std::string> extract_terms(const std::string& text, const VocabularyConfig& config) {
    const auto stop = stopword_set(config.stopwords.empty() ? builtin_stopwords() : config.stopwords);
    std::vector<std::string> surviving;
    for (std::string& token : util::tokenize(text)) {
        if (!stop.contains(token)) surviving.push_back(std::move(token));
    }
    std::vector<std::string> terms;
    for (std::size_t n = config.ngram_min; n <= config.ngram_max; ++n) {
        if (n == 0 || surviving.size() < n) continue;
        for (std::size_t i = 0; i + n <= surviving.size(); ++i) {
            std::string term = surviving[i];
            for (std::size_t j = 1; j < n; ++j) {
                term += ' ';
                term += surviving[i + j];
            }
            terms.push_back(std::move(term));
        }
    }
    return terms;
}

ClassTermMatrix build_class_term_matrix(const std::map<int, std::vector<std::string>>& docs_by_topic,
                                        const VocabularyConfig& config) {
    bool any_doc = false;
    for (const auto& [topic, texts] : docs_by_topic) {
        if (!texts.empty()) any_doc = true;
    }
    if (docs_by_topic.empty() || !any_doc) {
        throw ValidationError("build_class_term_matrix: no documents in any topic");
    }

    // Count per class, then keep terms whose total across classes reaches
    // min_term_count.
    std::map<int, std::unordered_map<std::string, long long>> per_class;
    std::unordered_map<std::string, long long> totals;
    for (const auto& [topic, texts] : docs_by_topic) {
        auto& counts = per_class[topic];
        for (const std::string& text : texts) {
            for (std::string& term : extract_terms(text, config)) {
                ++totals[term];
                ++counts[std::move(term)];
            }
        }
    }

    ClassTermMatrix matrix;
    for (const auto& [term, total] : totals) {
        if (total >= static_cast<long long>(config.min_term_count)) matrix.terms.push_back(term);
    }
    if (matrix.terms.empty()) {
        throw ValidationError(
            "build_class_term_matrix: empty vocabulary after stopword/min-count filtering");
    }
    std::sort(matrix.terms.begin(), matrix.terms.end());

    for (const auto& [topic, counts] : per_class) {
        matrix.classes.push_back(topic);
        std::vector<long long> row(matrix.terms.size(), 0);
        for (std::size_t t = 0; t < matrix.terms.size(); ++t) {
            auto it = counts.find(matrix.terms[t]);
            if (it != counts.end()) row[t] = it->second;
        }
        matrix.counts.push_back(std::move(row));
    }
    return matrix;
}

std::vector<std::vector<double>> ctfidf(const ClassTermMatrix& matrix) {
    const std::size_t c = matrix.classes.size();
    const std::size_t t = matrix.terms.size();
    if (c == 0 || t == 0) throw ValidationError("ctfidf: empty matrix");

    std::vector<long long> term_totals(t, 0);
    long long grand_total = 0;
    for (std::size_t i = 0; i < c; ++i) {
        for (std::size_t j = 0; j < t; ++j) {
            term_totals[j] += matrix.counts[i][j];
            grand_total += matrix.counts[i][j];
        }
    }
    const double avg_class_total = static_cast<double>(grand_total) / static_cast<double>(c);

    std::vector<std::vector<double>> weights(c, std::vector<double>(t, 0.0));
    for (std::size_t i = 0; i < c; ++i) {
        for (std::size_t j = 0; j < t; ++j) {
            const long long tf = matrix.counts[i][j];
            if (tf == 0) continue;
            const double idf =
                std::log(1.0 + avg_class_total / static_cast<double>(term_totals[j]));
            weights[i][j] = static_cast<double>(tf) * idf;
        }
    }
    return weights;
}

std::vector<ScoredTerm> top_candidates(const ClassTermMatrix& matrix,
                                       const std::vector<std::vector<double>>& weights,
                                       std::size_t class_index, std::size_t limit) {
    std::vector<ScoredTerm> scored;
    for (std::size_t j = 0; j < matrix.terms.size(); ++j) {
        if (matrix.counts[class_index][j] > 0) {
            scored.push_back({matrix.terms[j], weights[class_index][j]});
        }
    }
    std::sort(scored.begin(), scored.end(), [](const ScoredTerm& a, const ScoredTerm& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.term < b.term;
    });
    if (scored.size() > limit) scored.resize(limit);
    return scored;
}

namespace {

// Similarity with zero vectors treated as "no signal" instead of an error;
// candidate term vectors are never zero for vocabulary terms, but this keeps
// degenerate inputs deterministic.
double guarded_cosine(const embed::EmbeddingVector& a, const embed::EmbeddingVector& b) {
    if (a.is_zero() || b.is_zero()) return 0.0;
    return embed::cosine_similarity(a, b);
}

}  // namespace

std::vector<ScoredTerm> keybert_rerank(const std::vector<ScoredTerm>& candidates,
                                       const std::vector<std::string>& topic_texts,
                                       embed::EmbeddingProvider& provider, std::size_t top_k,
                                       double diversity, std::size_t pool_size,
                                       std::vector<std::string>* warnings) {
    if (candidates.empty()) throw ValidationError("keybert_rerank: candidates must be non-empty");
    if (diversity < 0.0 || diversity > 1.0) {
        throw ValidationError("keybert_rerank: diversity must be in [0,1]");
    }

    // Re-rank pool: top candidates by c-TF-IDF (ties by term).
    std::vector<ScoredTerm> pool = candidates;
    std::stable_sort(pool.begin(), pool.end(), [](const ScoredTerm& a, const ScoredTerm& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.term < b.term;
    });
    if (pool.size() > pool_size) pool.resize(pool_size);
    const std::size_t m = pool.size();
    const std::size_t want = std::min(top_k, m);

    // Topic embedding: mean of the topic text embeddings.
    embed::EmbeddingVector topic_vec;
    topic_vec.values.assign(provider.dim(), 0.0);
    if (!topic_texts.empty()) {
        for (const embed::EmbeddingVector& v : embed::embed_texts(provider, topic_texts)) {
            kernels::add_inplace(topic_vec.values.data(), v.values.data(), topic_vec.dim());
        }
        kernels::scale(topic_vec.values.data(), topic_vec.dim(),
                       1.0 / static_cast<double>(topic_texts.size()));
    }
    if (topic_vec.is_zero()) {
        if (warnings) {
            warnings->push_back("keybert_rerank: zero topic embedding; kept c-TF-IDF order");
        }
        std::vector<ScoredTerm> out(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(want));
        return out;
    }

    std::vector<std::string> pool_terms;
    pool_terms.reserve(m);
    for (const ScoredTerm& st : pool) pool_terms.push_back(st.term);
    const std::vector<embed::EmbeddingVector> term_vecs = embed::embed_texts(provider, pool_terms);

    std::vector<double> topic_sim(m);
    for (std::size_t i = 0; i < m; ++i) topic_sim[i] = guarded_cosine(term_vecs[i], topic_vec);

    std::vector<bool> selected(m, false);
    // max cosine to any already-selected term, grown incrementally.
    std::vector<double> penalty(m, -1.0);
    std::vector<ScoredTerm> out;
    out.reserve(want);

    for (std::size_t step = 0; step < want; ++step) {
        std::size_t best = m;
        double best_value = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (selected[i]) continue;
            const double value = (step == 0)
                                     ? topic_sim[i]
                                     : (1.0 - diversity) * topic_sim[i] - diversity * penalty[i];
            if (best == m || value > best_value ||
                (value == best_value &&
                 (pool[i].score > pool[best].score ||
                  (pool[i].score == pool[best].score && pool[i].term < pool[best].term)))) {
                best = i;
                best_value = value;
            }
        }
        selected[best] = true;
        out.push_back({pool[best].term, best_value});
        for (std::size_t i = 0; i < m; ++i) {
            if (!selected[i]) {
                penalty[i] = std::max(penalty[i], guarded_cosine(term_vecs[i], term_vecs[best]));
            }
        }
    }
    return out;
}

std::vector<std::string> representative_documents(
    const std::vector<std::string>& topic_doc_ids,
    const std::map<std::string, embed::EmbeddingVector>& doc_vectors, std::size_t n) {
    if (topic_doc_ids.empty()) {
        throw ValidationError("representative_documents: topic must be non-empty");
    }
    const embed::EmbeddingVector& first = doc_vectors.at(topic_doc_ids.front());
    embed::EmbeddingVector centroid;
    centroid.values.assign(first.dim(), 0.0);
    for (const std::string& id : topic_doc_ids) {
        const embed::EmbeddingVector& v = doc_vectors.at(id);
        kernels::add_inplace(centroid.values.data(), v.values.data(), centroid.dim());
    }
    kernels::scale(centroid.values.data(), centroid.dim(),
                   1.0 / static_cast<double>(topic_doc_ids.size()));

    std::vector<std::pair<double, std::string>> ranked;
    ranked.reserve(topic_doc_ids.size());
    for (const std::string& id : topic_doc_ids) {
        ranked.emplace_back(guarded_cosine(doc_vectors.at(id), centroid), id);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    const std::size_t take = std::min(n, ranked.size());
    std::vector<std::string> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) out.push_back(ranked[i].second);
    return out;
}

}  // namespace topicpipe::represent
