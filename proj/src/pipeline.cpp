#include "topicpipe/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "topicpipe/errors.hpp"
#include "topicpipe/kernels.hpp"
#include "topicpipe/stopwords.hpp"
#include "topicpipe/util.hpp"

#ifndef TOPICPIPE_VERSION
#define TOPICPIPE_VERSION "0.0.0"
#endif

namespace topicpipe::pipeline {

using json = nlohmann::ordered_json;

const char* input_mode_name(InputMode mode) {
    return mode == InputMode::Raw ? "raw" : "augmented";
}

InputMode parse_input_mode(const std::string& name) {
    if (name == "raw") return InputMode::Raw;
    if (name == "augmented") return InputMode::Augmented;
    throw ValidationError("unknown input mode: " + name + " (expected raw or augmented)");
}

const char* doc_status_name(DocStatus status) {
    switch (status) {
        case DocStatus::Assigned: return "assigned";
        case DocStatus::Outlier: return "outlier";
        case DocStatus::Excluded: return "excluded";
        case DocStatus::Failed: return "failed";
    }
    return "unknown";
}

namespace {

DocStatus parse_doc_status(const std::string& name) {
    if (name == "assigned") return DocStatus::Assigned;
    if (name == "outlier") return DocStatus::Outlier;
    if (name == "excluded") return DocStatus::Excluded;
    if (name == "failed") return DocStatus::Failed;
    throw ValidationError("unknown document status: " + name);
}

json config_to_json(const RunConfig& config) {
    json obj;
    obj["input_mode"] = input_mode_name(config.input_mode);
    obj["min_topic_size"] = config.min_topic_size;
    obj["ngram_max"] = config.ngram_max;
    obj["top_k_keywords"] = config.top_k_keywords;
    obj["output_dim"] = config.output_dim;
    obj["neighborhood_quantile"] = config.neighborhood_quantile;
    obj["min_core_neighbors"] = config.min_core_neighbors;
    obj["embedder_id"] = config.embedder_id;
    obj["min_term_count"] = config.min_term_count;
    obj["mmr_diversity"] = config.mmr_diversity;
    obj["mmr_pool"] = config.mmr_pool;
    obj["representative_docs"] = config.representative_docs;
    obj["exclusion"] = {{"patterns", config.exclusion.patterns},
                        {"case_sensitive", config.exclusion.case_sensitive}};
    obj["seed"] = config.seed;
    if (config.stopwords.empty()) {
        obj["stopwords"] = std::string("builtin:") + represent::kStopwordListVersion;
    } else {
        obj["stopwords"] = config.stopwords;
    }
    return obj;
}

RunConfig config_from_json(const json& obj) {
    RunConfig config;
    config.input_mode = parse_input_mode(obj.at("input_mode").get<std::string>());
    config.min_topic_size = obj.at("min_topic_size").get<std::size_t>();
    config.ngram_max = obj.at("ngram_max").get<std::size_t>();
    config.top_k_keywords = obj.at("top_k_keywords").get<std::size_t>();
    config.output_dim = obj.at("output_dim").get<std::size_t>();
    config.neighborhood_quantile = obj.at("neighborhood_quantile").get<double>();
    config.min_core_neighbors = obj.at("min_core_neighbors").get<std::size_t>();
    config.embedder_id = obj.at("embedder_id").get<std::string>();
    config.min_term_count = obj.at("min_term_count").get<std::size_t>();
    config.mmr_diversity = obj.at("mmr_diversity").get<double>();
    config.mmr_pool = obj.at("mmr_pool").get<std::size_t>();
    config.representative_docs = obj.at("representative_docs").get<std::size_t>();
    config.exclusion.patterns = obj.at("exclusion").at("patterns").get<std::vector<std::string>>();
    config.exclusion.case_sensitive = obj.at("exclusion").at("case_sensitive").get<bool>();
    config.seed = obj.at("seed").get<int64_t>();
    if (obj.at("stopwords").is_array()) {
        config.stopwords = obj.at("stopwords").get<std::vector<std::string>>();
    }
    return config;
}

struct ModelingDoc {
    std::size_t corpus_index;
    std::string text;
};

}  // namespace

std::string config_digest(const RunConfig& config) {
    return util::hex_digest(config_to_json(config).dump());
}

TopicModelRun fit_topic_model(const corpus::Corpus& corpus,
                              const augment::AugmentationStore* augmentations,
                              const RunConfig& base_config, embed::EmbeddingProvider& provider) {
    if (corpus.documents.empty()) throw ValidationError("fit_topic_model: corpus is empty");
    if (base_config.min_topic_size < 2) {
        throw ValidationError("fit_topic_model: min_topic_size must be >= 2");
    }

    TopicModelRun run;
    run.config = base_config;
    run.config.embedder_id = provider.provider_id();
    run.artifact_version = TOPICPIPE_VERSION;
    run.created_at = util::iso8601_utc_now();
    run.corpus_digest = corpus::corpus_digest(corpus);
    run.kernel_backend = kernels::backend_name(kernels::active_backend());
    run.run_id = util::hex_digest(run.corpus_digest + ":" + config_digest(run.config));

    const std::size_t n = corpus.documents.size();
    run.assignments.resize(n);
    std::vector<ModelingDoc> modeling;
    modeling.reserve(n);

    if (run.config.input_mode == InputMode::Augmented) {
        if (augmentations == nullptr || augmentations->size() == 0) {
            throw ValidationError(
                "fit_topic_model: augmented mode requires a populated augmentation store");
        }
        for (std::size_t i = 0; i < n; ++i) {
            const corpus::Document& doc = corpus.documents[i];
            run.assignments[i].doc_id = doc.id;
            auto aug = augmentations->find_latest(doc.id);
            if (!aug) {
                run.assignments[i].status = DocStatus::Failed;
                continue;
            }
            if (augment::apply_exclusion_rule(aug->response_text, run.config.exclusion)) {
                run.assignments[i].status = DocStatus::Excluded;
                continue;
            }
            modeling.push_back({i, aug->response_text});
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            run.assignments[i].doc_id = corpus.documents[i].id;
            modeling.push_back({i, corpus.documents[i].text});
        }
    }

    std::vector<std::string> texts;
    texts.reserve(modeling.size());
    for (const ModelingDoc& m : modeling) texts.push_back(m.text);

    // embed
    std::vector<embed::EmbeddingVector> vectors = embed::embed_texts(provider, texts);

    // reduce (skipped for small dimensions, tiny corpora, or zero variance)
    std::vector<std::vector<double>> points;
    if (!modeling.empty()) {
        const std::size_t input_dim = provider.dim();
        std::size_t effective_dim = run.config.output_dim;
        bool skip = false;
        std::string skip_reason;
        if (input_dim <= run.config.output_dim) {
            skip = true;
            skip_reason = "input_dim <= output_dim";
        } else if (modeling.size() < 2) {
            skip = true;
            skip_reason = "fewer than 2 documents";
        } else {
            effective_dim = std::min({run.config.output_dim, input_dim, modeling.size() - 1});
            if (effective_dim < 1) {
                skip = true;
                skip_reason = "no usable output dimension";
            }
        }
        if (!skip) {
            try {
                run.reducer = reduce::fit_reducer(vectors, effective_dim);
            } catch (const ValidationError& e) {
                skip = true;
                skip_reason = e.what();
            }
        }
        if (run.reducer) {
            if (effective_dim != run.config.output_dim) {
                run.ledger.warnings.push_back(
                    "reduce: output_dim clamped to " + std::to_string(effective_dim));
            }
            points = reduce::transform(*run.reducer, vectors);
        } else {
            run.ledger.warnings.push_back("reduce: skipped (" + skip_reason + ")");
            points.reserve(vectors.size());
            for (const embed::EmbeddingVector& v : vectors) points.push_back(v.values);
        }
    }

    // cluster
    std::vector<int> labels;
    int cluster_count = 0;
    if (!modeling.empty()) {
        cluster::ClusterParams params;
        params.min_cluster_size = run.config.min_topic_size;
        params.neighborhood_quantile = run.config.neighborhood_quantile;
        params.min_core_neighbors = run.config.min_core_neighbors;
        params.seed = run.config.seed;
        cluster::ClusterAssignment assignment = cluster::density_cluster(points, params);
        labels = std::move(assignment.labels);
        cluster_count = assignment.cluster_count;
        for (std::string& w : assignment.warnings) {
            run.ledger.warnings.push_back("cluster: " + std::move(w));
        }
    } else {
        run.ledger.warnings.push_back("model: no documents to model");
    }

    for (std::size_t m = 0; m < modeling.size(); ++m) {
        DocAssignment& slot = run.assignments[modeling[m].corpus_index];
        slot.label = labels[m];
        slot.status = labels[m] >= 0 ? DocStatus::Assigned : DocStatus::Outlier;
    }
    for (const DocAssignment& a : run.assignments) {
        switch (a.status) {
            case DocStatus::Assigned: ++run.ledger.assigned; break;
            case DocStatus::Outlier: ++run.ledger.outliers; break;
            case DocStatus::Excluded: ++run.ledger.excluded; break;
            case DocStatus::Failed: ++run.ledger.failed; break;
        }
    }

    // represent
    if (cluster_count > 0) {
        std::map<int, std::vector<std::string>> docs_by_topic;
        std::map<int, std::vector<std::string>> ids_by_topic;
        std::map<std::string, embed::EmbeddingVector> doc_vectors;
        for (std::size_t m = 0; m < modeling.size(); ++m) {
            const int label = labels[m];
            if (label < 0) continue;
            const std::string& id = corpus.documents[modeling[m].corpus_index].id;
            docs_by_topic[label].push_back(modeling[m].text);
            ids_by_topic[label].push_back(id);
            doc_vectors[id] = vectors[m];
        }

        represent::VocabularyConfig vocab;
        vocab.ngram_min = 1;
        vocab.ngram_max = run.config.ngram_max;
        vocab.stopwords = run.config.stopwords;
        vocab.min_term_count = run.config.min_term_count;

        represent::ClassTermMatrix matrix;
        try {
            matrix = represent::build_class_term_matrix(docs_by_topic, vocab);
        } catch (const ValidationError& e) {
            throw StageError("represent", e.what());
        }
        const std::vector<std::vector<double>> weights = represent::ctfidf(matrix);

        for (std::size_t c = 0; c < matrix.classes.size(); ++c) {
            const int topic_id = matrix.classes[c];
            TopicSummary summary;
            summary.topic_id = topic_id;
            summary.size = ids_by_topic[topic_id].size();
            std::vector<represent::ScoredTerm> candidates =
                represent::top_candidates(matrix, weights, c, matrix.terms.size());
            if (candidates.empty()) {
                run.ledger.warnings.push_back("represent: topic " + std::to_string(topic_id) +
                                              " has no vocabulary terms");
            } else {
                summary.keywords = represent::keybert_rerank(
                    candidates, docs_by_topic[topic_id], provider, run.config.top_k_keywords,
                    run.config.mmr_diversity, run.config.mmr_pool, &run.ledger.warnings);
            }
            summary.representative_doc_ids = represent::representative_documents(
                ids_by_topic[topic_id], doc_vectors, run.config.representative_docs);
            run.topics.push_back(std::move(summary));
        }
    }

    return run;
}

std::string manifest_json(const TopicModelRun& run) {
    json obj;
    obj["artifact_version"] = run.artifact_version;
    obj["run_id"] = run.run_id;
    obj["created_at"] = run.created_at;
    obj["corpus_digest"] = run.corpus_digest;
    obj["kernel_backend"] = run.kernel_backend;
    obj["config"] = config_to_json(run.config);
    obj["config_digest"] = config_digest(run.config);
    if (run.reducer) {
        obj["reducer"] = json::parse(run.reducer->to_json());
    } else {
        obj["reducer"] = nullptr;
    }
    return obj.dump(2) + "\n";
}

std::string assignments_jsonl(const TopicModelRun& run) {
    std::string out;
    for (const DocAssignment& a : run.assignments) {
        json obj;
        obj["doc_id"] = a.doc_id;
        obj["label"] = a.label;
        obj["status"] = doc_status_name(a.status);
        out += obj.dump();
        out += '\n';
    }
    return out;
}

std::string topics_json(const TopicModelRun& run) {
    json arr = json::array();
    for (const TopicSummary& t : run.topics) {
        json obj;
        obj["topic_id"] = t.topic_id;
        obj["size"] = t.size;
        json kws = json::array();
        for (const represent::ScoredTerm& kw : t.keywords) {
            kws.push_back({{"term", kw.term}, {"score", kw.score}});
        }
        obj["keywords"] = std::move(kws);
        obj["representative_doc_ids"] = t.representative_doc_ids;
        arr.push_back(std::move(obj));
    }
    return arr.dump(2) + "\n";
}

std::string ledger_json(const TopicModelRun& run) {
    json obj;
    obj["assigned"] = run.ledger.assigned;
    obj["outliers"] = run.ledger.outliers;
    obj["excluded"] = run.ledger.excluded;
    obj["failed"] = run.ledger.failed;
    obj["warnings"] = run.ledger.warnings;
    return obj.dump(2) + "\n";
}

void save_run(const TopicModelRun& run, const std::string& dir) {
    std::filesystem::create_directories(dir);
    util::write_file(dir + "/manifest.json", manifest_json(run));
    util::write_file(dir + "/assignments.jsonl", assignments_jsonl(run));
    util::write_file(dir + "/topics.json", topics_json(run));
    util::write_file(dir + "/ledger.json", ledger_json(run));
}

RunConfig config_from_manifest(const std::string& manifest_text) {
    json obj = json::parse(manifest_text);
    return config_from_json(obj.at("config"));
}

TopicModelRun load_run(const std::string& dir) {
    TopicModelRun run;
    json manifest = json::parse(util::read_file(dir + "/manifest.json"));
    run.artifact_version = manifest.at("artifact_version").get<std::string>();
    run.run_id = manifest.at("run_id").get<std::string>();
    run.created_at = manifest.at("created_at").get<std::string>();
    run.corpus_digest = manifest.at("corpus_digest").get<std::string>();
    run.kernel_backend = manifest.at("kernel_backend").get<std::string>();
    run.config = config_from_json(manifest.at("config"));
    if (!manifest.at("reducer").is_null()) {
        run.reducer = reduce::Reducer::from_json(manifest.at("reducer").dump());
    }

    std::istringstream assignments(util::read_file(dir + "/assignments.jsonl"));
    std::string line;
    while (std::getline(assignments, line)) {
        if (util::trim(line).empty()) continue;
        json obj = json::parse(line);
        DocAssignment a;
        a.doc_id = obj.at("doc_id").get<std::string>();
        a.label = obj.at("label").get<int>();
        a.status = parse_doc_status(obj.at("status").get<std::string>());
        run.assignments.push_back(std::move(a));
    }

    json topics = json::parse(util::read_file(dir + "/topics.json"));
    for (const json& obj : topics) {
        TopicSummary t;
        t.topic_id = obj.at("topic_id").get<int>();
        t.size = obj.at("size").get<std::size_t>();
        for (const json& kw : obj.at("keywords")) {
            t.keywords.push_back({kw.at("term").get<std::string>(), kw.at("score").get<double>()});
        }
        t.representative_doc_ids =
            obj.at("representative_doc_ids").get<std::vector<std::string>>();
        run.topics.push_back(std::move(t));
    }

    json ledger = json::parse(util::read_file(dir + "/ledger.json"));
    run.ledger.assigned = ledger.at("assigned").get<std::size_t>();
    run.ledger.outliers = ledger.at("outliers").get<std::size_t>();
    run.ledger.excluded = ledger.at("excluded").get<std::size_t>();
    run.ledger.failed = ledger.at("failed").get<std::size_t>();
    run.ledger.warnings = ledger.at("warnings").get<std::vector<std::string>>();
    return run;
}

RunComparison compare_runs(const TopicModelRun& a, const TopicModelRun& b) {
    if (a.corpus_digest != b.corpus_digest) {
        throw ValidationError("compare_runs: corpus digest mismatch (" + a.corpus_digest +
                              " vs " + b.corpus_digest + ")");
    }
    RunComparison cmp;
    cmp.run_a = a.run_id;
    cmp.run_b = b.run_id;
    cmp.corpus_digest = a.corpus_digest;
    cmp.corpus_size = a.assignments.size();
    cmp.topics_a = a.topics.size();
    cmp.topics_b = b.topics.size();
    cmp.ledger_a = a.ledger;
    cmp.ledger_b = b.ledger;
    cmp.coverage_a = cmp.corpus_size == 0
                         ? 0.0
                         : static_cast<double>(a.ledger.assigned) / static_cast<double>(cmp.corpus_size);
    cmp.coverage_b = cmp.corpus_size == 0
                         ? 0.0
                         : static_cast<double>(b.ledger.assigned) / static_cast<double>(cmp.corpus_size);
    for (const TopicSummary& t : a.topics) cmp.sizes_a.push_back(t.size);
    for (const TopicSummary& t : b.topics) cmp.sizes_b.push_back(t.size);

    auto keyword_terms = [](const TopicSummary& t) {
        std::vector<std::string> terms;
        terms.reserve(t.keywords.size());
        for (const represent::ScoredTerm& kw : t.keywords) terms.push_back(kw.term);
        return terms;
    };
    for (const TopicSummary& t : a.topics) cmp.keywords_a.push_back(keyword_terms(t));
    for (const TopicSummary& t : b.topics) cmp.keywords_b.push_back(keyword_terms(t));

    cmp.jaccard.assign(cmp.topics_a, std::vector<double>(cmp.topics_b, 0.0));
    for (std::size_t i = 0; i < cmp.topics_a; ++i) {
        const std::set<std::string> set_a(cmp.keywords_a[i].begin(), cmp.keywords_a[i].end());
        for (std::size_t j = 0; j < cmp.topics_b; ++j) {
            const std::set<std::string> set_b(cmp.keywords_b[j].begin(), cmp.keywords_b[j].end());
            std::size_t intersection = 0;
            for (const std::string& term : set_a) intersection += set_b.count(term);
            const std::size_t unioned = set_a.size() + set_b.size() - intersection;
            cmp.jaccard[i][j] = unioned == 0 ? 0.0
                                             : static_cast<double>(intersection) /
                                                   static_cast<double>(unioned);
        }
    }
    return cmp;
}

namespace {

json ledger_to_json(const RunLedger& ledger) {
    return json{{"assigned", ledger.assigned},
                {"outliers", ledger.outliers},
                {"excluded", ledger.excluded},
                {"failed", ledger.failed}};
}

RunLedger ledger_from_json(const json& obj) {
    RunLedger ledger;
    ledger.assigned = obj.at("assigned").get<std::size_t>();
    ledger.outliers = obj.at("outliers").get<std::size_t>();
    ledger.excluded = obj.at("excluded").get<std::size_t>();
    ledger.failed = obj.at("failed").get<std::size_t>();
    return ledger;
}

}  // namespace

std::string comparison_json(const RunComparison& cmp) {
    json obj;
    obj["run_a"] = cmp.run_a;
    obj["run_b"] = cmp.run_b;
    obj["corpus_digest"] = cmp.corpus_digest;
    obj["corpus_size"] = cmp.corpus_size;
    obj["topics_a"] = cmp.topics_a;
    obj["topics_b"] = cmp.topics_b;
    obj["ledger_a"] = ledger_to_json(cmp.ledger_a);
    obj["ledger_b"] = ledger_to_json(cmp.ledger_b);
    obj["coverage_a"] = cmp.coverage_a;
    obj["coverage_b"] = cmp.coverage_b;
    obj["sizes_a"] = cmp.sizes_a;
    obj["sizes_b"] = cmp.sizes_b;
    obj["keywords_a"] = cmp.keywords_a;
    obj["keywords_b"] = cmp.keywords_b;
    obj["jaccard"] = cmp.jaccard;
    return obj.dump(2) + "\n";
}

RunComparison comparison_from_json(const std::string& text) {
    json obj = json::parse(text);
    RunComparison cmp;
    cmp.run_a = obj.at("run_a").get<std::string>();
    cmp.run_b = obj.at("run_b").get<std::string>();
    cmp.corpus_digest = obj.at("corpus_digest").get<std::string>();
    cmp.corpus_size = obj.at("corpus_size").get<std::size_t>();
    cmp.topics_a = obj.at("topics_a").get<std::size_t>();
    cmp.topics_b = obj.at("topics_b").get<std::size_t>();
    cmp.ledger_a = ledger_from_json(obj.at("ledger_a"));
    cmp.ledger_b = ledger_from_json(obj.at("ledger_b"));
    cmp.coverage_a = obj.at("coverage_a").get<double>();
    cmp.coverage_b = obj.at("coverage_b").get<double>();
    cmp.sizes_a = obj.at("sizes_a").get<std::vector<std::size_t>>();
    cmp.sizes_b = obj.at("sizes_b").get<std::vector<std::size_t>>();
    cmp.keywords_a = obj.at("keywords_a").get<std::vector<std::vector<std::string>>>();
    cmp.keywords_b = obj.at("keywords_b").get<std::vector<std::vector<std::string>>>();
    cmp.jaccard = obj.at("jaccard").get<std::vector<std::vector<double>>>();
    return cmp;
}

}  // namespace topicpipe::pipeline
