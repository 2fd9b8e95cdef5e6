// topicpipe: ingest -> augment -> model -> compare -> report for short-text
// topic modeling over LLM descriptors.

#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "topicpipe/augment.hpp"
#include "topicpipe/corpus.hpp"
#include "topicpipe/embed.hpp"
#include "topicpipe/errors.hpp"
#include "topicpipe/pipeline.hpp"
#include "topicpipe/report.hpp"
#include "topicpipe/stopwords.hpp"
#include "topicpipe/util.hpp"

namespace {

using namespace topicpipe;
using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitUnexpected = 1;
constexpr int kExitValidation = 2;
constexpr int kExitExternalService = 3;
constexpr int kExitModeling = 4;

struct IngestArgs {
    std::string input;
    std::string format = "auto";
    std::string text_column;
    std::string id_column;
    std::string source_column;
    std::string published_at_column;
    std::string output = "corpus.jsonl";
    std::string name;
    std::string report_path;
    bool dedupe = false;
    bool skip_bad_rows = false;
};

struct ClientArgs {
    std::string client = "mock";
    std::string mock_rules;
    std::string model_id = "gpt-4";
    std::string endpoint;
    std::string api_path = "/v1/chat/completions";
    std::string credential_env = "OPENAI_API_KEY";
    int timeout_ms = 30000;
    int max_attempts = 4;
    int base_delay_ms = 250;
    int max_delay_ms = 8000;
};

struct AugmentArgs {
    std::string corpus_path;
    std::string store_path = "augmentations.jsonl";
    std::string prompt_file;
    std::string placeholder = "{headline}";
    double temperature = 0.0;
    int max_tokens = 256;
    std::size_t max_in_flight = 1;
    std::vector<std::string> exclusion_patterns;
    bool exclusion_case_sensitive = false;
    ClientArgs client;
};

struct EmbedderArgs {
    std::string embedder = "hashing";
    std::size_t embed_dim = 256;
    std::string endpoint;
    std::string api_path = "/v1/embeddings";
    std::string model_id = "text-embedding-3-small";
    std::string credential_env = "OPENAI_API_KEY";
    std::size_t batch_size = 64;
    int timeout_ms = 30000;
    std::string cache_path;
};

struct ModelArgs {
    std::string corpus_path;
    std::string mode = "raw";
    std::string store_path;
    std::string out_dir = "run";
    std::size_t min_topic_size = 0;  // 0 = per-mode default (100 augmented, 90 raw)
    std::size_t ngram_max = 2;
    std::size_t top_k = 10;
    std::size_t output_dim = 5;
    double quantile = 0.9;
    std::size_t min_core_neighbors = 5;
    std::optional<int64_t> seed;
    std::size_t min_term_count = 2;
    double diversity = 0.3;
    std::size_t mmr_pool = 30;
    std::size_t representative_docs = 3;
    std::string stopwords_file;
    std::vector<std::string> exclusion_patterns;
    bool exclusion_case_sensitive = false;
    EmbedderArgs embedder;
};

struct CompareArgs {
    std::string run_a;
    std::string run_b;
    std::string out = "comparison.json";
};

struct ReportArgs {
    std::string run_dir;
    std::string comparison_path;
    std::string labels_path;
    std::string format = "markdown";
    std::string out;
};

corpus::InputFormat resolve_format(const std::string& format, const std::string& path) {
    if (format == "csv") return corpus::InputFormat::Csv;
    if (format == "jsonl") return corpus::InputFormat::Jsonl;
    if (format == "auto") {
        const auto ext = std::filesystem::path(path).extension().string();
        if (ext == ".csv") return corpus::InputFormat::Csv;
        if (ext == ".jsonl" || ext == ".ndjson" || ext == ".json") {
            return corpus::InputFormat::Jsonl;
        }
        throw ValidationError("cannot infer format from extension \"" + ext +
                              "\"; pass --format csv|jsonl");
    }
    throw ValidationError("unknown format: " + format);
}

int cmd_ingest(const IngestArgs& args) {
    corpus::IngestOptions options;
    options.text_column = args.text_column;
    if (!args.id_column.empty()) options.id_column = args.id_column;
    if (!args.source_column.empty()) options.source_column = args.source_column;
    if (!args.published_at_column.empty()) options.published_at_column = args.published_at_column;
    options.format = resolve_format(args.format, args.input);
    options.skip_bad_rows = args.skip_bad_rows;
    options.corpus_name = args.name;

    auto result = corpus::ingest_delimited(args.input, options);

    json report;
    report["input"] = args.input;
    report["ingested"] = result.report.ingested;
    report["accepted"] = result.report.accepted;
    report["dropped_empty"] = result.report.dropped_empty;
    report["skipped_bad"] = result.report.skipped_bad;
    report["messages"] = result.report.messages;

    corpus::Corpus final_corpus = std::move(result.corpus);
    if (args.dedupe) {
        auto [deduped, dedupe_report] = corpus::dedupe_exact(final_corpus);
        report["dedupe_dropped"] = dedupe_report.dropped_ids.size();
        report["dedupe_dropped_ids"] = dedupe_report.dropped_ids;
        final_corpus = std::move(deduped);
    }
    corpus::save_jsonl(final_corpus, args.output);
    report["documents_written"] = final_corpus.documents.size();
    report["corpus_digest"] = corpus::corpus_digest(final_corpus);

    if (!args.report_path.empty()) {
        util::write_file(args.report_path, report.dump(2) + "\n");
    }
    std::cout << "ingest: " << report["accepted"] << " accepted, " << report["dropped_empty"]
              << " dropped empty, " << report["skipped_bad"] << " skipped";
    if (args.dedupe) std::cout << ", " << report["dedupe_dropped"] << " deduped";
    std::cout << "; wrote " << final_corpus.documents.size() << " documents to " << args.output
              << "\n";
    return kExitOk;
}

augment::PromptTemplate load_template(const AugmentArgs& args) {
    if (args.prompt_file.empty()) return augment::default_prompt_template();
    augment::PromptTemplate tpl =
        augment::make_prompt_template(util::read_file(args.prompt_file), args.placeholder);
    if (tpl.instruction.find(tpl.placeholder) == std::string::npos) {
        throw ValidationError("prompt file " + args.prompt_file + " does not contain the \"" +
                              tpl.placeholder + "\" placeholder");
    }
    return tpl;
}

std::unique_ptr<augment::LLMClient> build_client(const ClientArgs& args) {
    if (args.client == "mock") {
        if (args.mock_rules.empty()) {
            throw ValidationError("--client mock requires --mock-rules");
        }
        return augment::MockLLMClient::from_rules_file(args.mock_rules, args.model_id);
    }
    if (args.client == "http") {
        if (args.endpoint.empty()) throw ValidationError("--client http requires --endpoint");
        augment::HttpClientConfig config;
        config.endpoint = args.endpoint;
        config.path = args.api_path;
        config.model_id = args.model_id;
        config.credential_env = args.credential_env;
        config.timeout_ms = args.timeout_ms;
        config.retry.max_attempts = args.max_attempts;
        config.retry.base_delay_ms = args.base_delay_ms;
        config.retry.max_delay_ms = args.max_delay_ms;
        return augment::make_http_client(config);
    }
    throw ValidationError("unknown client: " + args.client + " (expected mock or http)");
}

int cmd_augment(const AugmentArgs& args) {
    corpus::Corpus c = corpus::load_jsonl(args.corpus_path);
    augment::PromptTemplate tpl = load_template(args);
    auto client = build_client(args.client);
    augment::AugmentationStore store(args.store_path);

    augment::AugmentOptions options;
    options.decoding.temperature = args.temperature;
    options.decoding.max_tokens = args.max_tokens;
    options.max_in_flight = args.max_in_flight;
    if (!args.exclusion_patterns.empty()) options.rule.patterns = args.exclusion_patterns;
    options.rule.case_sensitive = args.exclusion_case_sensitive;

    auto result = augment::augment_corpus(c, tpl, *client, store, options);

    if (!result.failures.empty()) {
        std::string failures_path = args.store_path + ".failures.jsonl";
        std::string lines;
        for (const auto& f : result.failures) {
            json obj;
            obj["doc_id"] = f.doc_id;
            obj["reason"] = f.reason;
            lines += obj.dump() + "\n";
        }
        util::write_file(failures_path, lines);
        std::cout << "failures written to " << failures_path << "\n";
    }
    std::cout << "augment: " << result.client_calls << " requests issued, " << result.cache_hits
              << " cache hits, " << result.failures.size() << " failures; store " << args.store_path
              << " holds " << store.size() << " augmentations\n";
    return kExitOk;
}

std::unique_ptr<embed::EmbeddingProvider> build_provider(const EmbedderArgs& args) {
    if (args.embedder == "hashing") {
        return embed::make_hashing_provider(args.embed_dim);
    }
    if (args.embedder == "remote") {
        if (args.endpoint.empty()) throw ValidationError("--embedder remote requires --embed-endpoint");
        embed::RemoteEmbedderConfig config;
        config.endpoint = args.endpoint;
        config.path = args.api_path;
        config.model_id = args.model_id;
        config.credential_env = args.credential_env;
        config.dim = args.embed_dim;
        config.batch_size = args.batch_size;
        config.timeout_ms = args.timeout_ms;
        config.cache_path = args.cache_path;
        return embed::make_remote_provider(config);
    }
    throw ValidationError("unknown embedder: " + args.embedder + " (expected hashing or remote)");
}

int cmd_model(const ModelArgs& args) {
    corpus::Corpus c = corpus::load_jsonl(args.corpus_path);

    pipeline::RunConfig config;
    config.input_mode = pipeline::parse_input_mode(args.mode);
    config.min_topic_size =
        args.min_topic_size != 0
            ? args.min_topic_size
            : (config.input_mode == pipeline::InputMode::Augmented ? 100 : 90);
    config.ngram_max = args.ngram_max;
    config.top_k_keywords = args.top_k;
    config.output_dim = args.output_dim;
    config.neighborhood_quantile = args.quantile;
    config.min_core_neighbors = args.min_core_neighbors;
    config.min_term_count = args.min_term_count;
    config.mmr_diversity = args.diversity;
    config.mmr_pool = args.mmr_pool;
    config.representative_docs = args.representative_docs;
    if (!args.exclusion_patterns.empty()) config.exclusion.patterns = args.exclusion_patterns;
    config.exclusion.case_sensitive = args.exclusion_case_sensitive;
    if (!args.stopwords_file.empty()) {
        config.stopwords = represent::load_stopword_file(args.stopwords_file);
    }
    if (args.seed) {
        config.seed = *args.seed;
    } else {
        // Drawn once and recorded in the manifest so the run stays replayable.
        config.seed = static_cast<int64_t>(std::random_device{}()) << 32 |
                      static_cast<int64_t>(std::random_device{}());
    }

    std::optional<augment::AugmentationStore> store;
    if (config.input_mode == pipeline::InputMode::Augmented) {
        if (args.store_path.empty()) {
            throw ValidationError("--mode augmented requires --store");
        }
        store.emplace(args.store_path);
    }

    auto provider = build_provider(args.embedder);
    auto run = pipeline::fit_topic_model(c, store ? &*store : nullptr, config, *provider);
    pipeline::save_run(run, args.out_dir);

    std::cout << "run " << run.run_id << " written to " << args.out_dir << "\n";
    std::cout << report::render_topic_table(run, nullptr, report::ReportFormat::Markdown);
    for (const std::string& warning : run.ledger.warnings) {
        std::cout << "note: " << warning << "\n";
    }
    return kExitOk;
}

int cmd_compare(const CompareArgs& args) {
    auto run_a = pipeline::load_run(args.run_a);
    auto run_b = pipeline::load_run(args.run_b);
    auto cmp = pipeline::compare_runs(run_a, run_b);
    util::write_file(args.out, pipeline::comparison_json(cmp));

    const std::string rendered = report::render_comparison(cmp, report::ReportFormat::Markdown);
    std::string report_path = args.out;
    const std::string suffix = ".json";
    if (report_path.size() > suffix.size() &&
        report_path.compare(report_path.size() - suffix.size(), suffix.size(), suffix) == 0) {
        report_path.resize(report_path.size() - suffix.size());
    }
    report_path += ".md";
    util::write_file(report_path, rendered);

    std::cout << rendered;
    std::cout << "comparison written to " << args.out << " and " << report_path << "\n";
    return kExitOk;
}

int cmd_report(const ReportArgs& args) {
    if (args.run_dir.empty() == args.comparison_path.empty()) {
        throw ValidationError("pass exactly one of --run or --comparison");
    }
    const report::ReportFormat format = report::parse_report_format(args.format);

    std::string rendered;
    if (!args.run_dir.empty()) {
        auto run = pipeline::load_run(args.run_dir);
        std::optional<report::LabelMap> labels;
        if (!args.labels_path.empty()) {
            labels = report::LabelMap::load(args.labels_path);
        }
        rendered = report::render_topic_table(run, labels ? &*labels : nullptr, format);
    } else {
        auto cmp = pipeline::comparison_from_json(util::read_file(args.comparison_path));
        rendered = report::render_comparison(cmp, format);
    }

    if (args.out.empty()) {
        std::cout << rendered;
    } else {
        util::write_file(args.out, rendered);
        std::cout << "report written to " << args.out << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Short-text topic modeling over LLM-generated descriptors"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from an INI/TOML file (sections per subcommand)");

    IngestArgs ingest_args;
    CLI::App* ingest = app.add_subcommand("ingest", "Read a CSV/JSONL file into a corpus");
    ingest->add_option("--input", ingest_args.input, "Input CSV or JSONL file")->required();
    ingest->add_option("--format", ingest_args.format, "csv|jsonl|auto (default: by extension)");
    ingest->add_option("--text-column", ingest_args.text_column, "Column/key holding the text")
        ->required();
    ingest->add_option("--id-column", ingest_args.id_column,
                       "Column/key holding stable ids (default: row ordinals)");
    ingest->add_option("--source-column", ingest_args.source_column, "Optional source column");
    ingest->add_option("--published-at-column", ingest_args.published_at_column,
                       "Optional ISO-8601 date column");
    ingest->add_option("--output", ingest_args.output, "Canonical corpus JSONL path");
    ingest->add_option("--name", ingest_args.name, "Corpus name (default: input path)");
    ingest->add_option("--report", ingest_args.report_path, "Write the ingest report JSON here");
    ingest->add_flag("--dedupe", ingest_args.dedupe, "Collapse byte-identical texts");
    ingest->add_flag("--skip-bad-rows", ingest_args.skip_bad_rows,
                     "Count malformed rows instead of aborting");

    AugmentArgs augment_args;
    CLI::App* augment_cmd =
        app.add_subcommand("augment", "Generate one LLM descriptor per document");
    augment_cmd->add_option("--corpus", augment_args.corpus_path, "Corpus JSONL")->required();
    augment_cmd->add_option("--store", augment_args.store_path,
                            "Augmentation store (JSONL, append-only cache)");
    augment_cmd->add_option("--prompt-file", augment_args.prompt_file,
                            "Instruction file containing the placeholder (default: built-in "
                            "primary-actor prompt)");
    augment_cmd->add_option("--placeholder", augment_args.placeholder, "Placeholder token");
    augment_cmd->add_option("--client", augment_args.client.client, "mock|http")
        ->envname("TOPICPIPE_CLIENT");
    augment_cmd->add_option("--mock-rules", augment_args.client.mock_rules,
                            "Mock client rules file (pattern = \"response\")");
    augment_cmd->add_option("--model-id", augment_args.client.model_id, "Model identifier")
        ->envname("TOPICPIPE_MODEL_ID");
    augment_cmd->add_option("--endpoint", augment_args.client.endpoint, "API base URL")
        ->envname("TOPICPIPE_ENDPOINT");
    augment_cmd->add_option("--api-path", augment_args.client.api_path, "API request path");
    augment_cmd
        ->add_option("--credential-env", augment_args.client.credential_env,
                     "Name of the env var holding the API key")
        ->envname("TOPICPIPE_CREDENTIAL_ENV");
    augment_cmd->add_option("--timeout-ms", augment_args.client.timeout_ms, "Request timeout");
    augment_cmd->add_option("--max-attempts", augment_args.client.max_attempts,
                            "Retry attempt limit");
    augment_cmd->add_option("--base-delay-ms", augment_args.client.base_delay_ms,
                            "Backoff base delay");
    augment_cmd->add_option("--max-delay-ms", augment_args.client.max_delay_ms,
                            "Backoff delay cap");
    augment_cmd->add_option("--temperature", augment_args.temperature, "Decoding temperature");
    augment_cmd->add_option("--max-tokens", augment_args.max_tokens, "Response token cap");
    augment_cmd
        ->add_option("--max-in-flight", augment_args.max_in_flight,
                     "Concurrent request bound")
        ->envname("TOPICPIPE_MAX_IN_FLIGHT");
    augment_cmd->add_option("--exclusion-pattern", augment_args.exclusion_patterns,
                            "Exclusion substring (repeatable; default: the no-actor phrases)");
    augment_cmd->add_flag("--exclusion-case-sensitive", augment_args.exclusion_case_sensitive,
                          "Match exclusion patterns case-sensitively");

    ModelArgs model_args;
    CLI::App* model = app.add_subcommand("model", "Fit the topic model and write a run directory");
    model->add_option("--corpus", model_args.corpus_path, "Corpus JSONL")->required();
    model->add_option("--mode", model_args.mode, "raw|augmented");
    model->add_option("--store", model_args.store_path, "Augmentation store (augmented mode)");
    model->add_option("--out", model_args.out_dir, "Run output directory");
    model->add_option("--min-topic-size", model_args.min_topic_size,
                      "Minimum topic size (default: 100 augmented, 90 raw)");
    model->add_option("--ngram-max", model_args.ngram_max, "Largest n-gram length");
    model->add_option("--top-k", model_args.top_k, "Keywords per topic");
    model->add_option("--output-dim", model_args.output_dim, "Reducer output dimension");
    model->add_option("--quantile", model_args.quantile, "Neighborhood distance quantile");
    model->add_option("--min-core-neighbors", model_args.min_core_neighbors,
                      "Neighbors required for a core point");
    model->add_option("--seed", model_args.seed,
                      "Run seed (default: drawn once and recorded in the manifest)");
    model->add_option("--min-term-count", model_args.min_term_count,
                      "Minimum total term occurrences");
    model->add_option("--diversity", model_args.diversity, "MMR diversity in [0,1]");
    model->add_option("--mmr-pool", model_args.mmr_pool, "Candidate pool for re-ranking");
    model->add_option("--representative-docs", model_args.representative_docs,
                      "Representative documents per topic");
    model->add_option("--stopwords", model_args.stopwords_file,
                      "Stopword override file (one term per line)");
    model->add_option("--exclusion-pattern", model_args.exclusion_patterns,
                      "Exclusion substring (repeatable)");
    model->add_flag("--exclusion-case-sensitive", model_args.exclusion_case_sensitive,
                    "Match exclusion patterns case-sensitively");
    model->add_option("--embedder", model_args.embedder.embedder, "hashing|remote");
    model->add_option("--embed-dim", model_args.embedder.embed_dim, "Embedding dimension");
    model->add_option("--embed-endpoint", model_args.embedder.endpoint, "Embedding API base URL");
    model->add_option("--embed-api-path", model_args.embedder.api_path, "Embedding API path");
    model->add_option("--embed-model", model_args.embedder.model_id, "Embedding model id");
    model->add_option("--embed-credential-env", model_args.embedder.credential_env,
                      "Env var holding the embedding API key");
    model->add_option("--embed-batch-size", model_args.embedder.batch_size,
                      "Embedding request batch size");
    model->add_option("--embed-timeout-ms", model_args.embedder.timeout_ms,
                      "Embedding request timeout");
    model->add_option("--embed-cache", model_args.embedder.cache_path,
                      "Embedding cache JSONL path");

    CompareArgs compare_args;
    CLI::App* compare = app.add_subcommand("compare", "Compare two runs over the same corpus");
    compare->add_option("--run-a", compare_args.run_a, "First run directory")->required();
    compare->add_option("--run-b", compare_args.run_b, "Second run directory")->required();
    compare->add_option("--out", compare_args.out, "comparison.json output path");

    ReportArgs report_args;
    CLI::App* report_cmd = app.add_subcommand("report", "Render topic or comparison tables");
    report_cmd->add_option("--run", report_args.run_dir, "Run directory to render");
    report_cmd->add_option("--comparison", report_args.comparison_path,
                           "comparison.json to render");
    report_cmd->add_option("--labels", report_args.labels_path,
                           "Label map file (topic_id = \"label\")");
    report_cmd->add_option("--format", report_args.format, "markdown|csv");
    report_cmd->add_option("--out", report_args.out, "Output file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (ingest->parsed()) return cmd_ingest(ingest_args);
        if (augment_cmd->parsed()) return cmd_augment(augment_args);
        if (model->parsed()) return cmd_model(model_args);
        if (compare->parsed()) return cmd_compare(compare_args);
        if (report_cmd->parsed()) return cmd_report(report_args);
        std::cerr << "error: no subcommand\n";
        return kExitValidation;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const ClientError& e) {
        std::cerr << "client error: " << e.what() << "\n";
        return kExitExternalService;
    } catch (const StageError& e) {
        std::cerr << "stage error: " << e.what() << "\n";
        return kExitModeling;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return kExitUnexpected;
    }
}
