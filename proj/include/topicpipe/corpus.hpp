#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace topicpipe::corpus {

/// One short text (a headline). id is unique within its corpus; text is
/// stored whitespace-trimmed and is never empty.
struct Document {
    std::string id;
    std::string text;
    std::optional<std::string> source;
    std::optional<std::string> published_at;  // ISO-8601 date
    std::map<std::string, std::string> metadata;

    bool operator==(const Document&) const = default;
};

struct Corpus {
    std::string name;
    std::vector<Document> documents;

    bool operator==(const Corpus&) const = default;
};

enum class InputFormat { Csv, Jsonl };

struct IngestOptions {
    std::string text_column;
    std::optional<std::string> id_column;
    std::optional<std::string> source_column;
    std::optional<std::string> published_at_column;
    InputFormat format = InputFormat::Csv;
    bool skip_bad_rows = false;
    std::string corpus_name;
};

struct IngestReport {
    std::size_t ingested = 0;  // data rows seen (header excluded)
    std::size_t accepted = 0;
    std::size_t dropped_empty = 0;
    std::size_t skipped_bad = 0;
    std::vector<std::string> messages;  // one per skipped row, with line number
};

struct IngestResult {
    Corpus corpus;
    IngestReport report;
};

/// Reads a CSV (RFC 4180 quoting) or JSONL file into a Corpus. Rows with
/// empty trimmed text are dropped and counted; malformed rows abort with a
/// line-numbered ValidationError unless skip_bad_rows is set. When no id
/// column is given, ids are the zero-padded (6-digit) data-row ordinals.
IngestResult ingest_delimited(const std::string& path, const IngestOptions& options);

struct DedupeReport {
    std::vector<std::string> dropped_ids;
};

/// Collapses documents with byte-identical (trimmed) text to the first
/// occurrence. Idempotent.
std::pair<Corpus, DedupeReport> dedupe_exact(const Corpus& corpus);

/// Canonical corpus serialization: JSONL with keys id, text, source,
/// published_at, metadata in that order; absent optionals are omitted,
/// empty metadata is omitted. Round-trips exactly.
std::string to_canonical_jsonl(const Corpus& corpus);
void save_jsonl(const Corpus& corpus, const std::string& path);
Corpus load_jsonl(const std::string& path, const std::string& name = "");

/// Hex digest of the canonical JSONL bytes; gates run comparisons.
std::string corpus_digest(const Corpus& corpus);

}  // namespace topicpipe::corpus
