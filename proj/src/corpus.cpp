#include "topicpipe/corpus.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "topicpipe/errors.hpp"
#include "topicpipe/util.hpp"

namespace topicpipe::corpus {

using json = nlohmann::ordered_json;

namespace {

// RFC 4180 reader: quoted fields may contain commas, escaped quotes ("")
// and embedded line breaks. Returns records of raw fields and reports the
// 1-based line each record started on.
struct CsvRecord {
    std::vector<std::string> fields;
    int line;
};

std::vector<CsvRecord> parse_csv(const std::string& text, const std::string& origin) {
    std::vector<CsvRecord> records;
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;
    int line = 1;
    int record_start_line = 1;
    std::size_t i = 0;

    auto end_field = [&]() {
        fields.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
    };
    auto end_record = [&]() {
        end_field();
        records.push_back({std::move(fields), record_start_line});
        fields.clear();
        record_start_line = line;
    };

    while (i < text.size()) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    i += 2;
                    continue;
                }
                in_quotes = false;
                ++i;
                continue;
            }
            if (c == '\n') ++line;
            field.push_back(c);
            ++i;
            continue;
        }
        switch (c) {
            case '"':
                if (!field.empty() || field_was_quoted) {
                    throw ValidationError(origin + ":" + std::to_string(line) +
                                          ": stray quote inside unquoted field");
                }
                in_quotes = true;
                field_was_quoted = true;
                ++i;
                break;
            case ',':
                end_field();
                ++i;
                break;
            case '\r':
                if (i + 1 < text.size() && text[i + 1] == '\n') {
                    ++line;
                    end_record();
                    record_start_line = line;
                    i += 2;
                } else {
                    field.push_back(c);
                    ++i;
                }
                break;
            case '\n':
                ++line;
                end_record();
                record_start_line = line;
                ++i;
                break;
            default:
                field.push_back(c);
                ++i;
                break;
        }
    }
    if (in_quotes) {
        throw ValidationError(origin + ":" + std::to_string(record_start_line) +
                              ": unterminated quoted field");
    }
    if (!field.empty() || !fields.empty() || field_was_quoted) {
        end_record();
    }
    return records;
}

std::string padded_ordinal(std::size_t row) {
    std::string digits = std::to_string(row);
    if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
    return digits;
}

struct RowSink {
    const IngestOptions& options;
    IngestResult& result;
    std::unordered_set<std::string> seen_ids;

    // Returns false when the row was dropped/skipped (already counted).
    void accept(Document doc, int line, const std::string& origin) {
        std::string trimmed(util::trim(doc.text));
        if (trimmed.empty()) {
            ++result.report.dropped_empty;
            return;
        }
        doc.text = std::move(trimmed);
        if (!seen_ids.insert(doc.id).second) {
            throw ValidationError(origin + ":" + std::to_string(line) + ": duplicate id \"" +
                                  doc.id + "\"");
        }
        result.corpus.documents.push_back(std::move(doc));
        ++result.report.accepted;
    }

    void bad_row(const std::string& origin, int line, const std::string& why) {
        if (!options.skip_bad_rows) {
            throw ValidationError(origin + ":" + std::to_string(line) + ": " + why);
        }
        ++result.report.skipped_bad;
        result.report.messages.push_back(origin + ":" + std::to_string(line) + ": " + why);
    }
};

void ingest_csv(const std::string& text, const std::string& origin, const IngestOptions& options,
                IngestResult& result) {
    std::vector<CsvRecord> records = parse_csv(text, origin);
    if (records.empty()) {
        throw ValidationError(origin + ": empty file (missing header row)");
    }
    const std::vector<std::string>& header = records.front().fields;
    auto column_index = [&](const std::string& name) -> std::size_t {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        throw ValidationError(origin + ": column \"" + name + "\" not found in header");
    };

    const std::size_t text_idx = column_index(options.text_column);
    std::optional<std::size_t> id_idx, source_idx, date_idx;
    if (options.id_column) id_idx = column_index(*options.id_column);
    if (options.source_column) source_idx = column_index(*options.source_column);
    if (options.published_at_column) date_idx = column_index(*options.published_at_column);

    RowSink sink{options, result, {}};
    for (std::size_t r = 1; r < records.size(); ++r) {
        const CsvRecord& rec = records[r];
        ++result.report.ingested;
        if (rec.fields.size() != header.size()) {
            sink.bad_row(origin, rec.line,
                         "expected " + std::to_string(header.size()) + " fields, got " +
                             std::to_string(rec.fields.size()));
            continue;
        }
        Document doc;
        doc.id = id_idx ? rec.fields[*id_idx] : padded_ordinal(result.report.ingested - 1);
        doc.text = rec.fields[text_idx];
        if (source_idx && !rec.fields[*source_idx].empty()) doc.source = rec.fields[*source_idx];
        if (date_idx && !rec.fields[*date_idx].empty()) doc.published_at = rec.fields[*date_idx];
        if (id_idx && doc.id.empty()) {
            sink.bad_row(origin, rec.line, "empty id");
            continue;
        }
        sink.accept(std::move(doc), rec.line, origin);
    }
}

void ingest_jsonl(const std::string& text, const std::string& origin,
                  const IngestOptions& options, IngestResult& result) {
    RowSink sink{options, result, {}};
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (util::trim(line).empty()) continue;
        ++result.report.ingested;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            sink.bad_row(origin, line_no, std::string("invalid JSON: ") + e.what());
            continue;
        }
        if (!obj.is_object()) {
            sink.bad_row(origin, line_no, "line is not a JSON object");
            continue;
        }
        if (!obj.contains(options.text_column) || !obj[options.text_column].is_string()) {
            sink.bad_row(origin, line_no,
                         "missing string key \"" + options.text_column + "\"");
            continue;
        }
        Document doc;
        doc.text = obj[options.text_column].get<std::string>();
        if (options.id_column) {
            if (!obj.contains(*options.id_column)) {
                sink.bad_row(origin, line_no, "missing id key \"" + *options.id_column + "\"");
                continue;
            }
            const json& idv = obj[*options.id_column];
            doc.id = idv.is_string() ? idv.get<std::string>() : idv.dump();
            if (doc.id.empty()) {
                sink.bad_row(origin, line_no, "empty id");
                continue;
            }
        } else {
            doc.id = padded_ordinal(result.report.ingested - 1);
        }
        auto pick = [&](const std::optional<std::string>& key, std::optional<std::string>& out) {
            if (key && obj.contains(*key) && obj[*key].is_string()) {
                std::string v = obj[*key].get<std::string>();
                if (!v.empty()) out = std::move(v);
            }
        };
        pick(options.source_column, doc.source);
        pick(options.published_at_column, doc.published_at);
        if (obj.contains("metadata") && obj["metadata"].is_object()) {
            for (const auto& [k, v] : obj["metadata"].items()) {
                if (v.is_string()) doc.metadata[k] = v.get<std::string>();
            }
        }
        sink.accept(std::move(doc), line_no, origin);
    }
}

}  // namespace

IngestResult ingest_delimited(const std::string& path, const IngestOptions& options) {
    if (options.text_column.empty()) {
        throw ValidationError("text column name must not be empty");
    }
    std::string text = util::read_file(path);
    IngestResult result;
    result.corpus.name = options.corpus_name.empty() ? path : options.corpus_name;
    if (options.format == InputFormat::Csv) {
        ingest_csv(text, path, options, result);
    } else {
        ingest_jsonl(text, path, options, result);
    }
    return result;
}

std::pair<Corpus, DedupeReport> dedupe_exact(const Corpus& corpus) {
    Corpus out;
    out.name = corpus.name;
    DedupeReport report;
    std::unordered_set<std::string> seen_texts;
    for (const Document& doc : corpus.documents) {
        if (seen_texts.insert(doc.text).second) {
            out.documents.push_back(doc);
        } else {
            report.dropped_ids.push_back(doc.id);
        }
    }
    return {std::move(out), std::move(report)};
}

std::string to_canonical_jsonl(const Corpus& corpus) {
    std::string out;
    for (const Document& doc : corpus.documents) {
        json obj;
        obj["id"] = doc.id;
        obj["text"] = doc.text;
        if (doc.source) obj["source"] = *doc.source;
        if (doc.published_at) obj["published_at"] = *doc.published_at;
        if (!doc.metadata.empty()) obj["metadata"] = doc.metadata;
        out += obj.dump();
        out += '\n';
    }
    return out;
}

void save_jsonl(const Corpus& corpus, const std::string& path) {
    util::write_file(path, to_canonical_jsonl(corpus));
}

Corpus load_jsonl(const std::string& path, const std::string& name) {
    std::string text = util::read_file(path);
    Corpus corpus;
    corpus.name = name.empty() ? path : name;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    std::unordered_set<std::string> seen_ids;
    while (std::getline(in, line)) {
        ++line_no;
        if (util::trim(line).empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ValidationError(path + ":" + std::to_string(line_no) + ": invalid JSON: " +
                                  e.what());
        }
        Document doc;
        if (!obj.contains("id") || !obj.contains("text")) {
            throw ValidationError(path + ":" + std::to_string(line_no) +
                                  ": corpus record needs id and text");
        }
        doc.id = obj["id"].get<std::string>();
        doc.text = obj["text"].get<std::string>();
        if (doc.id.empty() || util::trim(doc.text).empty()) {
            throw ValidationError(path + ":" + std::to_string(line_no) +
                                  ": empty id or text in corpus record");
        }
        if (!seen_ids.insert(doc.id).second) {
            throw ValidationError(path + ":" + std::to_string(line_no) + ": duplicate id \"" +
                                  doc.id + "\"");
        }
        if (obj.contains("source")) doc.source = obj["source"].get<std::string>();
        if (obj.contains("published_at")) doc.published_at = obj["published_at"].get<std::string>();
        if (obj.contains("metadata")) {
            for (const auto& [k, v] : obj["metadata"].items()) {
                doc.metadata[k] = v.get<std::string>();
            }
        }
        corpus.documents.push_back(std::move(doc));
    }
    return corpus;
}

std::string corpus_digest(const Corpus& corpus) {
    return util::hex_digest(to_canonical_jsonl(corpus));
}

}  // namespace topicpipe::corpus
