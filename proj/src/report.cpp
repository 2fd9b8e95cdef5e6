#include "topicpipe/report.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <sstream>

#include "topicpipe/errors.hpp"
#include "topicpipe/util.hpp"

namespace topicpipe::report {

namespace {

std::string csv_quote(const std::string& field) {
    const bool needs_quotes = field.find_first_of(",\"\r\n") != std::string::npos;
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += '"';
    return out;
}

std::string md_escape(const std::string& cell) {
    std::string out;
    for (char c : cell) {
        if (c == '|') out += "\\|";
        else out.push_back(c);
    }
    return out;
}

std::string format_fixed(double value, int decimals = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
}

struct TableRow {
    std::string label;  // empty for continuation rows in a group
    std::string docs;
    std::string keywords;
};

std::string render_rows(const std::vector<TableRow>& rows,
                        const std::array<std::string, 3>& header, ReportFormat format) {
    std::ostringstream out;
    if (format == ReportFormat::Markdown) {
        out << "| " << header[0] << " | " << header[1] << " | " << header[2] << " |\n";
        out << "| --- | ---: | --- |\n";
        for (const TableRow& row : rows) {
            out << "| " << md_escape(row.label) << " | " << row.docs << " | "
                << md_escape(row.keywords) << " |\n";
        }
    } else {
        out << csv_quote(header[0]) << ',' << csv_quote(header[1]) << ',' << csv_quote(header[2])
            << "\r\n";
        for (const TableRow& row : rows) {
            out << csv_quote(row.label) << ',' << csv_quote(row.docs) << ','
                << csv_quote(row.keywords) << "\r\n";
        }
    }
    return out.str();
}

std::string joined_keywords(const pipeline::TopicSummary& topic) {
    std::string out;
    for (std::size_t i = 0; i < topic.keywords.size(); ++i) {
        if (i > 0) out += ", ";
        out += topic.keywords[i].term;
    }
    return out;
}

std::string exclusion_row_text(const pipeline::RunConfig& config) {
    std::string out = "Rule-based exclusion from model (contains ";
    for (std::size_t i = 0; i < config.exclusion.patterns.size(); ++i) {
        if (i > 0) out += " or ";
        out += '"' + config.exclusion.patterns[i] + '"';
    }
    out += ")";
    return out;
}

}  // namespace

LabelMap LabelMap::load(const std::string& path) {
    LabelMap map;
    for (const auto& [key, value] : util::parse_kv_file(path)) {
        if (key.empty() || key.find_first_not_of("0123456789") != std::string::npos) {
            throw ValidationError(path + ": label key \"" + key +
                                  "\" is not a non-negative topic id");
        }
        if (value.empty()) {
            throw ValidationError(path + ": empty label for topic " + key);
        }
        const int topic_id = std::stoi(key);
        if (map.entries.count(topic_id) != 0) {
            throw ValidationError(path + ": duplicate label entry for topic " + key);
        }
        map.entries[topic_id] = value;
    }
    return map;
}

void LabelMap::validate_against(const pipeline::TopicModelRun& run) const {
    for (const auto& [topic_id, label] : entries) {
        const bool known = std::any_of(run.topics.begin(), run.topics.end(),
                                       [&](const pipeline::TopicSummary& t) {
                                           return t.topic_id == topic_id;
                                       });
        if (!known) {
            throw ValidationError("label references unknown topic id " + std::to_string(topic_id));
        }
    }
}

ReportFormat parse_report_format(const std::string& name) {
    if (name == "markdown" || name == "md") return ReportFormat::Markdown;
    if (name == "csv") return ReportFormat::Csv;
    throw ValidationError("unknown report format: " + name + " (expected markdown or csv)");
}

std::string render_topic_table(const pipeline::TopicModelRun& run, const LabelMap* labels,
                               ReportFormat format) {
    if (labels != nullptr) labels->validate_against(run);

    // Grouped topics render adjacently under one label cell; groups are
    // ordered by their first topic id, continuation rows leave the label
    // blank.
    std::vector<std::pair<std::string, std::vector<const pipeline::TopicSummary*>>> groups;
    std::map<std::string, std::size_t> group_index;
    for (const pipeline::TopicSummary& topic : run.topics) {
        const std::string* label = nullptr;
        if (labels != nullptr) {
            auto it = labels->entries.find(topic.topic_id);
            if (it != labels->entries.end()) label = &it->second;
        }
        if (label == nullptr) {
            groups.push_back({"Topic " + std::to_string(topic.topic_id), {&topic}});
            continue;
        }
        auto it = group_index.find(*label);
        if (it == group_index.end()) {
            group_index[*label] = groups.size();
            groups.push_back({*label, {&topic}});
        } else {
            groups[it->second].second.push_back(&topic);
        }
    }

    std::vector<TableRow> rows;
    for (const auto& [title, topics] : groups) {
        for (std::size_t i = 0; i < topics.size(); ++i) {
            rows.push_back({i == 0 ? title : "", std::to_string(topics[i]->size),
                            joined_keywords(*topics[i])});
        }
    }
    rows.push_back({"No assignment", std::to_string(run.ledger.outliers), "Outlier documents"});
    if (run.config.input_mode == pipeline::InputMode::Augmented) {
        rows.push_back({"", std::to_string(run.ledger.excluded), exclusion_row_text(run.config)});
    }
    if (run.ledger.failed > 0) {
        rows.push_back({"", std::to_string(run.ledger.failed), "Augmentation failed"});
    }
    return render_rows(rows, {"Label", "Docs", "Keywords"}, format);
}

std::string render_comparison(const pipeline::RunComparison& cmp, ReportFormat format) {
    struct Pair {
        std::size_t a, b;
        double jaccard;
    };
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < cmp.topics_a; ++i) {
        for (std::size_t j = 0; j < cmp.topics_b; ++j) {
            if (cmp.jaccard[i][j] > 0.0) pairs.push_back({i, j, cmp.jaccard[i][j]});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
        if (x.jaccard != y.jaccard) return x.jaccard > y.jaccard;
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    });
    if (pairs.size() > 5) pairs.resize(5);

    auto shared_keywords = [&](const Pair& p) {
        std::vector<std::string> shared;
        for (const std::string& term : cmp.keywords_a[p.a]) {
            if (std::find(cmp.keywords_b[p.b].begin(), cmp.keywords_b[p.b].end(), term) !=
                cmp.keywords_b[p.b].end()) {
                shared.push_back(term);
            }
        }
        std::sort(shared.begin(), shared.end());
        std::string out;
        for (std::size_t i = 0; i < shared.size(); ++i) {
            if (i > 0) out += ", ";
            out += shared[i];
        }
        return out;
    };

    std::ostringstream out;
    const std::vector<std::array<std::string, 3>> metrics = {
        {"Topics", std::to_string(cmp.topics_a), std::to_string(cmp.topics_b)},
        {"Coverage", format_fixed(cmp.coverage_a), format_fixed(cmp.coverage_b)},
        {"Assigned", std::to_string(cmp.ledger_a.assigned), std::to_string(cmp.ledger_b.assigned)},
        {"Outliers", std::to_string(cmp.ledger_a.outliers), std::to_string(cmp.ledger_b.outliers)},
        {"Excluded", std::to_string(cmp.ledger_a.excluded), std::to_string(cmp.ledger_b.excluded)},
        {"Failed", std::to_string(cmp.ledger_a.failed), std::to_string(cmp.ledger_b.failed)},
        {"Corpus size", std::to_string(cmp.corpus_size), std::to_string(cmp.corpus_size)},
    };

    if (format == ReportFormat::Markdown) {
        out << "| Metric | Run A | Run B |\n| --- | ---: | ---: |\n";
        for (const auto& m : metrics) {
            out << "| " << m[0] << " | " << m[1] << " | " << m[2] << " |\n";
        }
        out << "\n| Topic A | Topic B | Jaccard | Shared keywords |\n";
        out << "| --- | --- | ---: | --- |\n";
        for (const Pair& p : pairs) {
            out << "| Topic " << p.a << " | Topic " << p.b << " | " << format_fixed(p.jaccard)
                << " | " << md_escape(shared_keywords(p)) << " |\n";
        }
    } else {
        out << "section,key,value_a,value_b,detail\r\n";
        for (const auto& m : metrics) {
            out << "metric," << csv_quote(m[0]) << ',' << csv_quote(m[1]) << ','
                << csv_quote(m[2]) << ",\r\n";
        }
        for (const Pair& p : pairs) {
            out << "pair," << format_fixed(p.jaccard) << ",Topic " << p.a << ",Topic " << p.b
                << ',' << csv_quote(shared_keywords(p)) << "\r\n";
        }
    }
    return out.str();
}

}  // namespace topicpipe::report
