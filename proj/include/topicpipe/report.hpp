#pragma once

#include <map>
#include <string>

#include "topicpipe/pipeline.hpp"

namespace topicpipe::report {

/// Researcher-assigned topic labels; several topic ids may share one label
/// (grouped rows). Loaded from a plain key-value file (topic_id = "label").
struct LabelMap {
    std::map<int, std::string> entries;

    static LabelMap load(const std::string& path);
    /// Rejects labels that name topics absent from the run.
    void validate_against(const pipeline::TopicModelRun& run) const;
};

enum class ReportFormat { Markdown, Csv };

ReportFormat parse_report_format(const std::string& name);

/// One row per topic (label or "Topic k", document count, keywords joined
/// by ", "), grouped label rows sharing one label cell, followed by "No
/// assignment" rows for outliers, rule-based exclusions (augmented runs,
/// naming the patterns) and failed augmentations when present. Pure
/// function of its inputs.
std::string render_topic_table(const pipeline::TopicModelRun& run, const LabelMap* labels,
                               ReportFormat format);

/// Side-by-side counts and coverage plus the five highest-Jaccard topic
/// pairs with their shared keywords.
std::string render_comparison(const pipeline::RunComparison& cmp, ReportFormat format);

}  // namespace topicpipe::report
