#pragma once

#include <string>
#include <unordered_set>
#include <vector>

namespace topicpipe::represent {

/// Version tag of the built-in English stopword list; recorded in run
/// manifests so keyword tables stay comparable across releases.
extern const char* const kStopwordListVersion;

/// The built-in list: the classic 318-word English IR list plus the
/// apostrophe fragments produced by alphanumeric tokenization ("doesn t").
const std::vector<std::string>& builtin_stopwords();

/// Loads a one-term-per-line override file (lines are trimmed, '#' comments
/// and blank lines ignored, terms lowercased).
std::vector<std::string> load_stopword_file(const std::string& path);

std::unordered_set<std::string> stopword_set(const std::vector<std::string>& words);

}  // namespace topicpipe::represent
