#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace topicpipe::util {

inline constexpr uint64_t kFnvOffsetBasis = 14695981039346656037ULL;
inline constexpr uint64_t kFnvPrime = 1099511628211ULL;

/// FNV-1a 64-bit over raw bytes. Seed is the standard FNV offset basis;
/// this is the one stable hash used for token hashing, text digests and
/// prompt/cache keys throughout the project.
inline uint64_t fnv1a64(std::string_view bytes, uint64_t seed = kFnvOffsetBasis) {
    uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= static_cast<uint64_t>(c);
        h *= kFnvPrime;
    }
    return h;
}

/// 16 lowercase hex chars.
std::string to_hex(uint64_t value);

/// fnv1a64 rendered as a hex digest string.
inline std::string hex_digest(std::string_view bytes) { return to_hex(fnv1a64(bytes)); }

/// ASCII whitespace trim on both ends.
std::string_view trim(std::string_view s);

/// ASCII lowercase copy; bytes outside A-Z pass through untouched.
std::string to_lower(std::string_view s);

/// Case-insensitive (ASCII) substring test.
bool icontains(std::string_view haystack, std::string_view needle);

/// Lowercased tokens split on runs of non-alphanumeric bytes. Only ASCII
/// [0-9A-Za-z] count as token characters; any other byte (including UTF-8
/// continuation bytes) is a separator.
std::vector<std::string> tokenize(std::string_view text);

/// Current UTC time as "YYYY-MM-DDTHH:MM:SSZ".
std::string iso8601_utc_now();

/// Parses the plain key-value config format used for label maps and mock
/// client rules: one `key = "value"` pair per line, keys either bare or
/// double-quoted, values always double-quoted (with \" \\ \n \t escapes),
/// '#' starts a comment. Pair order is preserved.
std::vector<std::pair<std::string, std::string>> parse_kv_file(const std::string& path);
std::vector<std::pair<std::string, std::string>> parse_kv_text(std::string_view text,
                                                               const std::string& origin);

/// Whole-file read; throws ValidationError when the file cannot be opened.
std::string read_file(const std::string& path);

/// Atomic-ish write: writes to path + ".tmp" then renames over path.
void write_file(const std::string& path, std::string_view contents);

}  // namespace topicpipe::util
