#include "topicpipe/util.hpp"

#include <cctype>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "topicpipe/errors.hpp"

namespace topicpipe::util {

std::string to_hex(uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[value & 0xF];
        value >>= 4;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    size_t begin = 0;
    size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

bool icontains(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return true;
    if (needle.size() > haystack.size()) return false;
    auto lower = [](char c) {
        return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
    };
    for (size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
        size_t j = 0;
        while (j < needle.size() && lower(haystack[i + j]) == lower(needle[j])) ++j;
        if (j == needle.size()) return true;
    }
    return false;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        bool alnum = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
        if (alnum) {
            current.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c);
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::string iso8601_utc_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

namespace {

std::string parse_quoted(std::string_view line, size_t& pos, int line_no,
                         const std::string& origin) {
    // pos points at the opening quote.
    std::string out;
    ++pos;
    while (pos < line.size()) {
        char c = line[pos];
        if (c == '"') {
            ++pos;
            return out;
        }
        if (c == '\\' && pos + 1 < line.size()) {
            char esc = line[pos + 1];
            switch (esc) {
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                case '"': out.push_back('"'); break;
                case '\\': out.push_back('\\'); break;
                default:
                    throw ValidationError(origin + ":" + std::to_string(line_no) +
                                          ": unknown escape '\\" + std::string(1, esc) + "'");
            }
            pos += 2;
            continue;
        }
        out.push_back(c);
        ++pos;
    }
    throw ValidationError(origin + ":" + std::to_string(line_no) + ": unterminated string");
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_kv_text(std::string_view text,
                                                               const std::string& origin) {
    std::vector<std::pair<std::string, std::string>> pairs;
    int line_no = 0;
    size_t start = 0;
    while (start <= text.size()) {
        size_t nl = text.find('\n', start);
        std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos
                                                                                : nl - start);
        start = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
        ++line_no;

        std::string_view stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;

        std::string key;
        size_t pos = 0;
        // Re-anchor on the trimmed view for simpler offsets.
        line = stripped;
        if (line[pos] == '"') {
            key = parse_quoted(line, pos, line_no, origin);
        } else {
            while (pos < line.size() && line[pos] != '=' && !std::isspace(static_cast<unsigned char>(line[pos]))) {
                key.push_back(line[pos]);
                ++pos;
            }
        }
        while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
        if (pos >= line.size() || line[pos] != '=') {
            throw ValidationError(origin + ":" + std::to_string(line_no) + ": expected '='");
        }
        ++pos;
        while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
        if (pos >= line.size() || line[pos] != '"') {
            throw ValidationError(origin + ":" + std::to_string(line_no) +
                                  ": expected double-quoted value");
        }
        std::string value = parse_quoted(line, pos, line_no, origin);
        if (!trim(line.substr(pos)).empty() && trim(line.substr(pos)).front() != '#') {
            throw ValidationError(origin + ":" + std::to_string(line_no) +
                                  ": trailing characters after value");
        }
        pairs.emplace_back(std::move(key), std::move(value));
    }
    return pairs;
}

std::vector<std::pair<std::string, std::string>> parse_kv_file(const std::string& path) {
    return parse_kv_text(read_file(path), path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write file: " + tmp);
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw ValidationError("short write: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace topicpipe::util
