#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace batchprompt {

inline std::string ascii_fold(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s)
        out.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
    return out;
}

inline bool is_ascii_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

namespace detail {

// Straight and curly quotes; the curly ones are UTF-8 sequences.
inline const std::vector<std::string_view>& quote_marks() {
    static const std::vector<std::string_view> q = {
        "\"", "'", "\xe2\x80\x9c", "\xe2\x80\x9d", "\xe2\x80\x98", "\xe2\x80\x99"};
    return q;
}

inline bool strip_prefix_mark(std::string_view& s) {
    for (auto m : quote_marks()) {
        if (s.substr(0, m.size()) == m) {
            s.remove_prefix(m.size());
            return true;
        }
    }
    if (!s.empty() && is_ascii_space(s.front())) {
        s.remove_prefix(1);
        return true;
    }
    return false;
}

inline bool strip_suffix_mark(std::string_view& s, bool with_punct) {
    for (auto m : quote_marks()) {
        if (s.size() >= m.size() && s.substr(s.size() - m.size()) == m) {
            s.remove_suffix(m.size());
            return true;
        }
    }
    if (!s.empty() && (is_ascii_space(s.back()) || (with_punct && (s.back() == '.' || s.back() == ',')))) {
        s.remove_suffix(1);
        return true;
    }
    return false;
}

}  // namespace detail

// Strips whitespace and quotes from both ends, plus trailing periods/commas.
inline std::string trim_label_surface(std::string_view s) {
    while (detail::strip_prefix_mark(s)) {
    }
    while (detail::strip_suffix_mark(s, /*with_punct=*/true)) {
    }
    return std::string(s);
}

inline std::string trim_ws(std::string_view s) {
    while (!s.empty() && is_ascii_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_ascii_space(s.back())) s.remove_suffix(1);
    return std::string(s);
}

// Whitespace-delimited word count; the estimation fallback tokenizer.
inline long whitespace_token_count(std::string_view s) {
    long count = 0;
    bool in_word = false;
    for (char c : s) {
        bool space = is_ascii_space(c);
        if (!space && !in_word) ++count;
        in_word = !space;
    }
    return count;
}

// Lower-cased alphanumeric token runs, for term-frequency vectors.
inline std::vector<std::string> alnum_tokens(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        bool alnum = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
        if (alnum) {
            cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

// Replaces the single occurrence of `placeholder`; returns false when absent.
inline bool replace_once(std::string& text, std::string_view placeholder, std::string_view value) {
    auto pos = text.find(placeholder);
    if (pos == std::string::npos) return false;
    text.replace(pos, placeholder.size(), value);
    return true;
}

inline std::size_t count_occurrences(std::string_view text, std::string_view needle) {
    if (needle.empty()) return 0;
    std::size_t count = 0;
    for (auto pos = text.find(needle); pos != std::string_view::npos; pos = text.find(needle, pos + needle.size()))
        ++count;
    return count;
}

// FNV-1a, pinned so dataset hashes are identical across platforms.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string to_hex(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

}  // namespace batchprompt
