#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "batchprompt/strings.hpp"
#include "batchprompt/task.hpp"

namespace batchprompt {

enum class ParseStatus { Clean, Repaired, Mismatch };

inline std::string to_string(ParseStatus s) {
    switch (s) {
        case ParseStatus::Clean: return "clean";
        case ParseStatus::Repaired: return "repaired";
        case ParseStatus::Mismatch: return "mismatch";
    }
    return "mismatch";
}

struct RepairRecord {
    std::string kind;    // fence-stripped | index-rebase | duplicate-key | bare-list
    std::string detail;
};

/// Outcome of parsing one completion. Mismatch is a value, never an exception:
/// it means the recoverable label count disagrees with the instance count,
/// which no formatting rule can fix.
struct ParsedLabels {
    std::map<int, Label> assignments;      // 0-based instance position -> label
    std::vector<RepairRecord> repairs;
    std::map<int, std::string> invalid;    // positions whose value maps to no label
    ParseStatus status = ParseStatus::Mismatch;
};

namespace detail {

// First balanced-brace object in `raw`, skipping brace characters inside
// string literals. Returns nullopt when none closes.
inline std::optional<std::pair<std::size_t, std::size_t>> first_balanced_object(std::string_view raw) {
    auto open = raw.find('{');
    while (open != std::string_view::npos) {
        int depth = 0;
        bool in_string = false;
        for (std::size_t i = open; i < raw.size(); ++i) {
            char c = raw[i];
            if (in_string) {
                if (c == '\\')
                    ++i;
                else if (c == '"')
                    in_string = false;
            } else if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}') {
                if (--depth == 0) return std::make_pair(open, i + 1);
            }
        }
        open = raw.find('{', open + 1);
    }
    return std::nullopt;
}

inline std::string unescape_quoted(std::string_view body) {
    std::string out;
    out.reserve(body.size());
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (body[i] == '\\' && i + 1 < body.size()) {
            char n = body[++i];
            switch (n) {
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                case 'r': out.push_back('\r'); break;
                default: out.push_back(n); break;
            }
        } else {
            out.push_back(body[i]);
        }
    }
    return out;
}

struct ObjectScan {
    std::vector<std::pair<std::string, std::string>> pairs;  // in occurrence order
};

// Relaxed key/value scan of a balanced object: quoted or bare keys, quoted
// strings / bare scalars / nested structures as values. Stops quietly at the
// first token it cannot make sense of, keeping the pairs found so far.
inline ObjectScan scan_object(std::string_view obj) {
    ObjectScan out;
    std::size_t i = 1;  // past '{'
    auto skip_ws = [&] {
        while (i < obj.size() && (is_ascii_space(obj[i]) || obj[i] == ',')) ++i;
    };
    auto read_string = [&]() -> std::optional<std::string> {
        std::size_t start = ++i;
        while (i < obj.size()) {
            if (obj[i] == '\\')
                i += 2;
            else if (obj[i] == '"')
                return unescape_quoted(obj.substr(start, i++ - start));
            else
                ++i;
        }
        return std::nullopt;
    };
    auto skip_balanced = [&](char open_c, char close_c) {
        int depth = 0;
        bool in_string = false;
        std::size_t start = i;
        for (; i < obj.size(); ++i) {
            char c = obj[i];
            if (in_string) {
                if (c == '\\')
                    ++i;
                else if (c == '"')
                    in_string = false;
            } else if (c == '"') {
                in_string = true;
            } else if (c == open_c) {
                ++depth;
            } else if (c == close_c) {
                if (--depth == 0) {
                    ++i;
                    break;
                }
            }
        }
        return std::string(obj.substr(start, i - start));
    };
    while (true) {
        skip_ws();
        if (i >= obj.size() || obj[i] == '}') break;
        std::string key;
        if (obj[i] == '"') {
            auto k = read_string();
            if (!k) break;
            key = *k;
        } else {
            std::size_t start = i;
            while (i < obj.size() && obj[i] != ':' && !is_ascii_space(obj[i])) ++i;
            key = std::string(obj.substr(start, i - start));
        }
        skip_ws();
        if (i >= obj.size() || obj[i] != ':') break;
        ++i;
        while (i < obj.size() && is_ascii_space(obj[i])) ++i;
        if (i >= obj.size()) break;
        std::string value;
        if (obj[i] == '"') {
            auto v = read_string();
            if (!v) break;
            value = *v;
        } else if (obj[i] == '{') {
            value = skip_balanced('{', '}');
        } else if (obj[i] == '[') {
            value = skip_balanced('[', ']');
        } else {
            std::size_t start = i;
            while (i < obj.size() && obj[i] != ',' && obj[i] != '}') ++i;
            value = trim_ws(obj.substr(start, i - start));
        }
        out.pairs.emplace_back(std::move(key), std::move(value));
    }
    return out;
}

inline std::optional<int> integer_like(std::string_view key) {
    std::string t = trim_ws(key);
    if (t.empty() || t.size() > 9) return std::nullopt;
    for (char c : t)
        if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    return std::stoi(t);
}

inline std::vector<std::string> split_bare_list(std::string_view raw) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : raw) {
        if (c == ',' || c == ';' || c == '\n') {
            auto t = trim_ws(cur);
            if (!t.empty()) tokens.push_back(t);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    auto t = trim_ws(cur);
    if (!t.empty()) tokens.push_back(t);
    return tokens;
}

}  // namespace detail

/// Rule-based extraction of an index-keyed label map from raw completion text.
///
/// Pipeline: (1) take the first balanced-brace object, tolerating prose and
/// code fences around it; (2) read integer-keyed pairs, last occurrence wins;
/// (3) accept only a contiguous key run of length expected_count starting at
/// 0 or 1, rebasing to 0-based positions; (4) normalize values against the
/// task's labels and aliases; (5) with no object at all, fall back to a bare
/// delimiter-separated list accepted only at the exact expected length.
/// Anything else is a mismatch.
inline ParsedLabels parse_response(const std::string& raw, int expected_count, const TaskSpec& spec) {
    ParsedLabels out;

    auto finish_values = [&](const std::map<int, std::string>& by_position) {
        for (const auto& [pos, value] : by_position) {
            if (auto label = normalize_label(value, spec))
                out.assignments.emplace(pos, *label);
            else
                out.invalid.emplace(pos, value);
        }
        out.status = (out.repairs.empty() && out.invalid.empty()) ? ParseStatus::Clean
                                                                  : ParseStatus::Repaired;
    };

    if (auto span = detail::first_balanced_object(raw)) {
        if (trim_ws(raw) != raw.substr(span->first, span->second - span->first))
            out.repairs.push_back({"fence-stripped", "discarded text around the first balanced object"});

        auto scan = detail::scan_object(std::string_view(raw).substr(span->first, span->second - span->first));
        std::map<int, std::string> by_key;
        for (const auto& [key, value] : scan.pairs) {
            auto k = detail::integer_like(key);
            if (!k) continue;
            if (!by_key.emplace(*k, value).second) {
                by_key[*k] = value;
                out.repairs.push_back({"duplicate-key", "key " + std::to_string(*k) + ": last occurrence kept"});
            }
        }

        const bool contiguous =
            !by_key.empty() && static_cast<int>(by_key.size()) == expected_count &&
            (by_key.begin()->first == 0 || by_key.begin()->first == 1) &&
            by_key.rbegin()->first - by_key.begin()->first + 1 == expected_count;
        if (!contiguous) {
            out.status = ParseStatus::Mismatch;
            out.assignments.clear();
            return out;
        }
        const int base = by_key.begin()->first;
        if (base != spec.index_base)
            out.repairs.push_back({"index-rebase",
                                   "response keys start at " + std::to_string(base) +
                                       ", render base is " + std::to_string(spec.index_base)});
        std::map<int, std::string> by_position;
        for (const auto& [k, v] : by_key) by_position.emplace(k - base, v);
        finish_values(by_position);
        return out;
    }

    auto tokens = detail::split_bare_list(raw);
    if (static_cast<int>(tokens.size()) != expected_count) {
        out.status = ParseStatus::Mismatch;
        return out;
    }
    out.repairs.push_back({"bare-list", "no object found; accepted a delimiter-separated list"});
    std::map<int, std::string> by_position;
    for (std::size_t i = 0; i < tokens.size(); ++i) by_position.emplace(static_cast<int>(i), tokens[i]);
    finish_values(by_position);
    return out;
}

}  // namespace batchprompt
