#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "batchprompt/errors.hpp"
#include "batchprompt/provider.hpp"
#include "batchprompt/render.hpp"
#include "batchprompt/strings.hpp"

namespace batchprompt {

/// Response surface forms observed across hosted models: well-behaved JSON,
/// JSON buried in prose or code fences, a one-based map that drops the first
/// instance, runaway label repetition, and a bare label list.
enum class MockPersona {
    PlainJson,
    ProseWrappedJson,
    CodeFencedJson,
    OneBasedKeysMissingFirst,
    DegenerateRepetition,
    LabelListNoJson,
};

inline std::string to_string(MockPersona p) {
    switch (p) {
        case MockPersona::PlainJson: return "plain-json";
        case MockPersona::ProseWrappedJson: return "prose-wrapped-json";
        case MockPersona::CodeFencedJson: return "code-fenced-json";
        case MockPersona::OneBasedKeysMissingFirst: return "one-based-keys-missing-first";
        case MockPersona::DegenerateRepetition: return "degenerate-repetition";
        case MockPersona::LabelListNoJson: return "label-list-no-json";
    }
    return "plain-json";
}

inline MockPersona persona_from_string(const std::string& s) {
    if (s == "plain-json") return MockPersona::PlainJson;
    if (s == "prose-wrapped-json") return MockPersona::ProseWrappedJson;
    if (s == "code-fenced-json") return MockPersona::CodeFencedJson;
    if (s == "one-based-keys-missing-first") return MockPersona::OneBasedKeysMissingFirst;
    if (s == "degenerate-repetition") return MockPersona::DegenerateRepetition;
    if (s == "label-list-no-json") return MockPersona::LabelListNoJson;
    throw ConfigError("unknown mock persona: " + s);
}

/// Fixed keyword lexicon: the first keyword found (lexicon order, folded
/// substring match) decides the label; otherwise the default applies. Being a
/// pure function of the instance text, classifications are independent of
/// batch composition and order.
struct MockLexicon {
    std::vector<std::pair<std::string, std::string>> keywords;  // keyword -> label
    std::string default_label;

    std::string classify(std::string_view text) const {
        const std::string folded = ascii_fold(text);
        for (const auto& [kw, label] : keywords)
            if (folded.find(ascii_fold(kw)) != std::string::npos) return label;
        return default_label;
    }
};

namespace detail {

struct PromptInstances {
    std::vector<std::string> texts;
    int index_base = 0;
    bool single = false;
};

// Reads an escaped double-quoted block starting at `i` (which points at the
// opening quote); the block may span lines. Returns text and end position.
inline std::optional<std::pair<std::string, std::size_t>> read_quoted_block(std::string_view s,
                                                                            std::size_t i) {
    if (i >= s.size() || s[i] != '"') return std::nullopt;
    std::string out;
    for (std::size_t j = i + 1; j < s.size(); ++j) {
        if (s[j] == '\\' && j + 1 < s.size()) {
            out.push_back(s[j + 1]);
            ++j;
        } else if (s[j] == '"') {
            return std::make_pair(out, j + 1);
        } else {
            out.push_back(s[j]);
        }
    }
    return std::nullopt;
}

// Recovers the instance texts a renderer embedded in a prompt: numbered
// `<i>: "<text>"` lines, or the lone full-line quoted block of a single
// prompt. This is what lets the mock behave like a classifier.
inline PromptInstances extract_instances(std::string_view prompt) {
    PromptInstances out;
    std::size_t pos = 0;
    bool first = true;
    while (pos < prompt.size()) {
        std::size_t line_start = pos;
        std::size_t digits = 0;
        while (line_start + digits < prompt.size() &&
               std::isdigit(static_cast<unsigned char>(prompt[line_start + digits])))
            ++digits;
        bool matched = false;
        if (digits > 0 && line_start + digits + 2 <= prompt.size() &&
            prompt[line_start + digits] == ':' && prompt[line_start + digits + 1] == ' ') {
            if (auto block = read_quoted_block(prompt, line_start + digits + 2)) {
                std::size_t end = block->second;
                if (end >= prompt.size() || prompt[end] == '\n') {
                    if (first) {
                        out.index_base = std::stoi(std::string(prompt.substr(line_start, digits)));
                        first = false;
                    }
                    out.texts.push_back(block->first);
                    pos = end < prompt.size() ? end + 1 : end;
                    matched = true;
                }
            }
        }
        if (!matched) {
            auto nl = prompt.find('\n', pos);
            pos = nl == std::string_view::npos ? prompt.size() : nl + 1;
        }
    }
    if (!out.texts.empty()) return out;

    // Single-instance prompt: exactly one quoted block that starts a line and
    // ends a line.
    pos = 0;
    while (pos < prompt.size()) {
        if (prompt[pos] == '"' && (pos == 0 || prompt[pos - 1] == '\n')) {
            if (auto block = read_quoted_block(prompt, pos)) {
                std::size_t end = block->second;
                if (end >= prompt.size() || prompt[end] == '\n') {
                    out.texts.push_back(block->first);
                    out.single = true;
                    return out;
                }
            }
        }
        auto nl = prompt.find('\n', pos);
        pos = nl == std::string_view::npos ? prompt.size() : nl + 1;
    }
    // Nothing recognizable; classify the whole prompt as one instance.
    out.texts.push_back(std::string(prompt));
    out.single = true;
    return out;
}

}  // namespace detail

/// Deterministic completion for a rendered prompt: classify every embedded
/// instance with the lexicon, then format per persona. Single-instance
/// prompts always get the one bare label the single template asks for.
inline std::string mock_complete(const std::string& prompt, MockPersona persona,
                                 const MockLexicon& lexicon) {
    auto found = detail::extract_instances(prompt);
    std::vector<std::string> labels;
    labels.reserve(found.texts.size());
    for (const auto& t : found.texts) labels.push_back(lexicon.classify(t));

    if (found.single) return labels.front();

    const int base = found.index_base;
    auto plain_object = [&] {
        std::string out = "{";
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (i) out += ", ";
            out += "\"" + std::to_string(base + static_cast<int>(i)) + "\": \"" + labels[i] + "\"";
        }
        return out + "}";
    };
    auto pretty_object = [&] {
        std::string out = "{\n";
        for (std::size_t i = 0; i < labels.size(); ++i) {
            out += "  \"" + std::to_string(base + static_cast<int>(i)) + "\": \"" + labels[i] + "\"";
            if (i + 1 < labels.size()) out += ",";
            out += "\n";
        }
        return out + "}";
    };

    switch (persona) {
        case MockPersona::PlainJson:
            return plain_object();
        case MockPersona::ProseWrappedJson:
            return "Sure, here is the result you asked for, in JSON format:\n\nJSON\n" + pretty_object() +
                   "\nUse code with caution. Learn more\nI used a combination of methods to decide each "
                   "label.\n\nI hope this is helpful!";
        case MockPersona::CodeFencedJson:
            return "```json\n" + pretty_object() + "\n```";
        case MockPersona::OneBasedKeysMissingFirst: {
            // Drops the first instance and keys the rest 1..k-1.
            std::string out = "{";
            for (std::size_t i = 1; i < labels.size(); ++i) {
                if (i > 1) out += ", ";
                out += "\"" + std::to_string(i) + "\": \"" + labels[i] + "\"";
            }
            return out + "}";
        }
        case MockPersona::DegenerateRepetition: {
            std::string out;
            const std::size_t reps = 2 * labels.size() + 6;
            for (std::size_t i = 0; i < reps; ++i) {
                if (i) out += ", ";
                out += lexicon.default_label;
            }
            return out + " ...";
        }
        case MockPersona::LabelListNoJson: {
            std::string out;
            for (std::size_t i = 0; i < labels.size(); ++i) {
                if (i) out += ", ";
                out += labels[i];
            }
            return out;
        }
    }
    return plain_object();
}

/// In-process deterministic backend. Wall time is the configured simulated
/// latency, never measured, so whole runs are byte-reproducible.
class MockBackend : public Backend {
  public:
    MockBackend() = default;
    MockBackend(MockPersona persona, MockLexicon lexicon, double simulated_latency_s = 0.0)
        : persona_(persona), lexicon_(std::move(lexicon)), latency_s_(simulated_latency_s) {}

    Completion complete(const ProviderConfig&, const std::string& prompt) override {
        Completion c;
        c.text = mock_complete(prompt, persona_, lexicon_);
        c.simulated_wall_s = latency_s_;
        return c;
    }

    MockPersona persona() const { return persona_; }
    const MockLexicon& lexicon() const { return lexicon_; }

  private:
    MockPersona persona_ = MockPersona::PlainJson;
    MockLexicon lexicon_;
    double latency_s_ = 0.0;
};

}  // namespace batchprompt
