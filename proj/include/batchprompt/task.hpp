#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "batchprompt/errors.hpp"
#include "batchprompt/strings.hpp"

namespace batchprompt {

/// A classification task: description, closed label set, alias table and the
/// single-/multi-instance prompt templates that every rendering derives from.
struct TaskSpec {
    std::string name;
    std::string description;
    std::vector<std::string> labels;                // ordered category set
    std::map<std::string, std::string> aliases;     // alias surface form -> canonical label
    std::string single_template;                    // must contain {instance} exactly once
    std::string multi_template;                     // must contain {instances} and {format_example}
    std::vector<std::string> field_order;           // fields composed into one instance rendering
    int index_base = 0;                             // numbering base for rendered instance lines
    int example_key_base = 0;                       // key base for the two-key format example

    bool operator==(const TaskSpec&) const = default;
};

struct TaskInstance {
    std::string id;
    std::map<std::string, std::string> fields;
    std::optional<std::string> gold;   // canonical label, when known
    std::optional<std::string> topic;

    bool operator==(const TaskInstance&) const = default;
};

/// A canonical prediction; always a member of the owning TaskSpec's label set.
struct Label {
    std::string canonical;

    auto operator<=>(const Label&) const = default;
};

enum class Strategy { Sequential, Grp, Mix, Fil };

inline std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::Sequential: return "sequential";
        case Strategy::Grp: return "grp";
        case Strategy::Mix: return "mix";
        case Strategy::Fil: return "fil";
    }
    return "sequential";
}

inline Strategy strategy_from_string(const std::string& s) {
    if (s == "sequential") return Strategy::Sequential;
    if (s == "grp") return Strategy::Grp;
    if (s == "mix") return Strategy::Mix;
    if (s == "fil") return Strategy::Fil;
    throw ConfigError("unknown strategy: " + s);
}

/// One element of a disjoint partition, dispatched as a single query.
struct Batch {
    int batch_id = 0;
    std::vector<TaskInstance> instances;
    Strategy strategy = Strategy::Sequential;
    std::uint64_t seed = 0;
    std::optional<std::string> target_topic;  // fil runs only
};

/// First violated invariant, or nullopt when the spec is well-formed.
inline std::optional<std::string> spec_problem(const TaskSpec& spec) {
    if (spec.labels.empty()) return "label set is empty";
    std::set<std::string> folded;
    for (const auto& l : spec.labels) {
        if (l.empty()) return "empty label";
        if (!folded.insert(ascii_fold(l)).second) return "duplicate label after case-folding: " + l;
    }
    for (const auto& [alias, canonical] : spec.aliases) {
        if (!folded.count(ascii_fold(canonical)))
            return "alias '" + alias + "' maps to unknown label '" + canonical + "'";
    }
    if (count_occurrences(spec.single_template, "{instance}") != 1)
        return "single_template must contain {instance} exactly once";
    if (count_occurrences(spec.multi_template, "{instances}") != 1)
        return "multi_template must contain {instances} exactly once";
    if (count_occurrences(spec.multi_template, "{format_example}") != 1)
        return "multi_template must contain {format_example} exactly once";
    if (spec.field_order.empty()) return "field_order is empty";
    if (spec.index_base != 0 && spec.index_base != 1) return "index_base must be 0 or 1";
    if (spec.example_key_base != 0 && spec.example_key_base != 1) return "example_key_base must be 0 or 1";
    return std::nullopt;
}

inline void validate_spec(const TaskSpec& spec) {
    if (auto why = spec_problem(spec)) throw SpecError(*why);
}

/// Maps a raw model output to a canonical label: trim whitespace/quotes and
/// trailing punctuation, case-fold, then look up labels and aliases.
/// Returns nullopt for unmappable surface forms; never throws.
inline std::optional<Label> normalize_label(std::string_view raw, const TaskSpec& spec) {
    const std::string folded = ascii_fold(trim_label_surface(raw));
    if (folded.empty()) return std::nullopt;
    auto member = [&spec](std::string_view folded_name) -> std::optional<Label> {
        for (const auto& l : spec.labels)
            if (ascii_fold(l) == folded_name) return Label{l};
        return std::nullopt;
    };
    if (auto direct = member(folded)) return direct;
    for (const auto& [alias, canonical] : spec.aliases)
        if (ascii_fold(trim_label_surface(alias)) == folded) return member(ascii_fold(canonical));
    return std::nullopt;
}

}  // namespace batchprompt
