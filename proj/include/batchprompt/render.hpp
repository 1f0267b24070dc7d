#pragma once

#include <string>

#include "batchprompt/errors.hpp"
#include "batchprompt/strings.hpp"
#include "batchprompt/task.hpp"

namespace batchprompt {

/// A prompt ready for dispatch, with the bookkeeping the parser needs.
struct RenderedPrompt {
    std::string text;
    int batch_id = 0;
    int expected_count = 0;
    int index_base = 0;
};

/// Escapes a composed instance for embedding between straight double quotes,
/// so internal quotes never create line-count ambiguity.
inline std::string escape_quoted(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '\\' || c == '"') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

/// Joins the instance's fields in field_order. A single field is rendered
/// bare; multiple fields get a labeled prefix per field.
inline std::string compose_instance(const TaskSpec& spec, const TaskInstance& inst) {
    std::string out;
    for (const auto& field : spec.field_order) {
        auto it = inst.fields.find(field);
        if (it == inst.fields.end() || it->second.empty()) throw MissingField(field, inst.id);
        if (!out.empty()) out.push_back('\n');
        if (spec.field_order.size() > 1) out += field + ": ";
        out += it->second;
    }
    return out;
}

/// The two-key format example: keys start at example_key_base, values are the
/// first two labels of the category set (repeated for single-label tasks).
/// The full n-key format is deliberately never spelled out.
inline std::string format_example(const TaskSpec& spec) {
    const std::string& first = spec.labels.front();
    const std::string& second = spec.labels.size() > 1 ? spec.labels[1] : spec.labels.front();
    const int k = spec.example_key_base;
    return "{\"" + std::to_string(k) + "\": \"" + first + "\", \"" + std::to_string(k + 1) +
           "\":\"" + second + "\"}";
}

inline RenderedPrompt render_single(const TaskSpec& spec, const TaskInstance& inst, int batch_id = 0) {
    std::string text = spec.single_template;
    replace_once(text, "{instance}", "\"" + escape_quoted(compose_instance(spec, inst)) + "\"");
    return RenderedPrompt{std::move(text), batch_id, 1, spec.index_base};
}

/// Numbered instance lines `<i>: "<composed>"` in batch order, starting at
/// index_base, substituted into the multi template.
inline RenderedPrompt render_batch(const TaskSpec& spec, const Batch& batch) {
    if (batch.instances.empty()) throw EmptyBatch();
    std::string lines;
    for (std::size_t i = 0; i < batch.instances.size(); ++i) {
        if (i) lines.push_back('\n');
        lines += std::to_string(spec.index_base + static_cast<int>(i)) + ": \"" +
                 escape_quoted(compose_instance(spec, batch.instances[i])) + "\"";
    }
    std::string text = spec.multi_template;
    // Example first: instance text may legitimately contain brace sequences.
    replace_once(text, "{format_example}", format_example(spec));
    replace_once(text, "{instances}", lines);
    return RenderedPrompt{std::move(text), batch.batch_id,
                          static_cast<int>(batch.instances.size()), spec.index_base};
}

}  // namespace batchprompt
