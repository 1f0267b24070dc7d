#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "batchprompt/errors.hpp"
#include "batchprompt/strings.hpp"
#include "batchprompt/task.hpp"

namespace batchprompt {

/// Line-delimited records: one JSON object per line. Field names come from
/// the task's field_order; `id`, `label` and `topic` are reserved optional
/// keys. Ids are auto-assigned from the 1-based line number when absent, and
/// gold labels are normalized against the task's labels and aliases.
inline std::vector<TaskInstance> ingest_dataset(std::istream& in, const TaskSpec& spec) {
    std::vector<TaskInstance> out;
    std::set<std::string> seen_ids;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim_ws(line).empty()) continue;
        nlohmann::json doc = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (doc.is_discarded() || !doc.is_object())
            throw ParseError(line_no, "not a JSON object");

        TaskInstance inst;
        if (doc.contains("id")) {
            if (doc["id"].is_string())
                inst.id = doc["id"].get<std::string>();
            else if (doc["id"].is_number_integer())
                inst.id = std::to_string(doc["id"].get<long>());
            else
                throw SchemaError(line_no, "id", "id must be a string or integer");
        } else {
            inst.id = std::to_string(line_no);
        }
        if (!seen_ids.insert(inst.id).second)
            throw SchemaError(line_no, "id", "duplicate instance id '" + inst.id + "'");

        for (const auto& field : spec.field_order) {
            if (!doc.contains(field) || !doc[field].is_string() || doc[field].get<std::string>().empty())
                throw SchemaError(line_no, field, "missing or empty field '" + field + "'");
            inst.fields[field] = doc[field].get<std::string>();
        }
        if (doc.contains("label")) {
            if (!doc["label"].is_string())
                throw SchemaError(line_no, "label", "label must be a string");
            auto gold = normalize_label(doc["label"].get<std::string>(), spec);
            if (!gold)
                throw SchemaError(line_no, "label",
                                  "gold label '" + doc["label"].get<std::string>() +
                                      "' maps to no label of task '" + spec.name + "'");
            inst.gold = gold->canonical;
        }
        if (doc.contains("topic")) {
            if (!doc["topic"].is_string())
                throw SchemaError(line_no, "topic", "topic must be a string");
            inst.topic = doc["topic"].get<std::string>();
        }
        out.push_back(std::move(inst));
    }
    return out;
}

inline std::vector<TaskInstance> ingest_dataset(const std::string& path, const TaskSpec& spec) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open dataset file: " + path);
    return ingest_dataset(in, spec);
}

/// Stable content hash of the dataset file, recorded in run manifests.
inline std::string dataset_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open dataset file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return to_hex(fnv1a64(buf.str()));
}

}  // namespace batchprompt
