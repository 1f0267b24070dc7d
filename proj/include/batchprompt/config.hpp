#pragma once

#include <fstream>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "batchprompt/errors.hpp"
#include "batchprompt/run.hpp"
#include "batchprompt/serde.hpp"
#include "batchprompt/task.hpp"

namespace batchprompt {

/// One structured config document: the task spec plus optional provider, run
/// and mock sections. A document without a "task" key is read as a bare
/// TaskSpec, so task fixture files work directly.
struct FileConfig {
    TaskSpec task;
    ProviderConfig provider;
    std::optional<MockSettings> mock;
    nlohmann::json run_defaults = nlohmann::json::object();  // n / strategy / seed / target_topic / token_scope
};

inline FileConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw ConfigError("config file is not a JSON object: " + path);

    FileConfig out;
    try {
        if (doc.contains("task")) {
            doc.at("task").get_to(out.task);
            if (doc.contains("provider")) doc.at("provider").get_to(out.provider);
            if (doc.contains("mock")) out.mock = doc.at("mock").get<MockSettings>();
            if (doc.contains("run")) out.run_defaults = doc.at("run");
        } else {
            doc.get_to(out.task);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config '") + path + "': " + e.what());
    }
    validate_spec(out.task);
    return out;
}

}  // namespace batchprompt
