#pragma once

// JSON bindings for the domain types. nlohmann::json keeps object keys in
// std::map order, so identical values serialize to identical bytes — the
// property the replayable-manifest contract rests on.

#include <nlohmann/json.hpp>

#include "batchprompt/cost.hpp"
#include "batchprompt/eval.hpp"
#include "batchprompt/mock.hpp"
#include "batchprompt/parse.hpp"
#include "batchprompt/partition.hpp"
#include "batchprompt/provider.hpp"
#include "batchprompt/task.hpp"

namespace batchprompt {

inline void to_json(nlohmann::json& j, const TaskSpec& s) {
    j = nlohmann::json{{"name", s.name},
                       {"description", s.description},
                       {"labels", s.labels},
                       {"aliases", s.aliases},
                       {"single_template", s.single_template},
                       {"multi_template", s.multi_template},
                       {"field_order", s.field_order},
                       {"index_base", s.index_base},
                       {"example_key_base", s.example_key_base}};
}

inline void from_json(const nlohmann::json& j, TaskSpec& s) {
    j.at("name").get_to(s.name);
    j.at("description").get_to(s.description);
    j.at("labels").get_to(s.labels);
    if (j.contains("aliases")) j.at("aliases").get_to(s.aliases);
    j.at("single_template").get_to(s.single_template);
    j.at("multi_template").get_to(s.multi_template);
    j.at("field_order").get_to(s.field_order);
    s.index_base = j.value("index_base", 0);
    s.example_key_base = j.value("example_key_base", 0);
}

inline void to_json(nlohmann::json& j, const ProviderConfig& c) {
    j = nlohmann::json{{"endpoint_url", c.endpoint_url},
                       {"model_name", c.model_name},
                       {"temperature", c.temperature},
                       {"api_key_source", c.api_key_source},  // the variable name; the key itself never lands on disk
                       {"max_in_flight", c.max_in_flight},
                       {"timeout_ms", c.timeout.count()},
                       {"retry_limit", c.retry_limit},
                       {"backoff_ms", c.backoff_base.count()}};
}

inline void from_json(const nlohmann::json& j, ProviderConfig& c) {
    ProviderConfig defaults;
    c.endpoint_url = j.value("endpoint_url", defaults.endpoint_url);
    c.model_name = j.value("model_name", defaults.model_name);
    c.temperature = j.value("temperature", defaults.temperature);
    c.api_key_source = j.value("api_key_source", defaults.api_key_source);
    c.max_in_flight = j.value("max_in_flight", defaults.max_in_flight);
    c.timeout = std::chrono::milliseconds(j.value("timeout_ms", defaults.timeout.count()));
    c.retry_limit = j.value("retry_limit", defaults.retry_limit);
    c.backoff_base = std::chrono::milliseconds(j.value("backoff_ms", defaults.backoff_base.count()));
}

inline void to_json(nlohmann::json& j, const MockLexicon& m) {
    auto kw = nlohmann::json::array();
    for (const auto& [k, v] : m.keywords) kw.push_back(nlohmann::json::array({k, v}));
    j = nlohmann::json{{"keywords", kw}, {"default", m.default_label}};
}

inline void from_json(const nlohmann::json& j, MockLexicon& m) {
    m.keywords.clear();
    if (j.contains("keywords"))
        for (const auto& pair : j.at("keywords"))
            m.keywords.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<std::string>());
    m.default_label = j.value("default", "");
}

inline nlohmann::json plan_to_json(const PartitionPlan& plan) {
    auto batches = nlohmann::json::array();
    for (const auto& b : plan.batches) {
        auto ids = nlohmann::json::array();
        for (const auto& inst : b.instances) ids.push_back(inst.id);
        nlohmann::json jb{{"batch_id", b.batch_id}, {"ids", ids}};
        if (b.target_topic) jb["target_topic"] = *b.target_topic;
        batches.push_back(std::move(jb));
    }
    return nlohmann::json{{"strategy", to_string(plan.strategy)},
                          {"n", plan.n},
                          {"seed", plan.seed},
                          {"leftover_policy", "short-final-batch"},
                          {"batches", batches}};
}

inline void to_json(nlohmann::json& j, const RepairRecord& r) {
    j = nlohmann::json{{"kind", r.kind}, {"detail", r.detail}};
}

inline void to_json(nlohmann::json& j, const ParsedLabels& p) {
    nlohmann::json assignments = nlohmann::json::object();
    for (const auto& [pos, label] : p.assignments) assignments[std::to_string(pos)] = label.canonical;
    nlohmann::json invalid = nlohmann::json::object();
    for (const auto& [pos, raw] : p.invalid) invalid[std::to_string(pos)] = raw;
    j = nlohmann::json{{"status", to_string(p.status)},
                       {"assignments", assignments},
                       {"repairs", p.repairs},
                       {"invalid", invalid}};
}

inline void to_json(nlohmann::json& j, const ExchangeSummary& e) {
    j = nlohmann::json{{"batch_id", e.batch_id},
                       {"wall_time_s", e.wall_time_s},
                       {"prompt_tokens", e.prompt_tokens},
                       {"completion_tokens", e.completion_tokens},
                       {"attempt", e.attempt}};
}

inline void to_json(nlohmann::json& j, const CostReport& r) {
    j = nlohmann::json{{"n_instances", r.n_instances},
                       {"total_time_s", r.total_time_s},
                       {"total_prompt_tokens", r.total_prompt_tokens},
                       {"total_completion_tokens", r.total_completion_tokens},
                       {"c_time", r.c_time},
                       {"c_token", r.c_token},
                       {"token_scope", to_string(r.scope)},
                       {"token_source", to_string(r.token_source)},
                       {"per_batch", r.per_batch}};
}

inline void from_json(const nlohmann::json& j, CostReport& r) {
    r.n_instances = j.at("n_instances").get<long>();
    r.total_time_s = j.at("total_time_s").get<double>();
    r.total_prompt_tokens = j.at("total_prompt_tokens").get<long>();
    r.total_completion_tokens = j.at("total_completion_tokens").get<long>();
    r.c_time = j.at("c_time").get<double>();
    r.c_token = j.at("c_token").get<double>();
    r.scope = j.value("token_scope", "prompt") == "prompt" ? TokenScope::PromptOnly
                                                           : TokenScope::PromptPlusCompletion;
}

inline void to_json(nlohmann::json& j, const LabelScore& s) {
    j = nlohmann::json{{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}, {"support", s.support}};
}

inline void to_json(nlohmann::json& j, const TopicScore& s) {
    j = nlohmann::json{{"accuracy", s.accuracy}, {"macro_f1", s.macro_f1}, {"scored", s.scored}};
}

inline void to_json(nlohmann::json& j, const EvalReport& r) {
    j = nlohmann::json{{"accuracy", r.accuracy},
                       {"macro_f1", r.macro_f1},
                       {"accuracy_over_all", r.accuracy_over_all},
                       {"macro_f1_over_all", r.macro_f1_over_all},
                       {"per_label", r.per_label},
                       {"per_topic", r.per_topic},
                       {"scored", r.scored},
                       {"unlabeled", r.unlabeled},
                       {"mismatch_rate", r.mismatch_rate}};
}

inline void from_json(const nlohmann::json& j, LabelScore& s) {
    s.precision = j.value("precision", 0.0);
    s.recall = j.value("recall", 0.0);
    s.f1 = j.value("f1", 0.0);
    s.support = j.value("support", 0L);
}

inline void from_json(const nlohmann::json& j, TopicScore& s) {
    s.accuracy = j.value("accuracy", 0.0);
    s.macro_f1 = j.value("macro_f1", 0.0);
    s.scored = j.value("scored", 0L);
}

inline void from_json(const nlohmann::json& j, EvalReport& r) {
    r.accuracy = j.at("accuracy").get<double>();
    r.macro_f1 = j.at("macro_f1").get<double>();
    r.accuracy_over_all = j.value("accuracy_over_all", r.accuracy);
    r.macro_f1_over_all = j.value("macro_f1_over_all", r.macro_f1);
    if (j.contains("per_label")) j.at("per_label").get_to(r.per_label);
    if (j.contains("per_topic")) j.at("per_topic").get_to(r.per_topic);
    r.scored = j.value("scored", 0L);
    r.unlabeled = j.value("unlabeled", 0L);
    r.mismatch_rate = j.value("mismatch_rate", 0.0);
}

}  // namespace batchprompt
