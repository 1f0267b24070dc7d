#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "batchprompt/cost.hpp"
#include "batchprompt/dataset.hpp"
#include "batchprompt/errors.hpp"
#include "batchprompt/eval.hpp"
#include "batchprompt/mock.hpp"
#include "batchprompt/parse.hpp"
#include "batchprompt/partition.hpp"
#include "batchprompt/provider.hpp"
#include "batchprompt/render.hpp"
#include "batchprompt/serde.hpp"
#include "batchprompt/task.hpp"
#include "batchprompt/version.hpp"

namespace batchprompt {

/// Mismatch recovery: the failed batch is re-dispatched unchanged up to
/// redispatch_limit times; if it still mismatches it splits into halves, and
/// sub-batches split on their first mismatch, down to singletons rendered
/// with the single template. That schedule needs at most 2n-1 recovery
/// dispatches for a batch of n.
struct RecoveryPolicy {
    int redispatch_limit = 1;
};

struct RunParams {
    long n = 10;
    Strategy strategy = Strategy::Sequential;
    std::uint64_t seed = 0;
    std::optional<std::string> target_topic;  // required for fil
    TokenScope token_scope = TokenScope::PromptOnly;
    RecoveryPolicy recovery;
};

struct MockSettings {
    MockPersona persona = MockPersona::PlainJson;
    MockLexicon lexicon;
    double latency_s = 0.0;
};

struct ParseEvent {
    int batch_id = 0;
    std::string phase;  // initial | redispatch | split | singleton
    ParsedLabels parsed;
};

struct RecoverySummary {
    int batch_id = 0;
    long dispatches = 0;  // recovery dispatches only, excluding the initial one
    std::string outcome;  // redispatch | split | exhausted
};

/// Everything needed to reproduce, audit and score a run. With the mock
/// backend, (task, dataset, params) determine this byte-for-byte.
struct RunManifest {
    std::string tool_name = kToolName;
    std::string tool_version = kVersion;
    TaskSpec task;
    std::string dataset_path;
    std::string dataset_hash;  // fnv1a64 of the file bytes
    long dataset_size = 0;
    RunParams params;
    ProviderConfig provider;
    std::string backend = "mock";  // mock | live
    std::optional<MockSettings> mock;
    nlohmann::json partition;  // plan_to_json
    std::vector<Exchange> exchanges;
    std::vector<ParseEvent> parses;
    std::vector<RecoverySummary> recoveries;
    std::map<std::string, std::string> predictions;  // id -> canonical label
    std::vector<std::string> unlabeled;              // ids recovery could not label
    std::optional<std::set<std::string>> mask;       // fil evaluation mask
    CostReport cost;
    std::optional<EvalReport> eval;
    bool incomplete = false;
    std::string error;
};

namespace detail {

struct PipelineState {
    const TaskSpec& spec;
    const ProviderConfig& cfg;
    Backend& backend;
    const RecoveryPolicy& policy;
    RunManifest& manifest;
    long mismatch_events = 0;
    long parse_events = 0;
};

inline ParsedLabels record_parse(PipelineState& st, int batch_id, const std::string& phase,
                                 const std::string& response, int expected) {
    ParsedLabels parsed = parse_response(response, expected, st.spec);
    ++st.parse_events;
    if (parsed.status == ParseStatus::Mismatch) ++st.mismatch_events;
    st.manifest.parses.push_back({batch_id, phase, parsed});
    return parsed;
}

inline void assign_labels(PipelineState& st, const Batch& batch, const ParsedLabels& parsed) {
    for (std::size_t pos = 0; pos < batch.instances.size(); ++pos) {
        const auto& id = batch.instances[pos].id;
        auto it = parsed.assignments.find(static_cast<int>(pos));
        if (it != parsed.assignments.end())
            st.manifest.predictions[id] = it->second.canonical;
        else
            st.manifest.unlabeled.push_back(id);  // count matched but the value mapped to no label
    }
}

inline Exchange recovery_dispatch(PipelineState& st, const RenderedPrompt& prompt, long& dispatches) {
    Exchange ex = dispatch(st.cfg, prompt, st.backend);
    st.manifest.exchanges.push_back(ex);
    ++dispatches;
    return ex;
}

inline void resolve_singleton(PipelineState& st, const Batch& parent, const TaskInstance& inst,
                              long& dispatches) {
    Exchange ex = recovery_dispatch(st, render_single(st.spec, inst, parent.batch_id), dispatches);
    ParsedLabels parsed = record_parse(st, parent.batch_id, "singleton", ex.response_text, 1);
    auto it = parsed.assignments.find(0);
    if (it != parsed.assignments.end())
        st.manifest.predictions[inst.id] = it->second.canonical;
    else
        st.manifest.unlabeled.push_back(inst.id);  // exhausted recovery
}

inline void split_resolve(PipelineState& st, const Batch& batch, long& dispatches) {
    if (batch.instances.size() == 1) {
        resolve_singleton(st, batch, batch.instances.front(), dispatches);
        return;
    }
    Exchange ex = recovery_dispatch(st, render_batch(st.spec, batch), dispatches);
    ParsedLabels parsed = record_parse(st, batch.batch_id, "split", ex.response_text,
                                       static_cast<int>(batch.instances.size()));
    if (parsed.status != ParseStatus::Mismatch) {
        assign_labels(st, batch, parsed);
        return;
    }
    const std::size_t half = batch.instances.size() / 2;
    Batch left = batch, right = batch;
    left.instances.assign(batch.instances.begin(), batch.instances.begin() + static_cast<long>(half));
    right.instances.assign(batch.instances.begin() + static_cast<long>(half), batch.instances.end());
    split_resolve(st, left, dispatches);
    split_resolve(st, right, dispatches);
}

/// pre: the batch's initial dispatch parsed as a mismatch.
inline RecoverySummary recover_mismatch(PipelineState& st, const Batch& batch) {
    RecoverySummary summary{batch.batch_id, 0, "split"};
    const RenderedPrompt prompt = batch.instances.size() == 1
                                      ? render_single(st.spec, batch.instances.front(), batch.batch_id)
                                      : render_batch(st.spec, batch);
    for (int retry = 0; retry < st.policy.redispatch_limit; ++retry) {
        Exchange ex = recovery_dispatch(st, prompt, summary.dispatches);
        ParsedLabels parsed = record_parse(st, batch.batch_id, "redispatch", ex.response_text,
                                           prompt.expected_count);
        if (parsed.status != ParseStatus::Mismatch) {
            assign_labels(st, batch, parsed);
            summary.outcome = "redispatch";
            return summary;
        }
    }
    if (batch.instances.size() == 1) {
        // Nothing left to split; the instance stays unlabeled.
        st.manifest.unlabeled.push_back(batch.instances.front().id);
        summary.outcome = "exhausted";
        return summary;
    }
    const std::size_t half = batch.instances.size() / 2;
    Batch left = batch, right = batch;
    left.instances.assign(batch.instances.begin(), batch.instances.begin() + static_cast<long>(half));
    right.instances.assign(batch.instances.begin() + static_cast<long>(half), batch.instances.end());
    split_resolve(st, left, summary.dispatches);
    split_resolve(st, right, summary.dispatches);
    return summary;
}

}  // namespace detail

/// Full pipeline: partition -> render -> dispatch -> parse -> recover ->
/// score -> cost. Fills `manifest` as it goes so an interrupted run leaves an
/// inspectable partial record; the caller marks it incomplete on error.
inline void run_pipeline(const TaskSpec& spec, const std::vector<TaskInstance>& dataset,
                         const RunParams& params, const ProviderConfig& provider, Backend& backend,
                         RunManifest& manifest) {
    validate_spec(spec);
    validate_provider_config(provider);
    manifest.task = spec;
    manifest.params = params;
    manifest.provider = provider;
    manifest.dataset_size = static_cast<long>(dataset.size());

    PartitionPlan plan;
    switch (params.strategy) {
        case Strategy::Sequential:
            plan = partition_sequential(dataset, params.n, params.seed);
            break;
        case Strategy::Grp:
            plan = partition_grp(dataset, params.n, params.seed);
            break;
        case Strategy::Mix:
            plan = partition_mix(dataset, params.n, params.seed);
            break;
        case Strategy::Fil: {
            if (!params.target_topic)
                throw ConfigError("strategy fil requires a target topic");
            plan = partition_mix(dataset, params.n, params.seed);
            manifest.mask = restrict_fil(plan, *params.target_topic);
            for (auto& b : plan.batches) b.target_topic = params.target_topic;
            break;
        }
    }
    manifest.partition = plan_to_json(plan);

    std::vector<RenderedPrompt> prompts;
    prompts.reserve(plan.batches.size());
    for (const auto& b : plan.batches)
        prompts.push_back(b.instances.size() == 1 ? render_single(spec, b.instances.front(), b.batch_id)
                                                  : render_batch(spec, b));

    detail::PipelineState st{spec, provider, backend, params.recovery, manifest, 0, 0};
    std::vector<Exchange> initial = dispatch_all(provider, prompts, backend);
    manifest.exchanges = initial;

    std::vector<std::size_t> mismatched;
    for (std::size_t i = 0; i < plan.batches.size(); ++i) {
        ParsedLabels parsed = detail::record_parse(st, plan.batches[i].batch_id, "initial",
                                                   initial[i].response_text, prompts[i].expected_count);
        if (parsed.status == ParseStatus::Mismatch)
            mismatched.push_back(i);
        else
            detail::assign_labels(st, plan.batches[i], parsed);
    }
    for (auto i : mismatched)
        manifest.recoveries.push_back(detail::recover_mismatch(st, plan.batches[i]));

    manifest.cost = accumulate(manifest.exchanges, static_cast<long>(dataset.size()), params.token_scope);

    std::map<std::string, Label> gold;
    std::map<std::string, std::string> topics;
    for (const auto& inst : dataset) {
        if (inst.gold) gold.emplace(inst.id, Label{*inst.gold});
        if (inst.topic) topics.emplace(inst.id, *inst.topic);
    }
    if (!gold.empty()) {
        std::map<std::string, Label> predictions;
        for (const auto& [id, label] : manifest.predictions) predictions.emplace(id, Label{label});
        std::optional<std::set<std::string>> eval_mask = manifest.mask;
        if (eval_mask) {
            // fil: score only masked ids that carry gold.
            std::set<std::string> golded;
            for (const auto& id : *eval_mask)
                if (gold.count(id)) golded.insert(id);
            eval_mask = golded;
        }
        EvalReport report = score(predictions, gold, spec, eval_mask, topics);
        report.mismatch_rate = st.parse_events
                                   ? static_cast<double>(st.mismatch_events) / static_cast<double>(st.parse_events)
                                   : 0.0;
        manifest.eval = report;
    }
}

// ---------------------------------------------------------------------------
// Manifest serialization

inline void to_json(nlohmann::json& j, const Exchange& e) {
    j = nlohmann::json{{"batch_id", e.batch_id},
                       {"response_text", e.response_text},
                       {"wall_time_s", e.wall_time_s},
                       {"attempt_times_s", e.attempt_times_s},
                       {"prompt_tokens", e.prompt_tokens},
                       {"completion_tokens", e.completion_tokens},
                       {"token_source", to_string(e.token_source)},
                       {"attempt", e.attempt}};
}

inline void to_json(nlohmann::json& j, const ParseEvent& p) {
    j = nlohmann::json{{"batch_id", p.batch_id}, {"phase", p.phase}, {"parsed", p.parsed}};
}

inline void to_json(nlohmann::json& j, const RecoverySummary& r) {
    j = nlohmann::json{{"batch_id", r.batch_id}, {"dispatches", r.dispatches}, {"outcome", r.outcome}};
}

inline void to_json(nlohmann::json& j, const MockSettings& m) {
    j = nlohmann::json{{"persona", to_string(m.persona)},
                       {"lexicon", m.lexicon},
                       {"latency_s", m.latency_s}};
}

inline void from_json(const nlohmann::json& j, MockSettings& m) {
    m.persona = persona_from_string(j.value("persona", "plain-json"));
    if (j.contains("lexicon")) j.at("lexicon").get_to(m.lexicon);
    m.latency_s = j.value("latency_s", 0.0);
}

inline nlohmann::json manifest_to_json(const RunManifest& m) {
    nlohmann::json j;
    j["tool"] = {{"name", m.tool_name}, {"version", m.tool_version}};
    j["task"] = m.task;
    j["dataset"] = {{"path", m.dataset_path}, {"fnv1a64", m.dataset_hash}, {"instances", m.dataset_size}};
    j["params"] = {{"n", m.params.n},
                   {"strategy", to_string(m.params.strategy)},
                   {"seed", m.params.seed},
                   {"token_scope", to_string(m.params.token_scope)},
                   {"redispatch_limit", m.params.recovery.redispatch_limit}};
    if (m.params.target_topic) j["params"]["target_topic"] = *m.params.target_topic;
    j["provider"] = m.provider;
    j["backend"] = m.backend;
    if (m.mock) j["mock"] = *m.mock;
    j["partition"] = m.partition;
    j["exchanges"] = m.exchanges;
    j["parses"] = m.parses;
    j["recoveries"] = m.recoveries;
    j["predictions"] = m.predictions;
    j["unlabeled"] = m.unlabeled;
    if (m.mask) j["mask"] = *m.mask;
    j["cost"] = m.cost;
    if (m.eval) j["eval"] = *m.eval;
    j["incomplete"] = m.incomplete;
    if (!m.error.empty()) j["error"] = m.error;
    return j;
}

/// Loads the manifest fields needed for reporting and replay.
inline RunManifest load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open manifest: " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("manifest is not valid JSON: " + path);

    RunManifest m;
    m.tool_name = j.at("tool").value("name", kToolName);
    m.tool_version = j.at("tool").value("version", "");
    j.at("task").get_to(m.task);
    m.dataset_path = j.at("dataset").value("path", "");
    m.dataset_hash = j.at("dataset").value("fnv1a64", "");
    m.dataset_size = j.at("dataset").value("instances", 0L);
    const auto& p = j.at("params");
    m.params.n = p.at("n").get<long>();
    m.params.strategy = strategy_from_string(p.at("strategy").get<std::string>());
    m.params.seed = p.at("seed").get<std::uint64_t>();
    m.params.token_scope = p.value("token_scope", "prompt") == "prompt"
                               ? TokenScope::PromptOnly
                               : TokenScope::PromptPlusCompletion;
    m.params.recovery.redispatch_limit = p.value("redispatch_limit", 1);
    if (p.contains("target_topic")) m.params.target_topic = p.at("target_topic").get<std::string>();
    j.at("provider").get_to(m.provider);
    m.backend = j.value("backend", "mock");
    if (j.contains("mock")) m.mock = j.at("mock").get<MockSettings>();
    if (j.contains("partition")) m.partition = j.at("partition");
    if (j.contains("predictions"))
        m.predictions = j.at("predictions").get<std::map<std::string, std::string>>();
    if (j.contains("unlabeled")) m.unlabeled = j.at("unlabeled").get<std::vector<std::string>>();
    if (j.contains("mask")) m.mask = j.at("mask").get<std::set<std::string>>();
    if (j.contains("cost")) j.at("cost").get_to(m.cost);
    if (j.contains("eval")) m.eval = j.at("eval").get<EvalReport>();
    m.incomplete = j.value("incomplete", false);
    m.error = j.value("error", "");
    return m;
}

/// Write-temp-then-rename, so an interrupted run never leaves a torn file.
inline void write_atomic(const std::filesystem::path& path, const std::string& bytes) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write: " + tmp.string());
        out << bytes;
    }
    std::filesystem::rename(tmp, path);
}

inline void write_manifest_dir(const std::filesystem::path& dir, const RunManifest& m) {
    std::filesystem::create_directories(dir);
    write_atomic(dir / "run_manifest.json", manifest_to_json(m).dump(2) + "\n");
    write_atomic(dir / "predictions.json", nlohmann::json(m.predictions).dump(2) + "\n");
    write_atomic(dir / "cost_report.json", nlohmann::json(m.cost).dump(2) + "\n");
    if (m.eval) write_atomic(dir / "eval_report.json", nlohmann::json(*m.eval).dump(2) + "\n");
}

}  // namespace batchprompt
