// Command-line front end: run / ablate / report / replay over line-delimited
// datasets, with manifests that make every mock-backend run exactly
// replayable.

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "batchprompt/batchprompt.hpp"
#include "batchprompt/http_client.hpp"

namespace bp = batchprompt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitTransport = 2;
constexpr int kExitNoGold = 3;

std::unique_ptr<bp::Backend> make_backend(const std::string& name,
                                          const std::optional<bp::MockSettings>& mock) {
    if (name == "mock") {
        bp::MockSettings s = mock.value_or(bp::MockSettings{});
        return std::make_unique<bp::MockBackend>(s.persona, s.lexicon, s.latency_s);
    }
    if (name == "live") return std::make_unique<bp::HttpBackend>();
    throw bp::ConfigError("backend must be 'live' or 'mock', got '" + name + "'");
}

std::string eval_text(const bp::EvalReport& e) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(4);
    os << "accuracy " << e.accuracy_over_all << "  macro-f1 " << e.macro_f1_over_all
       << "  (over all " << (e.scored + e.unlabeled) << " instances; unlabeled count as errors)\n";
    os << "  labeled-only view: accuracy " << e.accuracy << "  macro-f1 " << e.macro_f1 << "  scored "
       << e.scored << "  unlabeled " << e.unlabeled << "  mismatch-rate " << e.mismatch_rate << "\n";
    return os.str();
}

struct RunArgs {
    std::string task_file;
    std::string data_file;
    long n = -1;
    std::string strategy;
    std::string backend;
    long seed = -1;
    std::string topic;
    std::string token_scope;
    std::string out_dir;
};

bp::RunParams merge_params(const RunArgs& a, const nlohmann::json& file_defaults) {
    bp::RunParams p;
    p.n = a.n >= 0 ? a.n : file_defaults.value("n", 10L);
    p.seed = a.seed >= 0 ? static_cast<std::uint64_t>(a.seed)
                         : file_defaults.value("seed", std::uint64_t{0});
    std::string strategy =
        !a.strategy.empty() ? a.strategy : file_defaults.value("strategy", std::string("sequential"));
    p.strategy = bp::strategy_from_string(strategy);
    if (!a.topic.empty())
        p.target_topic = a.topic;
    else if (file_defaults.contains("target_topic"))
        p.target_topic = file_defaults["target_topic"].get<std::string>();
    std::string scope =
        !a.token_scope.empty() ? a.token_scope : file_defaults.value("token_scope", std::string("prompt"));
    if (scope != "prompt" && scope != "prompt+completion")
        throw bp::ConfigError("token scope must be 'prompt' or 'prompt+completion'");
    p.token_scope = scope == "prompt" ? bp::TokenScope::PromptOnly : bp::TokenScope::PromptPlusCompletion;
    return p;
}

int cmd_run(const RunArgs& args) {
    bp::FileConfig cfg = bp::load_config(args.task_file);
    std::string backend_name = !args.backend.empty()
                                   ? args.backend
                                   : cfg.run_defaults.value("backend", std::string("mock"));
    bp::RunParams params = merge_params(args, cfg.run_defaults);
    auto dataset = bp::ingest_dataset(args.data_file, cfg.task);

    bp::RunManifest manifest;
    manifest.dataset_path = args.data_file;
    manifest.dataset_hash = bp::dataset_hash(args.data_file);
    manifest.backend = backend_name;
    if (backend_name == "mock") manifest.mock = cfg.mock.value_or(bp::MockSettings{});
    auto backend = make_backend(backend_name, manifest.mock);

    int exit_code = kExitOk;
    try {
        bp::run_pipeline(cfg.task, dataset, params, cfg.provider, *backend, manifest);
    } catch (const bp::TransportError& e) {
        manifest.incomplete = true;
        manifest.error = e.what();
        exit_code = kExitTransport;
    }
    bp::write_manifest_dir(args.out_dir, manifest);

    std::map<long, bp::CostReport> settings{{params.n, manifest.cost}};
    std::cout << bp::to_text(bp::compare_settings(settings, cfg.task.name));
    if (manifest.eval) std::cout << eval_text(*manifest.eval);
    std::cout << "manifest: " << (std::filesystem::path(args.out_dir) / "run_manifest.json").string()
              << (manifest.incomplete ? "  (incomplete: " + manifest.error + ")" : "") << "\n";

    if (exit_code == kExitOk && !manifest.eval) exit_code = kExitNoGold;
    return exit_code;
}

int cmd_ablate(const RunArgs& args, long orders) {
    bp::FileConfig cfg = bp::load_config(args.task_file);
    std::string backend_name = !args.backend.empty()
                                   ? args.backend
                                   : cfg.run_defaults.value("backend", std::string("mock"));
    bp::RunParams params = merge_params(args, cfg.run_defaults);
    auto dataset = bp::ingest_dataset(args.data_file, cfg.task);
    auto backend = make_backend(backend_name, cfg.mock);

    bp::Batch batch;
    batch.batch_id = 0;
    batch.seed = params.seed;
    const std::size_t take = std::min<std::size_t>(dataset.size(), static_cast<std::size_t>(params.n));
    batch.instances.assign(dataset.begin(), dataset.begin() + static_cast<long>(take));
    for (const auto& inst : batch.instances)
        if (!inst.gold) return kExitNoGold;

    bp::AblationStats stats =
        bp::permutation_ablation(batch, orders, params.seed, *backend, cfg.provider, cfg.task);
    std::cout << std::fixed << std::setprecision(4) << "orders " << stats.orders << "  mean "
              << stats.mean << "  variance " << std::setprecision(6) << stats.variance
              << std::setprecision(4) << "  max " << stats.max_accuracy << "  min "
              << stats.min_accuracy << (stats.partial ? "  (partial)" : "") << "\n";
    if (!args.out_dir.empty()) {
        std::filesystem::create_directories(args.out_dir);
        nlohmann::json j{{"orders", stats.orders}, {"mean", stats.mean},
                         {"variance", stats.variance}, {"max_accuracy", stats.max_accuracy},
                         {"min_accuracy", stats.min_accuracy}, {"partial", stats.partial},
                         {"batch_size", batch.instances.size()}, {"seed", params.seed}};
        bp::write_atomic(std::filesystem::path(args.out_dir) / "ablation.json", j.dump(2) + "\n");
    }
    return stats.partial ? kExitTransport : kExitOk;
}

int cmd_report(const std::vector<std::string>& manifest_paths, bool as_json) {
    std::vector<bp::RunManifest> manifests;
    for (const auto& p : manifest_paths) manifests.push_back(bp::load_manifest(p));
    for (const auto& m : manifests) {
        if (m.task.name != manifests.front().task.name || m.dataset_hash != manifests.front().dataset_hash)
            throw bp::IncompatibleManifests("manifests disagree on task or dataset: " + m.task.name);
    }

    std::map<long, bp::CostReport> by_n;
    for (const auto& m : manifests) by_n[m.params.n] = m.cost;
    auto cost_cmp = bp::compare_settings(by_n, manifests.front().task.name);

    nlohmann::json out;
    out["cost"] = nlohmann::json::object();
    for (const auto& [n, r] : by_n) out["cost"][std::to_string(n)] = r;

    std::ostringstream text;
    text << "== cost per instance ==\n" << bp::to_text(cost_cmp) << "\n== performance ==\n";
    text << std::left << std::setw(12) << "strategy" << std::setw(6) << "n" << std::setw(10)
         << "accuracy" << std::setw(10) << "macro-f1" << std::setw(8) << "scored" << std::setw(10)
         << "unlabeled" << "\n";
    out["performance"] = nlohmann::json::array();
    for (const auto& m : manifests) {
        std::string strategy = to_string(m.params.strategy);
        nlohmann::json row{{"strategy", strategy}, {"n", m.params.n}};
        text << std::setw(12) << strategy << std::setw(6) << m.params.n << std::fixed
             << std::setprecision(4);
        if (m.eval) {
            text << std::setw(10) << m.eval->accuracy_over_all << std::setw(10)
                 << m.eval->macro_f1_over_all << std::setw(8) << m.eval->scored << std::setw(10)
                 << m.eval->unlabeled;
            row["eval"] = *m.eval;
        } else {
            text << std::setw(10) << "-" << std::setw(10) << "-" << std::setw(8) << "-"
                 << std::setw(10) << "-";
        }
        text << "\n";
        out["performance"].push_back(std::move(row));
    }

    // Per-topic strategy table when the runs carry topic breakdowns.
    std::set<std::string> strategies;
    for (const auto& m : manifests) strategies.insert(to_string(m.params.strategy));
    bool any_topics = false;
    for (const auto& m : manifests) any_topics = any_topics || (m.eval && !m.eval->per_topic.empty());
    if (any_topics && strategies.size() > 1) {
        bp::StrategyTopicTable table;
        std::set<std::string> topic_set;
        for (const auto& m : manifests)
            if (m.eval)
                for (const auto& [t, _] : m.eval->per_topic) topic_set.insert(t);
        table.topics.assign(topic_set.begin(), topic_set.end());
        for (const auto& m : manifests) {
            std::string label = to_string(m.params.strategy);
            table.strategies.push_back(label);
            if (m.eval)
                for (const auto& [t, sc] : m.eval->per_topic) table.cells[t][label] = sc;
        }
        text << "\n== per-topic by strategy ==\n" << bp::to_text(table);
        for (const auto& [topic, cells] : table.cells)
            for (const auto& [strategy, sc] : cells)
                out["per_topic"][topic][strategy] = sc;
    }

    if (as_json)
        std::cout << out.dump(2) << "\n";
    else
        std::cout << text.str();
    return kExitOk;
}

int cmd_replay(const std::string& manifest_path, const std::string& data_file,
               const std::string& out_dir) {
    bp::RunManifest prior = bp::load_manifest(manifest_path);
    if (!data_file.empty() && bp::dataset_hash(data_file) != prior.dataset_hash)
        throw bp::ConfigError("dataset file does not match the manifest's content hash");
    const std::string data = data_file.empty() ? prior.dataset_path : data_file;
    auto dataset = bp::ingest_dataset(data, prior.task);

    bp::RunManifest manifest;
    manifest.dataset_path = prior.dataset_path;  // keep the recorded path so replays are byte-identical
    manifest.dataset_hash = bp::dataset_hash(data);
    manifest.backend = prior.backend;
    manifest.mock = prior.mock;
    auto backend = make_backend(prior.backend, prior.mock);

    int exit_code = kExitOk;
    try {
        bp::run_pipeline(prior.task, dataset, prior.params, prior.provider, *backend, manifest);
    } catch (const bp::TransportError& e) {
        manifest.incomplete = true;
        manifest.error = e.what();
        exit_code = kExitTransport;
    }
    bp::write_manifest_dir(out_dir, manifest);
    std::cout << "replayed into " << out_dir << "\n";
    if (exit_code == kExitOk && !manifest.eval) exit_code = kExitNoGold;
    return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"batched zero-shot classification over chat-completion endpoints"};
    app.require_subcommand(1);

    RunArgs args;
    long orders = 100;
    std::vector<std::string> manifest_paths;
    std::string replay_manifest;
    bool report_json = false;

    auto add_common = [&](CLI::App* cmd, bool needs_out) {
        cmd->add_option("--task", args.task_file, "task/config JSON file")->required();
        cmd->add_option("--data", args.data_file, "line-delimited dataset file")->required();
        cmd->add_option("--n", args.n, "instances per query");
        cmd->add_option("--seed", args.seed, "partition seed");
        cmd->add_option("--backend", args.backend, "live | mock");
        auto* out = cmd->add_option("--out", args.out_dir, "output directory");
        if (needs_out) out->required();
    };

    auto* run_cmd = app.add_subcommand("run", "partition, dispatch, parse, score; write a manifest");
    add_common(run_cmd, true);
    run_cmd->add_option("--strategy", args.strategy, "sequential | grp | mix | fil");
    run_cmd->add_option("--topic", args.topic, "target topic (fil)");
    run_cmd->add_option("--token-scope", args.token_scope, "prompt | prompt+completion");

    auto* ablate_cmd = app.add_subcommand("ablate", "order-permutation sweep over one batch");
    add_common(ablate_cmd, false);
    ablate_cmd->add_option("--orders", orders, "number of random orders (default 100)");

    auto* report_cmd = app.add_subcommand("report", "cost and performance tables from manifests");
    report_cmd->add_option("manifests", manifest_paths, "run_manifest.json paths")->required();
    report_cmd->add_flag("--json", report_json, "emit machine-readable JSON instead of text");

    auto* replay_cmd = app.add_subcommand("replay", "re-run a manifest's configuration");
    replay_cmd->add_option("--manifest", replay_manifest, "prior run_manifest.json")->required();
    replay_cmd->add_option("--data", args.data_file, "dataset file (defaults to the recorded path)");
    replay_cmd->add_option("--out", args.out_dir, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) return cmd_run(args);
        if (ablate_cmd->parsed()) return cmd_ablate(args, orders);
        if (report_cmd->parsed()) return cmd_report(manifest_paths, report_json);
        if (replay_cmd->parsed()) return cmd_replay(replay_manifest, args.data_file, args.out_dir);
    } catch (const bp::TransportError& e) {
        std::cerr << "transport failure: " << e.what() << "\n";
        return kExitTransport;
    } catch (const bp::MissingGold& e) {
        std::cerr << "evaluation impossible: " << e.what() << "\n";
        return kExitNoGold;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}
