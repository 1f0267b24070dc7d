#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "helpers.hpp"

using namespace batchprompt;

namespace {

RunManifest mock_run(const FileConfig& cfg, const std::vector<TaskInstance>& data, RunParams params,
                     double latency = 0.0) {
    MockBackend backend(cfg.mock ? cfg.mock->persona : MockPersona::PlainJson,
                        cfg.mock ? cfg.mock->lexicon : MockLexicon{}, latency);
    ProviderConfig provider;
    RunManifest m;
    m.backend = "mock";
    m.mock = cfg.mock;
    run_pipeline(cfg.task, data, params, provider, backend, m);
    return m;
}

}  // namespace

TEST_CASE("mock runs are byte-reproducible") {
    auto cfg = bptest::fixture_config("sst2");
    auto data = bptest::fixture_data("sst2_100", cfg.task);
    RunParams params{.n = 10, .strategy = Strategy::Mix, .seed = 77};
    auto a = manifest_to_json(mock_run(cfg, data, params)).dump(2);
    auto b = manifest_to_json(mock_run(cfg, data, params)).dump(2);
    CHECK(a == b);

    SECTION("different seeds shuffle differently but score identically") {
        auto m1 = mock_run(cfg, data, {.n = 10, .strategy = Strategy::Mix, .seed = 1});
        auto m2 = mock_run(cfg, data, {.n = 10, .strategy = Strategy::Mix, .seed = 2});
        CHECK(m1.partition != m2.partition);
        CHECK(m1.predictions == m2.predictions);
    }
}

TEST_CASE("batched predictions equal the n=1 run on the context-free mock") {
    auto cfg = bptest::fixture_config("sst2");
    auto data = bptest::fixture_data("sst2_100", cfg.task);
    auto baseline = mock_run(cfg, data, {.n = 1, .strategy = Strategy::Sequential, .seed = 0});
    auto batched = mock_run(cfg, data, {.n = 10, .strategy = Strategy::Sequential, .seed = 0});
    CHECK(baseline.predictions == batched.predictions);
    CHECK(batched.cost.c_token < baseline.cost.c_token);
    REQUIRE(batched.eval.has_value());
    CHECK(batched.eval->accuracy == 1.0);  // fixture gold is lexicon-derived
}

TEST_CASE("every instance lands in predictions or unlabeled exactly once") {
    auto cfg = bptest::fixture_config("sst2");
    auto data = bptest::fixture_data("mock200", cfg.task);
    std::mt19937_64 rng(13);
    for (auto persona : {MockPersona::PlainJson, MockPersona::OneBasedKeysMissingFirst,
                         MockPersona::DegenerateRepetition, MockPersona::LabelListNoJson}) {
        FileConfig cfg2 = cfg;
        cfg2.mock->persona = persona;
        RunParams params{.n = 1 + static_cast<long>(rng() % 20),
                         .strategy = Strategy::Mix,
                         .seed = rng()};
        auto m = mock_run(cfg2, data, params);
        std::set<std::string> seen;
        for (const auto& [id, _] : m.predictions) REQUIRE(seen.insert(id).second);
        for (const auto& id : m.unlabeled) REQUIRE(seen.insert(id).second);
        CHECK(seen.size() == data.size());
    }
}

TEST_CASE("strategy fil masks evaluation to the target topic") {
    auto cfg = bptest::fixture_config("fever");
    auto data = bptest::fixture_data("fever_topics", cfg.task);
    RunParams params{.n = 6, .strategy = Strategy::Fil, .seed = 5};
    params.target_topic = "Samsung";
    auto m = mock_run(cfg, data, params);
    REQUIRE(m.mask.has_value());
    CHECK(m.mask->size() == 5);
    REQUIRE(m.eval.has_value());
    CHECK(m.eval->scored + m.eval->unlabeled == 5);

    SECTION("fil without a topic is a configuration error before any dispatch") {
        RunParams broken{.n = 6, .strategy = Strategy::Fil, .seed = 5};
        MockBackend backend(MockPersona::PlainJson, cfg.mock->lexicon);
        bptest::CountingBackend counter(backend);
        ProviderConfig provider;
        RunManifest manifest;
        CHECK_THROWS_AS(run_pipeline(cfg.task, data, broken, provider, counter, manifest), ConfigError);
        CHECK(counter.calls() == 0);
    }
    SECTION("fil with an unknown topic fails before any dispatch") {
        RunParams broken{.n = 6, .strategy = Strategy::Fil, .seed = 5};
        broken.target_topic = "Nokia";
        MockBackend backend(MockPersona::PlainJson, cfg.mock->lexicon);
        bptest::CountingBackend counter(backend);
        ProviderConfig provider;
        RunManifest manifest;
        CHECK_THROWS_AS(run_pipeline(cfg.task, data, broken, provider, counter, manifest), UnknownTopic);
        CHECK(counter.calls() == 0);
    }
}

TEST_CASE("recovery: one bad response heals on the unchanged re-dispatch") {
    auto spec = bptest::tiny_spec();
    std::vector<TaskInstance> data;
    for (int i = 0; i < 10; ++i)
        data.push_back(bptest::inst("i" + std::to_string(i), i % 2 ? "charming piece" : "tedious piece",
                                    i % 2 ? "positive" : "negative"));
    bptest::ScriptedBackend backend({MockPersona::DegenerateRepetition, MockPersona::PlainJson},
                                    bptest::tiny_lexicon());
    ProviderConfig provider;
    RunParams params{.n = 10, .strategy = Strategy::Sequential, .seed = 0};
    RunManifest m;
    run_pipeline(spec, data, params, provider, backend, m);

    CHECK(m.predictions.size() == 10);
    CHECK(m.unlabeled.empty());
    REQUIRE(m.recoveries.size() == 1);
    CHECK(m.recoveries[0].outcome == "redispatch");
    CHECK(m.recoveries[0].dispatches == 1);
    CHECK(backend.calls() == 2);
    REQUIRE(m.eval.has_value());
    CHECK(m.eval->accuracy == 1.0);
    CHECK(m.eval->mismatch_rate == 0.5);  // one mismatch across two parses
}

TEST_CASE("recovery: a persona that never fixes multi prompts splits to singletons") {
    auto spec = bptest::tiny_spec();
    std::vector<TaskInstance> data;
    for (int i = 0; i < 4; ++i)
        data.push_back(bptest::inst("i" + std::to_string(i), i % 2 ? "charming piece" : "tedious piece",
                                    i % 2 ? "positive" : "negative"));
    // Always mismatches on multi prompts, clean bare label on singles.
    bptest::ScriptedBackend backend({MockPersona::OneBasedKeysMissingFirst}, bptest::tiny_lexicon());
    ProviderConfig provider;
    RunParams params{.n = 4, .strategy = Strategy::Sequential, .seed = 0};
    RunManifest m;
    run_pipeline(spec, data, params, provider, backend, m);

    CHECK(m.predictions.size() == 4);
    CHECK(m.unlabeled.empty());
    REQUIRE(m.recoveries.size() == 1);
    CHECK(m.recoveries[0].outcome == "split");
    // re-dispatch (1) + two halves (2) + four singletons (4) = 7 = 2n-1
    CHECK(m.recoveries[0].dispatches == 7);
    long singleton_parses = 0;
    for (const auto& p : m.parses) singleton_parses += p.phase == "singleton";
    CHECK(singleton_parses == 4);
    REQUIRE(m.eval.has_value());
    CHECK(m.eval->accuracy == 1.0);
}

TEST_CASE("recovery: an unmappable singleton is marked unlabeled, not fatal") {
    auto spec = bptest::tiny_spec();
    // Lexicon answers a label the task does not know.
    MockLexicon off_vocab{{}, "mu"};
    std::vector<TaskInstance> data = {bptest::inst("only", "whatever text", "positive")};
    MockBackend backend(MockPersona::PlainJson, off_vocab);
    ProviderConfig provider;
    RunParams params{.n = 1, .strategy = Strategy::Sequential, .seed = 0};
    RunManifest m;
    run_pipeline(spec, data, params, provider, backend, m);
    CHECK(m.predictions.empty());
    CHECK(m.unlabeled == std::vector<std::string>{"only"});
    REQUIRE(m.eval.has_value());
    CHECK(m.eval->scored == 0);
    CHECK(m.eval->unlabeled == 1);
    CHECK(m.eval->accuracy_over_all == 0.0);
}

TEST_CASE("a clean singleton batch never enters recovery") {
    auto spec = bptest::tiny_spec();
    std::vector<TaskInstance> data = {bptest::inst("a", "charming piece", "positive")};
    MockBackend inner(MockPersona::PlainJson, bptest::tiny_lexicon());
    bptest::CountingBackend backend(inner);
    ProviderConfig provider;
    RunParams params{.n = 1, .strategy = Strategy::Sequential, .seed = 0};
    RunManifest m;
    run_pipeline(spec, data, params, provider, backend, m);
    CHECK(backend.calls() == 1);
    CHECK(m.recoveries.empty());
    CHECK(m.predictions.at("a") == "positive");
}

TEST_CASE("c_time decreases with n under a fixed simulated latency") {
    auto cfg = bptest::fixture_config("sst2");
    auto data = bptest::fixture_data("mock200", cfg.task);
    std::map<long, double> c_time;
    for (long n : {1L, 10L, 20L}) {
        auto m = mock_run(cfg, data, {.n = n, .strategy = Strategy::Sequential, .seed = 0}, 0.05);
        c_time[n] = m.cost.c_time;
    }
    CHECK(c_time[1] == Catch::Approx(0.05));
    CHECK(c_time[10] < c_time[1]);
    CHECK(c_time[20] < c_time[10]);
}

TEST_CASE("manifests without gold omit the eval report") {
    auto spec = bptest::tiny_spec();
    std::vector<TaskInstance> data = {bptest::inst("a", "charming piece"), bptest::inst("b", "tedious piece")};
    MockBackend backend(MockPersona::PlainJson, bptest::tiny_lexicon());
    ProviderConfig provider;
    RunParams params{.n = 2, .strategy = Strategy::Sequential, .seed = 0};
    RunManifest m;
    run_pipeline(spec, data, params, provider, backend, m);
    CHECK_FALSE(m.eval.has_value());
    CHECK(m.predictions.size() == 2);  // annotator mode still labels everything
}
