#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace batchprompt;

namespace {

Batch first_k(const std::vector<TaskInstance>& data, std::size_t k) {
    Batch b;
    b.instances.assign(data.begin(), data.begin() + static_cast<long>(k));
    return b;
}

}  // namespace

TEST_CASE("the plain persona reproduces the recorded well-behaved response") {
    auto cfg = bptest::fixture_config("sst2");
    auto data = bptest::fixture_data("sst2_appendix10", cfg.task);
    // Render with the published key-base pairing and classify with the fixture
    // lexicon: the output must equal the recorded clean response exactly.
    auto apx = bptest::fixture_config("sst2_appendix");
    auto prompt = render_batch(apx.task, first_k(data, 10));
    auto text = mock_complete(prompt.text, MockPersona::PlainJson, cfg.mock->lexicon);
    CHECK(text == bptest::read_file(bptest::fixture_path("golden/chatgpt.txt")));
}

TEST_CASE("persona surface forms") {
    auto spec = bptest::tiny_spec();
    auto lex = bptest::tiny_lexicon();
    Batch b;
    b.instances = {bptest::inst("0", "a charming start"), bptest::inst("1", "a tedious middle"),
                   bptest::inst("2", "wonderful ending")};
    const std::string prompt = render_batch(spec, b).text;

    CHECK(mock_complete(prompt, MockPersona::PlainJson, lex) ==
          R"({"0": "positive", "1": "negative", "2": "positive"})");
    CHECK(mock_complete(prompt, MockPersona::LabelListNoJson, lex) == "positive, negative, positive");

    auto prose = mock_complete(prompt, MockPersona::ProseWrappedJson, lex);
    CHECK(prose.find("Sure, here is") == 0);
    CHECK(prose.find("\"1\": \"negative\"") != std::string::npos);

    auto fenced = mock_complete(prompt, MockPersona::CodeFencedJson, lex);
    CHECK(fenced.rfind("```json\n", 0) == 0);

    auto one_based = mock_complete(prompt, MockPersona::OneBasedKeysMissingFirst, lex);
    CHECK(one_based == R"({"1": "negative", "2": "positive"})");  // instance 0 dropped

    auto degenerate = mock_complete(prompt, MockPersona::DegenerateRepetition, lex);
    CHECK(count_occurrences(degenerate, "negative") == 2 * 3 + 6);

    SECTION("single prompts always get one bare label, every persona") {
        const std::string single = render_single(spec, b.instances[0]).text;
        for (auto p : {MockPersona::PlainJson, MockPersona::ProseWrappedJson, MockPersona::CodeFencedJson,
                       MockPersona::OneBasedKeysMissingFirst, MockPersona::DegenerateRepetition,
                       MockPersona::LabelListNoJson})
            CHECK(mock_complete(single, p, lex) == "positive");
    }
    SECTION("deterministic") {
        for (auto p : {MockPersona::PlainJson, MockPersona::ProseWrappedJson})
            CHECK(mock_complete(prompt, p, lex) == mock_complete(prompt, p, lex));
    }
}

TEST_CASE("round-trip: parse(mock(render)) reproduces the lexicon labels for sizes 1..25") {
    auto cfg = bptest::fixture_config("sst2");
    auto spec = cfg.task;
    const auto& lex = cfg.mock->lexicon;

    std::vector<TaskInstance> data;
    for (int i = 0; i < 25; ++i) {
        const char* text = i % 3 == 0   ? "a charming piece"
                           : i % 3 == 1 ? "a tedious piece"
                                        : "an unmarked piece";
        data.push_back(bptest::inst("i" + std::to_string(i), text + std::string(" no ") + std::to_string(i)));
    }

    for (auto persona : {MockPersona::PlainJson, MockPersona::ProseWrappedJson,
                         MockPersona::CodeFencedJson, MockPersona::LabelListNoJson}) {
        for (std::size_t k = 1; k <= 25; ++k) {
            Batch b = first_k(data, k);
            auto prompt = k == 1 ? render_single(spec, b.instances[0]) : render_batch(spec, b);
            auto parsed = parse_response(mock_complete(prompt.text, persona, lex), prompt.expected_count, spec);
            REQUIRE(parsed.status != ParseStatus::Mismatch);
            REQUIRE(parsed.assignments.size() == k);
            for (std::size_t i = 0; i < k; ++i)
                CHECK(parsed.assignments.at(static_cast<int>(i)).canonical ==
                      lex.classify(b.instances[i].fields.at("sentence")));
        }
    }

    SECTION("the two mismatch personas do mismatch on multi prompts") {
        for (auto persona : {MockPersona::OneBasedKeysMissingFirst, MockPersona::DegenerateRepetition})
            for (std::size_t k : {2, 5, 10}) {
                auto prompt = render_batch(spec, first_k(data, k));
                CHECK(parse_response(mock_complete(prompt.text, persona, lex), prompt.expected_count, spec).status ==
                      ParseStatus::Mismatch);
            }
    }
}

TEST_CASE("escaped quotes and multi-field instances survive the mock round trip") {
    auto cfg = bptest::fixture_config("vitaminc");
    MockLexicon lex{{{"never", "refute"}}, "support"};
    Batch b;
    TaskInstance t1;
    t1.id = "a";
    t1.fields = {{"claim", "he said \"never\" again"}, {"evidence", "quoted \"words\" here"}};
    TaskInstance t2;
    t2.id = "b";
    t2.fields = {{"claim", "plain claim"}, {"evidence", "plain evidence"}};
    b.instances = {t1, t2};
    auto prompt = render_batch(cfg.task, b);
    auto parsed = parse_response(mock_complete(prompt.text, MockPersona::PlainJson, lex), 2, cfg.task);
    REQUIRE(parsed.status == ParseStatus::Clean);
    CHECK(parsed.assignments.at(0).canonical == "refute");
    CHECK(parsed.assignments.at(1).canonical == "support");
}
