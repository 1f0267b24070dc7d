#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "batchprompt/batchprompt.hpp"

namespace bptest {

inline std::string fixture_path(const std::string& rel) {
    return std::string(FIXTURES_DIR) + "/" + rel;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline batchprompt::FileConfig fixture_config(const std::string& name) {
    return batchprompt::load_config(fixture_path("tasks/" + name + ".json"));
}

inline std::vector<batchprompt::TaskInstance> fixture_data(const std::string& name,
                                                           const batchprompt::TaskSpec& spec) {
    return batchprompt::ingest_dataset(fixture_path("data/" + name + ".jsonl"), spec);
}

// Minimal two-label spec for synthetic cases.
inline batchprompt::TaskSpec tiny_spec() {
    batchprompt::TaskSpec s;
    s.name = "tiny";
    s.description = "Sentiment Analysis";
    s.labels = {"positive", "negative"};
    s.aliases = {{"pos", "positive"}};
    s.single_template = "Read this:\n{instance}\nGive me the label only: ";
    s.multi_template = "Read these:\n{instances}\nReturn in JSON format, such as: {format_example}: ";
    s.field_order = {"sentence"};
    return s;
}

inline batchprompt::TaskInstance inst(std::string id, std::string text, const char* gold = nullptr,
                                      const char* topic = nullptr) {
    batchprompt::TaskInstance i;
    i.id = std::move(id);
    i.fields["sentence"] = std::move(text);
    if (gold) i.gold = gold;
    if (topic) i.topic = topic;
    return i;
}

inline batchprompt::MockLexicon tiny_lexicon() {
    return {{{"charming", "positive"}, {"wonderful", "positive"}, {"tedious", "negative"}},
            "negative"};
}

// Backend whose persona follows a per-call schedule (last entry repeats).
class ScriptedBackend : public batchprompt::Backend {
  public:
    ScriptedBackend(std::vector<batchprompt::MockPersona> schedule, batchprompt::MockLexicon lexicon)
        : schedule_(std::move(schedule)), lexicon_(std::move(lexicon)) {}

    batchprompt::Completion complete(const batchprompt::ProviderConfig&,
                                     const std::string& prompt) override {
        const std::size_t call = calls_++;
        auto persona = schedule_[std::min(call, schedule_.size() - 1)];
        batchprompt::Completion c;
        c.text = batchprompt::mock_complete(prompt, persona, lexicon_);
        c.simulated_wall_s = 0.0;
        return c;
    }

    long calls() const { return static_cast<long>(calls_); }

  private:
    std::vector<batchprompt::MockPersona> schedule_;
    batchprompt::MockLexicon lexicon_;
    std::size_t calls_ = 0;
};

class CountingBackend : public batchprompt::Backend {
  public:
    explicit CountingBackend(batchprompt::Backend& inner) : inner_(inner) {}
    batchprompt::Completion complete(const batchprompt::ProviderConfig& cfg,
                                     const std::string& prompt) override {
        ++calls_;
        return inner_.complete(cfg, prompt);
    }
    long calls() const { return calls_; }

  private:
    batchprompt::Backend& inner_;
    long calls_ = 0;
};

}  // namespace bptest
