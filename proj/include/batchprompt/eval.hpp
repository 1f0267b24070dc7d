#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "batchprompt/errors.hpp"
#include "batchprompt/mock.hpp"
#include "batchprompt/parse.hpp"
#include "batchprompt/provider.hpp"
#include "batchprompt/render.hpp"
#include "batchprompt/task.hpp"

namespace batchprompt {

struct LabelScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    long support = 0;
};

struct TopicScore {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    long scored = 0;
};

/// Accuracy and macro-F1 in two views: over the instances that received a
/// label (`accuracy`, `macro_f1`) and over every eligible instance with
/// unlabeled ones counted as errors (`*_over_all`, the headline view).
/// Macro-F1 always averages across the full label set; a label never
/// predicted and never gold still contributes f1 = 0.
struct EvalReport {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    double accuracy_over_all = 0.0;
    double macro_f1_over_all = 0.0;
    std::map<std::string, LabelScore> per_label;
    std::map<std::string, TopicScore> per_topic;
    long scored = 0;
    long unlabeled = 0;
    double mismatch_rate = 0.0;  // filled in by the run orchestration
};

namespace detail {

struct Confusion {
    std::map<std::string, long> tp, fp, fn;
    long correct = 0;
    long total = 0;
};

inline double macro_f1_of(const Confusion& c, const std::vector<std::string>& labels,
                          std::map<std::string, LabelScore>* per_label = nullptr) {
    double sum = 0;
    for (const auto& l : labels) {
        const double tp = static_cast<double>(c.tp.count(l) ? c.tp.at(l) : 0);
        const double fp = static_cast<double>(c.fp.count(l) ? c.fp.at(l) : 0);
        const double fn = static_cast<double>(c.fn.count(l) ? c.fn.at(l) : 0);
        const double precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
        const double recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
        const double f1 = precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
        if (per_label)
            (*per_label)[l] = LabelScore{precision, recall, f1, static_cast<long>(tp + fn)};
        sum += f1;
    }
    return sum / static_cast<double>(labels.size());
}

}  // namespace detail

/// Scores predictions against gold over `mask` (default: every gold id).
/// Ids in the mask without a prediction count as unlabeled. Inputs are maps,
/// so scoring is invariant to any ordering. `topics` enables the per-topic
/// breakdown.
inline EvalReport score(const std::map<std::string, Label>& predictions,
                        const std::map<std::string, Label>& gold, const TaskSpec& spec,
                        const std::optional<std::set<std::string>>& mask = std::nullopt,
                        const std::map<std::string, std::string>& topics = {}) {
    std::set<std::string> eligible;
    if (mask) {
        eligible = *mask;
        for (const auto& id : eligible)
            if (!gold.count(id)) throw MissingGold(id);
    } else {
        for (const auto& [id, _] : gold) eligible.insert(id);
    }

    detail::Confusion labeled, over_all;
    for (const auto& id : eligible) {
        const Label& g = gold.at(id);
        auto it = predictions.find(id);
        ++over_all.total;
        if (it == predictions.end()) {
            over_all.fn[g.canonical]++;  // an unlabeled instance is an error against its gold label
            continue;
        }
        ++labeled.total;
        for (auto* c : {&labeled, &over_all}) {
            if (it->second == g) {
                c->tp[g.canonical]++;
                c->correct++;
            } else {
                c->fp[it->second.canonical]++;
                c->fn[g.canonical]++;
            }
        }
    }

    EvalReport r;
    r.scored = labeled.total;
    r.unlabeled = over_all.total - labeled.total;
    r.accuracy = labeled.total ? static_cast<double>(labeled.correct) / static_cast<double>(labeled.total) : 0.0;
    r.accuracy_over_all =
        over_all.total ? static_cast<double>(over_all.correct) / static_cast<double>(over_all.total) : 0.0;
    r.macro_f1 = detail::macro_f1_of(labeled, spec.labels, &r.per_label);
    r.macro_f1_over_all = detail::macro_f1_of(over_all, spec.labels);

    if (!topics.empty()) {
        std::set<std::string> seen;
        for (const auto& id : eligible)
            if (auto it = topics.find(id); it != topics.end()) seen.insert(it->second);
        for (const auto& t : seen) {
            std::set<std::string> sub;
            for (const auto& id : eligible)
                if (auto it = topics.find(id); it != topics.end() && it->second == t) sub.insert(id);
            EvalReport tr = score(predictions, gold, spec, sub);
            r.per_topic[t] = TopicScore{tr.accuracy, tr.macro_f1, tr.scored};
        }
    }
    return r;
}

/// One strategy's contribution to the per-topic comparison table.
struct StrategyRun {
    std::map<std::string, Label> predictions;
    std::optional<std::set<std::string>> mask;  // fil carries its target-topic mask
};

struct StrategyTopicTable {
    std::vector<std::string> topics;
    std::vector<std::string> strategies;
    // cells[topic][strategy]; absent when the strategy's mask excludes the topic.
    std::map<std::string, std::map<std::string, TopicScore>> cells;
};

inline StrategyTopicTable compare_strategies(const std::map<std::string, StrategyRun>& runs,
                                             const std::map<std::string, Label>& gold,
                                             const TaskSpec& spec,
                                             const std::map<std::string, std::string>& topics) {
    StrategyTopicTable out;
    std::set<std::string> topic_set;
    for (const auto& [_, t] : topics) topic_set.insert(t);
    out.topics.assign(topic_set.begin(), topic_set.end());
    for (const auto& [name, _] : runs) out.strategies.push_back(name);

    for (const auto& topic : out.topics) {
        std::set<std::string> topic_ids;
        for (const auto& [id, t] : topics)
            if (t == topic && gold.count(id)) topic_ids.insert(id);
        for (const auto& [name, run] : runs) {
            std::set<std::string> cell_ids;
            if (run.mask) {
                std::set_intersection(topic_ids.begin(), topic_ids.end(), run.mask->begin(),
                                      run.mask->end(), std::inserter(cell_ids, cell_ids.begin()));
            } else {
                cell_ids = topic_ids;
            }
            if (cell_ids.empty()) continue;
            EvalReport r = score(run.predictions, gold, spec, cell_ids);
            out.cells[topic][name] = TopicScore{r.accuracy, r.macro_f1, r.scored};
        }
    }
    return out;
}

inline std::string to_text(const StrategyTopicTable& t) {
    std::ostringstream os;
    os << std::left << std::setw(18) << "topic";
    for (const auto& s : t.strategies)
        os << std::setw(12) << (s + " acc") << std::setw(12) << (s + " f1");
    os << "\n" << std::fixed << std::setprecision(4);
    for (const auto& topic : t.topics) {
        os << std::setw(18) << topic;
        for (const auto& s : t.strategies) {
            auto row = t.cells.find(topic);
            if (row != t.cells.end() && row->second.count(s)) {
                const auto& c = row->second.at(s);
                os << std::setw(12) << c.accuracy << std::setw(12) << c.macro_f1;
            } else {
                os << std::setw(12) << "-" << std::setw(12) << "-";
            }
        }
        os << "\n";
    }
    return os.str();
}

/// Order-robustness probe: k seeded uniform permutations of one batch, each
/// run through render -> dispatch -> parse -> score.
struct AblationStats {
    double mean = 0.0;
    double variance = 0.0;
    double max_accuracy = 0.0;
    double min_accuracy = 0.0;
    long orders = 0;
    bool partial = false;  // a dispatch error aborted the sweep early
};

inline AblationStats permutation_ablation(const Batch& batch, long k, std::uint64_t seed,
                                          Backend& backend, const ProviderConfig& cfg,
                                          const TaskSpec& spec) {
    if (k < 1) throw ConfigError("permutation count must be >= 1");
    for (const auto& inst : batch.instances)
        if (!inst.gold) throw MissingGold(inst.id);

    std::mt19937_64 rng(seed);
    std::vector<double> accs;
    AblationStats stats;
    for (long order = 0; order < k; ++order) {
        Batch permuted = batch;
        for (std::size_t i = permuted.instances.size(); i > 1; --i)
            std::swap(permuted.instances[i - 1], permuted.instances[rng() % i]);
        RenderedPrompt prompt = permuted.instances.size() == 1
                                    ? render_single(spec, permuted.instances.front(), permuted.batch_id)
                                    : render_batch(spec, permuted);
        try {
            Exchange ex = dispatch(cfg, prompt, backend);
            ParsedLabels parsed = parse_response(ex.response_text, prompt.expected_count, spec);
            long correct = 0;
            for (const auto& [pos, label] : parsed.assignments)
                if (label.canonical == *permuted.instances[static_cast<std::size_t>(pos)].gold) ++correct;
            accs.push_back(static_cast<double>(correct) /
                           static_cast<double>(permuted.instances.size()));
        } catch (const TransportError&) {
            stats.partial = true;
            break;
        }
    }
    if (accs.empty()) return stats;
    stats.orders = static_cast<long>(accs.size());
    stats.max_accuracy = *std::max_element(accs.begin(), accs.end());
    stats.min_accuracy = *std::min_element(accs.begin(), accs.end());
    if (stats.max_accuracy == stats.min_accuracy) {
        // All orders scored identically; report the exact common value so an
        // order-free backend yields variance 0, not accumulated rounding dust.
        stats.mean = stats.max_accuracy;
        stats.variance = 0.0;
        return stats;
    }
    double sum = 0;
    for (double a : accs) sum += a;
    stats.mean = sum / static_cast<double>(accs.size());
    double var = 0;
    for (double a : accs) var += (a - stats.mean) * (a - stats.mean);
    stats.variance = var / static_cast<double>(accs.size());
    return stats;
}

}  // namespace batchprompt
