#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "batchprompt/errors.hpp"
#include "batchprompt/strings.hpp"
#include "batchprompt/task.hpp"

namespace batchprompt {

/// A disjoint covering split of a dataset into batches of size <= n.
struct PartitionPlan {
    std::vector<Batch> batches;
    std::size_t n = 1;
    Strategy strategy = Strategy::Sequential;
    std::uint64_t seed = 0;
    // Leftovers always land in one short final batch (per group); nothing is
    // padded or redistributed, so token accounting stays exact.
};

namespace detail {

inline void check_partition_args(const std::vector<TaskInstance>& dataset, long n) {
    if (n < 1) throw InvalidN(n);
    if (dataset.empty()) throw EmptyDataset();
}

inline void append_chunks(std::vector<Batch>& out, const std::vector<TaskInstance>& instances,
                          std::size_t n, Strategy strategy, std::uint64_t seed) {
    for (std::size_t begin = 0; begin < instances.size(); begin += n) {
        Batch b;
        b.batch_id = static_cast<int>(out.size());
        b.strategy = strategy;
        b.seed = seed;
        auto end = std::min(begin + n, instances.size());
        b.instances.assign(instances.begin() + static_cast<long>(begin),
                           instances.begin() + static_cast<long>(end));
        out.push_back(std::move(b));
    }
}

// Fisher-Yates over mt19937_64. std::shuffle is implementation-defined, so a
// fixed seed would not reproduce across standard libraries; this does.
template <typename T>
void seeded_shuffle(std::vector<T>& v, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

using TermCounts = std::map<std::string, double>;

inline TermCounts term_counts(const TaskInstance& inst) {
    TermCounts tc;
    for (const auto& [_, text] : inst.fields)
        for (auto& tok : alnum_tokens(text)) tc[tok] += 1.0;
    return tc;
}

inline double cosine(const TermCounts& a, const TermCounts& b) {
    double dot = 0, na = 0, nb = 0;
    for (const auto& [k, v] : a) {
        na += v * v;
        auto it = b.find(k);
        if (it != b.end()) dot += v * it->second;
    }
    for (const auto& [_, v] : b) nb += v * v;
    if (na == 0 || nb == 0) return 0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace detail

/// Order-preserving chunking; the traditional zero-shot setting is n = 1.
inline PartitionPlan partition_sequential(const std::vector<TaskInstance>& dataset, long n,
                                          std::uint64_t seed = 0) {
    detail::check_partition_args(dataset, n);
    PartitionPlan plan{.batches = {}, .n = static_cast<std::size_t>(n),
                       .strategy = Strategy::Sequential, .seed = seed};
    detail::append_chunks(plan.batches, dataset, plan.n, Strategy::Sequential, seed);
    return plan;
}

/// Groups semantically similar instances. Topic tags, when present, dominate:
/// each topic is chunked independently and batches never span topics. Untagged
/// datasets fall back to greedy agglomeration by average-linkage cosine
/// similarity of term-frequency vectors, merging while any pair of groups
/// still fits within n.
inline PartitionPlan partition_grp(const std::vector<TaskInstance>& dataset, long n,
                                   std::uint64_t seed = 0) {
    detail::check_partition_args(dataset, n);
    PartitionPlan plan{.batches = {}, .n = static_cast<std::size_t>(n),
                       .strategy = Strategy::Grp, .seed = seed};

    const bool tagged = std::all_of(dataset.begin(), dataset.end(),
                                    [](const TaskInstance& i) { return i.topic.has_value(); });
    if (tagged) {
        std::vector<std::string> topic_order;
        std::map<std::string, std::vector<TaskInstance>> by_topic;
        for (const auto& inst : dataset) {
            if (!by_topic.count(*inst.topic)) topic_order.push_back(*inst.topic);
            by_topic[*inst.topic].push_back(inst);
        }
        for (const auto& t : topic_order)
            detail::append_chunks(plan.batches, by_topic[t], plan.n, Strategy::Grp, seed);
        return plan;
    }

    const std::size_t k = dataset.size();
    std::vector<detail::TermCounts> tf(k);
    for (std::size_t i = 0; i < k; ++i) tf[i] = detail::term_counts(dataset[i]);
    std::vector<std::vector<double>> sim(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) sim[i][j] = sim[j][i] = detail::cosine(tf[i], tf[j]);

    std::vector<std::vector<std::size_t>> groups(k);
    for (std::size_t i = 0; i < k; ++i) groups[i] = {i};
    auto linkage = [&](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
        double s = 0;
        for (auto i : a)
            for (auto j : b) s += sim[i][j];
        return s / static_cast<double>(a.size() * b.size());
    };
    while (true) {
        double best = -1.0;
        std::size_t ba = 0, bb = 0;
        for (std::size_t a = 0; a < groups.size(); ++a) {
            for (std::size_t b = a + 1; b < groups.size(); ++b) {
                if (groups[a].size() + groups[b].size() > plan.n) continue;
                double s = linkage(groups[a], groups[b]);
                if (s > best) {
                    best = s;
                    ba = a;
                    bb = b;
                }
            }
        }
        if (best < 0) break;
        groups[ba].insert(groups[ba].end(), groups[bb].begin(), groups[bb].end());
        groups.erase(groups.begin() + static_cast<long>(bb));
    }
    for (const auto& g : groups) {
        Batch b;
        b.batch_id = static_cast<int>(plan.batches.size());
        b.strategy = Strategy::Grp;
        b.seed = seed;
        for (auto i : g) b.instances.push_back(dataset[i]);
        plan.batches.push_back(std::move(b));
    }
    return plan;
}

/// Seeded uniform shuffle followed by sequential chunking.
inline PartitionPlan partition_mix(const std::vector<TaskInstance>& dataset, long n,
                                   std::uint64_t seed) {
    detail::check_partition_args(dataset, n);
    PartitionPlan plan{.batches = {}, .n = static_cast<std::size_t>(n),
                       .strategy = Strategy::Mix, .seed = seed};
    std::vector<TaskInstance> shuffled = dataset;
    detail::seeded_shuffle(shuffled, seed);
    detail::append_chunks(plan.batches, shuffled, plan.n, Strategy::Mix, seed);
    return plan;
}

/// Evaluation mask for fil: the target topic's instance ids within a mix plan.
/// Prompts stay the mixed prompts; only scoring is restricted, so fil and grp
/// score identical instance sets.
inline std::set<std::string> restrict_fil(const PartitionPlan& plan, const std::string& target_topic) {
    if (plan.strategy != Strategy::Mix)
        throw ConfigError("fil mask requires a mix plan, got strategy=" + to_string(plan.strategy));
    std::set<std::string> ids;
    for (const auto& b : plan.batches)
        for (const auto& inst : b.instances)
            if (inst.topic && *inst.topic == target_topic) ids.insert(inst.id);
    if (ids.empty()) throw UnknownTopic(target_topic);
    return ids;
}

}  // namespace batchprompt
