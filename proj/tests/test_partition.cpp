#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "helpers.hpp"

using namespace batchprompt;

namespace {

std::vector<TaskInstance> synthetic(int count, int topic_block = 0) {
    std::vector<TaskInstance> out;
    for (int i = 0; i < count; ++i) {
        auto in = bptest::inst("i" + std::to_string(i), "sentence number " + std::to_string(i));
        if (topic_block > 0) in.topic = "t" + std::to_string(i / topic_block);
        out.push_back(std::move(in));
    }
    return out;
}

std::set<std::string> all_ids(const std::vector<TaskInstance>& data) {
    std::set<std::string> ids;
    for (const auto& d : data) ids.insert(d.id);
    return ids;
}

void check_cover_disjoint(const PartitionPlan& plan, const std::vector<TaskInstance>& data) {
    std::set<std::string> seen;
    for (const auto& b : plan.batches) {
        REQUIRE(!b.instances.empty());
        REQUIRE(b.instances.size() <= plan.n);
        for (const auto& i : b.instances) REQUIRE(seen.insert(i.id).second);
    }
    REQUIRE(seen == all_ids(data));
}

std::vector<std::string> id_sequence(const PartitionPlan& plan) {
    std::vector<std::string> out;
    for (const auto& b : plan.batches)
        for (const auto& i : b.instances) out.push_back(i.id);
    return out;
}

}  // namespace

TEST_CASE("partition_sequential chunks in order with one short final batch") {
    auto data = synthetic(7);
    auto plan = partition_sequential(data, 3, 0);
    REQUIRE(plan.batches.size() == 3);
    CHECK(plan.batches[0].instances.size() == 3);
    CHECK(plan.batches[1].instances.size() == 3);
    CHECK(plan.batches[2].instances.size() == 1);
    CHECK(id_sequence(plan) == std::vector<std::string>{"i0", "i1", "i2", "i3", "i4", "i5", "i6"});
    check_cover_disjoint(plan, data);

    CHECK(partition_sequential(data, 1, 0).batches.size() == 7);   // traditional zero-shot
    CHECK(partition_sequential(synthetic(20), 20, 0).batches.size() == 1);
    CHECK(partition_sequential(data, 7, 0).batches.size() == 1);

    CHECK_THROWS_AS(partition_sequential(data, 0, 0), InvalidN);
    CHECK_THROWS_AS(partition_sequential({}, 3, 0), EmptyDataset);
}

TEST_CASE("partition_grp with topic tags is topic-pure") {
    auto fever = bptest::fixture_config("fever").task;
    auto data = bptest::fixture_data("fever_topics", fever);
    auto plan = partition_grp(data, 10, 0);
    check_cover_disjoint(plan, data);
    for (const auto& b : plan.batches) {
        std::set<std::string> topics;
        for (const auto& i : b.instances) topics.insert(*i.topic);
        CHECK(topics.size() == 1);
    }

    SECTION("single shared topic degenerates to sequential chunking") {
        auto one_topic = synthetic(9, 100);  // all instances in topic t0
        auto grp = partition_grp(one_topic, 4, 7);
        auto seq = partition_sequential(one_topic, 4, 7);
        CHECK(id_sequence(grp) == id_sequence(seq));
        REQUIRE(grp.batches.size() == seq.batches.size());
        for (std::size_t i = 0; i < grp.batches.size(); ++i)
            CHECK(grp.batches[i].instances.size() == seq.batches[i].instances.size());
    }
}

TEST_CASE("partition_grp without tags pairs near-duplicates like the brute-force oracle") {
    // Three near-duplicate pairs; pairwise similarity is decisive.
    std::vector<TaskInstance> data = {
        bptest::inst("a1", "the quick brown fox jumps over the lazy dog"),
        bptest::inst("b1", "stock markets rallied strongly on tuesday morning"),
        bptest::inst("c1", "a recipe for slow roasted tomato soup with basil"),
        bptest::inst("a2", "the quick brown fox leaps over the lazy dog"),
        bptest::inst("b2", "stock markets rallied sharply on tuesday evening"),
        bptest::inst("c2", "a recipe for slow roasted tomato soup with garlic"),
    };
    auto plan = partition_grp(data, 2, 0);
    check_cover_disjoint(plan, data);
    REQUIRE(plan.batches.size() == 3);

    // Brute-force oracle: enumerate all perfect pairings of the six items and
    // keep the one maximizing total pairwise cosine similarity.
    auto sim = [&](std::size_t x, std::size_t y) {
        return detail::cosine(detail::term_counts(data[x]), detail::term_counts(data[y]));
    };
    std::vector<std::size_t> idx = {0, 1, 2, 3, 4, 5};
    double best = -1;
    std::set<std::set<std::string>> best_pairs;
    std::vector<std::size_t> perm = idx;
    std::sort(perm.begin(), perm.end());
    do {
        if (perm[0] > perm[1] || perm[2] > perm[3] || perm[4] > perm[5]) continue;
        if (perm[0] > perm[2] || perm[2] > perm[4]) continue;  // canonical pairing order
        double total = sim(perm[0], perm[1]) + sim(perm[2], perm[3]) + sim(perm[4], perm[5]);
        if (total > best) {
            best = total;
            best_pairs = {{data[perm[0]].id, data[perm[1]].id},
                          {data[perm[2]].id, data[perm[3]].id},
                          {data[perm[4]].id, data[perm[5]].id}};
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    std::set<std::set<std::string>> got;
    for (const auto& b : plan.batches) {
        REQUIRE(b.instances.size() == 2);
        got.insert({b.instances[0].id, b.instances[1].id});
    }
    CHECK(got == best_pairs);
}

TEST_CASE("partition_mix is a seeded shuffle then sequential chunks") {
    auto data = synthetic(23);

    SECTION("deterministic for a fixed seed") {
        auto p1 = partition_mix(data, 5, 42);
        auto p2 = partition_mix(data, 5, 42);
        CHECK(id_sequence(p1) == id_sequence(p2));
        check_cover_disjoint(p1, data);
    }
    SECTION("singleton dataset") {
        auto p = partition_mix(synthetic(1), 5, 0);
        REQUIRE(p.batches.size() == 1);
        CHECK(p.batches[0].instances.size() == 1);
    }
    SECTION("matches an independently re-implemented Fisher-Yates oracle") {
        auto plan = partition_mix(data, 5, 9001);
        std::vector<std::string> oracle;
        for (const auto& d : data) oracle.push_back(d.id);
        std::mt19937_64 rng(9001);
        for (std::size_t i = oracle.size(); i > 1; --i)
            std::swap(oracle[i - 1], oracle[rng() % i]);
        CHECK(id_sequence(plan) == oracle);
    }
    SECTION("mixes topics where sequential chunks would be pure") {
        auto topical = synthetic(100, 10);  // ten topic blocks of ten
        auto plan = partition_mix(topical, 10, 0);
        bool any_mixed = false;
        for (const auto& b : plan.batches) {
            std::set<std::string> topics;
            for (const auto& i : b.instances) topics.insert(*i.topic);
            any_mixed = any_mixed || topics.size() > 1;
        }
        CHECK(any_mixed);
    }
}

TEST_CASE("restrict_fil masks the target topic's ids of a mix plan") {
    auto fever = bptest::fixture_config("fever").task;
    auto data = bptest::fixture_data("fever_topics", fever);
    auto plan = partition_mix(data, 10, 3);

    auto mask = restrict_fil(plan, "Samsung");
    std::set<std::string> expected;
    for (const auto& d : data)
        if (*d.topic == "Samsung") expected.insert(d.id);
    CHECK(mask == expected);

    // fil and grp score identical instance sets.
    auto grp = partition_grp(data, 10, 3);
    std::set<std::string> grp_samsung;
    for (const auto& b : grp.batches)
        if (*b.instances.front().topic == "Samsung")
            for (const auto& i : b.instances) grp_samsung.insert(i.id);
    CHECK(mask == grp_samsung);

    SECTION("whole dataset when every instance is on-topic") {
        std::vector<TaskInstance> pure;
        for (int i = 0; i < 6; ++i) pure.push_back(bptest::inst(std::to_string(i), "x", nullptr, "only"));
        auto p = partition_mix(pure, 4, 0);
        CHECK(restrict_fil(p, "only").size() == 6);
    }
    SECTION("unknown topic") { CHECK_THROWS_AS(restrict_fil(plan, "Nokia"), UnknownTopic); }
    SECTION("requires a mix plan") {
        auto seq = partition_sequential(data, 10, 0);
        CHECK_THROWS_AS(restrict_fil(seq, "Samsung"), ConfigError);
    }
}

TEST_CASE("coverage and disjointness hold across randomized cases") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 120; ++trial) {
        const int count = 1 + static_cast<int>(rng() % 40);
        const int n = 1 + static_cast<int>(rng() % 12);
        const int topic_block = (trial % 3 == 0) ? 1 + static_cast<int>(rng() % 5) : 0;
        auto data = synthetic(count, topic_block);
        const auto seed = rng();

        auto seq = partition_sequential(data, n, seed);
        auto grp = partition_grp(data, n, seed);
        auto mix = partition_mix(data, n, seed);
        for (const auto* plan : {&seq, &grp, &mix}) check_cover_disjoint(*plan, data);

        // All but the final batch of each group are exactly n for the chunked
        // strategies.
        for (std::size_t i = 0; i + 1 < mix.batches.size(); ++i)
            CHECK(mix.batches[i].instances.size() == static_cast<std::size_t>(n));
        if (topic_block > 0)
            for (const auto& b : grp.batches) {
                std::set<std::string> topics;
                for (const auto& i : b.instances) topics.insert(*i.topic);
                CHECK(topics.size() == 1);
            }
        CHECK(id_sequence(mix) == id_sequence(partition_mix(data, n, seed)));
        CHECK(id_sequence(grp) == id_sequence(partition_grp(data, n, seed)));
    }
}
