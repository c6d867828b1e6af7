#include <doctest.h>

#include <algorithm>
#include <random>

#include "erkit/clustering.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace erkit;
using testsupport::make_ref;

namespace {

MatchEdge match_edge(const std::string& a, const std::string& b, double score = 0.9,
                     MatchLabel label = MatchLabel::Match) {
    MatchEdge edge;
    edge.a = a < b ? a : b;
    edge.b = a < b ? b : a;
    edge.score = score;
    edge.label = label;
    return edge;
}

std::vector<EntityReference> plain_refs(std::initializer_list<const char*> ids,
                                        const std::string& source = "s") {
    std::vector<EntityReference> refs;
    for (const char* id : ids) {
        refs.push_back(make_ref(id, source, {{"x", AttributeValue::text("v")}}));
    }
    return refs;
}

}  // namespace

TEST_CASE("connected_components follows transitivity") {
    auto refs = plain_refs({"a", "b", "c", "d"});
    auto partition = connected_components(refs, {match_edge("a", "b"), match_edge("b", "c")});
    REQUIRE(partition.clusters.size() == 2);
    CHECK(partition.clusters[0] == std::vector<std::string>{"a", "b", "c"});
    CHECK(partition.clusters[1] == std::vector<std::string>{"d"});
    CHECK_NOTHROW(validate_partition(partition));

    auto singletons = connected_components(refs, {});
    CHECK(singletons.clusters.size() == 4);

    // Non-match edges never merge.
    auto ignored = connected_components(
        refs, {match_edge("a", "b", 0.4, MatchLabel::Possible),
               match_edge("c", "d", 0.1, MatchLabel::NonMatch)});
    CHECK(ignored.clusters.size() == 4);
}

TEST_CASE("connected_components rejects unknown refs") {
    auto refs = plain_refs({"a", "b"});
    CHECK_THROWS_AS(connected_components(refs, {match_edge("a", "zz")}), InvalidArgumentError);
}

TEST_CASE("connected_components equals dfs reachability on random graphs") {
    std::mt19937 rng(43);
    std::uniform_int_distribution<int> n_nodes(1, 50);
    std::uniform_real_distribution<double> density(0.0, 0.12);
    for (int trial = 0; trial < 60; ++trial) {
        int n = n_nodes(rng);
        std::vector<EntityReference> refs;
        std::vector<std::string> ids;
        for (int i = 0; i < n; ++i) {
            std::string id = "n:" + std::to_string(i);
            ids.push_back(id);
            refs.push_back(make_ref(id, "n", {{"x", AttributeValue::text("v")}}));
        }
        std::vector<MatchEdge> edges;
        std::vector<std::pair<std::string, std::string>> raw_edges;
        double p = density(rng);
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                if (coin(rng) < p) {
                    edges.push_back(match_edge(ids[i], ids[j]));
                    raw_edges.emplace_back(ids[i], ids[j]);
                }
            }
        }
        auto partition = connected_components(refs, edges);
        CHECK_NOTHROW(validate_partition(partition));
        CHECK(partition.clusters == oracles::dfs_components(ids, raw_edges));
    }
}

TEST_CASE("unique_mapping greedily links best cross-source pairs") {
    std::vector<EntityReference> refs;
    refs.push_back(make_ref("a", "left", {{"x", AttributeValue::text("v")}}));
    refs.push_back(make_ref("b", "left", {{"x", AttributeValue::text("v")}}));
    refs.push_back(make_ref("x", "right", {{"x", AttributeValue::text("v")}}));
    refs.push_back(make_ref("y", "right", {{"x", AttributeValue::text("v")}}));

    auto partition = unique_mapping(refs, {match_edge("a", "x", 0.9), match_edge("a", "y", 0.8)});
    REQUIRE(partition.clusters.size() == 3);
    CHECK(partition.clusters[0] == std::vector<std::string>{"a", "x"});
    CHECK(partition.clusters[1] == std::vector<std::string>{"b"});
    CHECK(partition.clusters[2] == std::vector<std::string>{"y"});

    // Equal scores break ties lexicographically: (a,x) wins over (b,x).
    auto tie = unique_mapping(refs, {match_edge("a", "x", 0.9), match_edge("b", "x", 0.9)});
    CHECK(tie.clusters[0] == std::vector<std::string>{"a", "x"});

    auto empty = unique_mapping(refs, {});
    CHECK(empty.clusters.size() == 4);
    for (const auto& cluster : empty.clusters) CHECK(cluster.size() == 1);

    // Every cluster has size <= 2 under unique mapping.
    std::mt19937 rng(47);
    std::uniform_real_distribution<double> score(0.0, 1.0);
    std::vector<MatchEdge> edges;
    for (const char* left : {"a", "b"}) {
        for (const char* right : {"x", "y"}) {
            edges.push_back(match_edge(left, right, score(rng)));
        }
    }
    for (const auto& cluster : unique_mapping(refs, edges).clusters) {
        CHECK(cluster.size() <= 2);
    }
}

TEST_CASE("unique_mapping rejects within-source edges") {
    std::vector<EntityReference> refs;
    refs.push_back(make_ref("a", "left", {{"x", AttributeValue::text("v")}}));
    refs.push_back(make_ref("b", "left", {{"x", AttributeValue::text("v")}}));
    CHECK_THROWS_AS(unique_mapping(refs, {match_edge("a", "b")}), ConfigError);
}

TEST_CASE("incremental_merge matches the contract examples") {
    UnionFind state;
    state.add("a");
    state.add("b");
    auto merged = incremental_merge(state, {match_edge("a", "b")});
    REQUIRE(merged.clusters.size() == 1);
    CHECK(merged.clusters[0] == std::vector<std::string>{"a", "b"});

    UnionFind chain;
    for (const char* id : {"a", "b", "c", "d"}) chain.add(id);
    incremental_merge(chain, {match_edge("a", "b")});
    incremental_merge(chain, {match_edge("c", "d")});
    auto final_partition = incremental_merge(chain, {match_edge("b", "c")});
    REQUIRE(final_partition.clusters.size() == 1);
    CHECK(final_partition.clusters[0] == std::vector<std::string>{"a", "b", "c", "d"});

    CHECK_THROWS_AS(incremental_merge(chain, {match_edge("a", "zz")}), InvalidArgumentError);
}

TEST_CASE("incremental merging is order-insensitive and idempotent") {
    std::mt19937 rng(53);
    std::uniform_int_distribution<int> n_nodes(2, 40);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        int n = n_nodes(rng);
        std::vector<EntityReference> refs;
        std::vector<std::string> ids;
        for (int i = 0; i < n; ++i) {
            std::string id = "n:" + std::to_string(i);
            ids.push_back(id);
            refs.push_back(make_ref(id, "n", {{"x", AttributeValue::text("v")}}));
        }
        std::vector<MatchEdge> edges;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                if (coin(rng) < 0.08) edges.push_back(match_edge(ids[i], ids[j]));
            }
        }
        auto batch = connected_components(refs, edges);

        std::shuffle(edges.begin(), edges.end(), rng);
        UnionFind state;
        for (const auto& id : ids) state.add(id);
        ClusterPartition incremental;
        for (const auto& edge : edges) {
            incremental = incremental_merge(state, {edge});
            CHECK_NOTHROW(validate_partition(incremental));
        }
        if (edges.empty()) incremental = state.partition();
        CHECK(incremental.clusters == batch.clusters);

        // Re-presenting every edge changes nothing.
        for (const auto& edge : edges) {
            auto again = incremental_merge(state, {edge});
            CHECK(again.clusters == batch.clusters);
        }
    }
}

TEST_CASE("component_of returns the sorted component") {
    UnionFind state;
    for (const char* id : {"a", "b", "c"}) state.add(id);
    state.merge("a", "c");
    CHECK(state.component_of("a") == std::vector<std::string>{"a", "c"});
    CHECK(state.component_of("b") == std::vector<std::string>{"b"});
    CHECK_THROWS_AS(state.component_of("zz"), InvalidArgumentError);
}
