#include <doctest.h>

#include <filesystem>
#include <random>

#include "erkit/canonical.hpp"
#include "erkit/reference_store.hpp"
#include "test_support.hpp"

using namespace erkit;
using testsupport::TempDir;
using testsupport::make_ref;

namespace {

std::vector<EntityReference> three_refs() {
    return {
        make_ref("s:0", "s", {{"name", AttributeValue::text("ann")}}),
        make_ref("s:1", "s", {{"name", AttributeValue::text("bob")}}),
        make_ref("s:2", "s", {{"name", AttributeValue::text("cid")}}),
    };
}

// Observable state must coincide for every version and kind.
void check_equal_stores(const ReferenceStore& a, const ReferenceStore& b) {
    REQUIRE(a.latest_version() == b.latest_version());
    for (std::int64_t v = 0; v <= a.latest_version(); ++v) {
        CHECK(references_to_jsonl(a.get_references(v)) == references_to_jsonl(b.get_references(v)));
        CHECK(edges_to_jsonl(a.get_edges(v)) == edges_to_jsonl(b.get_edges(v)));
        CHECK(groups_to_jsonl(a.get_comparison_space(v)) ==
              groups_to_jsonl(b.get_comparison_space(v)));
        CHECK(partition_to_jsonl(a.get_partition(v)) == partition_to_jsonl(b.get_partition(v)));
        CHECK(profiles_to_jsonl(a.get_profiles(v)) == profiles_to_jsonl(b.get_profiles(v)));
    }
    auto va = a.versions();
    auto vb = b.versions();
    REQUIRE(va.size() == vb.size());
    for (std::size_t i = 0; i < va.size(); ++i) {
        CHECK(va[i].version == vb[i].version);
        CHECK(va[i].counts == vb[i].counts);
    }
}

}  // namespace

TEST_CASE("put and get follow version semantics") {
    ReferenceStore store;
    auto v1 = store.put_references(three_refs());
    CHECK(v1.version == 1);
    CHECK(v1.counts.at("references") == 3);

    auto v2 = store.put_references(three_refs());  // idempotent union
    CHECK(v2.version == 2);
    CHECK(v2.counts.at("references") == 3);

    CHECK(store.get_references().size() == 3);
    CHECK(store.get_references(1).size() == 3);
    CHECK(store.get_references(0).empty());  // empty initial state
    CHECK_THROWS_AS(store.get_references(99), NotFoundError);
}

TEST_CASE("conflicting reference content is rejected") {
    ReferenceStore store;
    store.put_references(three_refs());
    auto changed = make_ref("s:0", "s", {{"name", AttributeValue::text("zed")}});
    CHECK_THROWS_AS(store.put_references({changed}), ConflictError);
    // The failed put creates no version.
    CHECK(store.latest_version() == 1);
}

TEST_CASE("reads at a fixed version are stable as the store grows") {
    ReferenceStore store;
    store.put_references({three_refs()[0]});
    std::string at_v1 = references_to_jsonl(store.get_references(1));
    store.put_references({three_refs()[1]});
    store.put_references({three_refs()[2]});
    CHECK(references_to_jsonl(store.get_references(1)) == at_v1);
    CHECK(store.get_references(2).size() == 2);
    CHECK(store.get_references().size() == 3);

    auto versions = store.versions();
    REQUIRE(versions.size() == 3);
    for (std::size_t i = 0; i < versions.size(); ++i) {
        CHECK(versions[i].version == static_cast<std::int64_t>(i) + 1);
    }
}

TEST_CASE("partition writes replace the previous partition") {
    ReferenceStore store;
    ClusterPartition first;
    first.clusters = {{"a"}, {"b"}};
    first.universe = {"a", "b"};
    store.put_partition(first);

    ClusterPartition second;
    second.clusters = {{"a", "b"}};
    second.universe = {"a", "b"};
    store.put_partition(second);

    CHECK(store.get_partition().clusters == second.clusters);
    CHECK(store.get_partition(1).clusters == first.clusters);
    CHECK(store.get_partition(0).clusters.empty());
}

TEST_CASE("snapshot then restore is the identity on observable state") {
    std::mt19937 rng(59);
    TempDir dir;
    for (int trial = 0; trial < 10; ++trial) {
        ReferenceStore store;
        std::uniform_int_distribution<int> ops(1, 12);
        std::uniform_int_distribution<int> which(0, 3);
        int n_ops = ops(rng);
        int ref_counter = 0;
        for (int op = 0; op < n_ops; ++op) {
            switch (which(rng)) {
                case 0: {
                    std::vector<EntityReference> refs;
                    int count = 1 + static_cast<int>(rng() % 3);
                    for (int i = 0; i < count; ++i) {
                        refs.push_back(make_ref("r:" + std::to_string(ref_counter++), "r",
                                                {{"v", AttributeValue::number(op)}}));
                    }
                    store.put_references(refs);
                    break;
                }
                case 1: {
                    MatchEdge edge;
                    edge.a = "r:" + std::to_string(rng() % 50);
                    edge.b = "s:" + std::to_string(rng() % 50);
                    edge.score = 0.5;
                    edge.label = MatchLabel::Match;
                    store.put_edges({edge});
                    break;
                }
                case 2: {
                    CandidateGroup group;
                    group.member_ids = {"a:" + std::to_string(rng() % 20),
                                        "z:" + std::to_string(rng() % 20)};
                    store.put_comparison_space({group});
                    break;
                }
                default: {
                    ClusterPartition partition;
                    std::string a = "p:" + std::to_string(rng() % 10);
                    std::string b = "q:" + std::to_string(rng() % 10);
                    partition.clusters = {{a}, {b}};
                    partition.universe = {a, b};
                    store.put_partition(partition);
                    break;
                }
            }
        }
        std::string path = dir.file("snap_" + std::to_string(trial));
        store.snapshot(path);
        auto restored = ReferenceStore::restore(path);
        check_equal_stores(store, *restored);
    }
}

TEST_CASE("snapshot of an empty store restores to an empty store") {
    TempDir dir;
    ReferenceStore store;
    std::string path = dir.file("empty.snap");
    store.snapshot(path);
    auto restored = ReferenceStore::restore(path);
    CHECK(restored->latest_version() == 0);
    CHECK(restored->get_references().empty());
}

TEST_CASE("corrupt snapshots are rejected whole") {
    TempDir dir;
    ReferenceStore store;
    store.put_references(three_refs());
    std::string path = dir.file("store.snap");
    store.snapshot(path);

    // Truncate: drop the trailing checksum line.
    std::string content = testsupport::read_file(path);
    auto cut = content.rfind('\n', content.size() - 2);
    testsupport::write_file(path, content.substr(0, cut + 1));
    CHECK_THROWS_AS(ReferenceStore::restore(path), StoreError);

    // Flip a byte inside the body.
    std::string flipped = content;
    flipped[content.size() / 2] ^= 0x20;
    testsupport::write_file(path, flipped);
    CHECK_THROWS_AS(ReferenceStore::restore(path), StoreError);

    CHECK_THROWS_AS(ReferenceStore::restore(dir.file("missing.snap")), StoreError);
}

TEST_CASE("file backend persists across reopen") {
    TempDir dir;
    std::string path = dir.file("store.log");
    {
        ReferenceStore store(path);
        store.put_references(three_refs());
        ClusterPartition partition;
        partition.clusters = {{"s:0", "s:1"}, {"s:2"}};
        partition.universe = {"s:0", "s:1", "s:2"};
        store.put_partition(partition);
    }
    ReferenceStore reopened(path);
    CHECK(reopened.latest_version() == 2);
    CHECK(reopened.get_references().size() == 3);
    CHECK(reopened.get_partition().clusters.size() == 2);
    CHECK(std::filesystem::exists(path + ".idx"));
}

TEST_CASE("a torn tail leaves the store readable at the last commit") {
    TempDir dir;
    std::string path = dir.file("store.log");
    {
        ReferenceStore store(path);
        store.put_references({three_refs()[0]});
        store.put_references({three_refs()[1]});
    }
    std::string log = testsupport::read_file(path);

    // Simulate a crash mid-append: pick byte lengths that cut into the final
    // record and confirm recovery at version 1 (or 2 when the cut only
    // removed bytes past the last commit).
    for (std::size_t chop = 1; chop < 40; chop += 7) {
        if (chop >= log.size()) break;
        testsupport::write_file(path, log.substr(0, log.size() - chop));
        ReferenceStore recovered(path);
        CHECK(recovered.latest_version() >= 1);
        CHECK(recovered.latest_version() <= 2);
        CHECK(recovered.get_references(1).size() == 1);
    }

    // Garbage appended after a valid log is ignored the same way.
    testsupport::write_file(path, log + "not a log line\n");
    ReferenceStore recovered(path);
    CHECK(recovered.latest_version() == 2);
    CHECK(recovered.get_references().size() == 2);
}
