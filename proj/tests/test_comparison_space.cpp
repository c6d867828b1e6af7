#include <doctest.h>

#include <random>

#include "erkit/comparison_space.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace erkit;
using testsupport::make_ref;

namespace {

std::vector<EntityReference> refs_with_city(std::initializer_list<const char*> cities) {
    std::vector<EntityReference> refs;
    int i = 0;
    for (const char* city : cities) {
        refs.push_back(make_ref("r:" + std::to_string(i++), "r",
                                {{"city", AttributeValue::text(city)}}));
    }
    return refs;
}

std::set<std::pair<std::string, std::string>> pair_set(const ComparisonSpace& space) {
    std::set<std::pair<std::string, std::string>> out;
    for (const auto& group : space.groups) {
        REQUIRE(group.member_ids.size() == 2);
        out.insert({group.member_ids[0], group.member_ids[1]});
    }
    return out;
}

void check_canonical(const ComparisonSpace& space) {
    for (const auto& group : space.groups) {
        REQUIRE(group.member_ids.size() >= 2);
        for (std::size_t i = 1; i < group.member_ids.size(); ++i) {
            CHECK(group.member_ids[i - 1] < group.member_ids[i]);  // sorted, no self-pairs
        }
    }
    for (std::size_t i = 1; i < space.groups.size(); ++i) {
        CHECK(space.groups[i - 1] < space.groups[i]);  // globally sorted, distinct
    }
    CHECK(space.stats.group_count == static_cast<std::int64_t>(space.groups.size()));
}

}  // namespace

TEST_CASE("full_space enumerates all unordered pairs") {
    auto refs = refs_with_city({"NYC", "NYC", "LA"});
    auto space = full_space(refs);
    CHECK(space.stats.group_count == 3);
    CHECK(pair_set(space) ==
          std::set<std::pair<std::string, std::string>>{{"r:0", "r:1"}, {"r:0", "r:2"},
                                                        {"r:1", "r:2"}});
    check_canonical(space);

    CHECK(full_space({refs[0]}).stats.group_count == 0);

    std::vector<EntityReference> hundred;
    for (int i = 0; i < 100; ++i) {
        hundred.push_back(make_ref("h:" + std::to_string(i), "h",
                                   {{"x", AttributeValue::number(i)}}));
    }
    CHECK(full_space(hundred).stats.group_count == 4950);
}

TEST_CASE("block_by_key groups by exact key and counts missing") {
    auto refs = refs_with_city({"NYC", "NYC", "LA"});
    refs.push_back(make_ref("r:3", "r", {{"name", AttributeValue::text("no city")}}));
    auto index = block_by_key(refs, "city", KeyTransform{});
    CHECK(index.blocks.size() == 2);
    CHECK(index.blocks.at("NYC") == std::vector<std::string>{"r:0", "r:1"});
    CHECK(index.blocks.at("LA") == std::vector<std::string>{"r:2"});
    CHECK(index.missing_key_count == 1);
}

TEST_CASE("prefix and soundex transforms") {
    std::vector<EntityReference> refs = {
        make_ref("n:0", "n", {{"name", AttributeValue::text("Smith")}}),
        make_ref("n:1", "n", {{"name", AttributeValue::text("Smyth")}}),
        make_ref("n:2", "n", {{"name", AttributeValue::text("Jones")}}),
    };
    KeyTransform prefix2{KeyTransformKind::PrefixK, 2};
    auto blocks = block_by_key(refs, "name", prefix2);
    CHECK(blocks.blocks.at("Sm").size() == 2);
    CHECK(blocks.blocks.at("Jo").size() == 1);

    std::vector<EntityReference> phonetic = {
        make_ref("p:0", "p", {{"name", AttributeValue::text("Robert")}}),
        make_ref("p:1", "p", {{"name", AttributeValue::text("Rupert")}}),
    };
    KeyTransform soundex{KeyTransformKind::SoundexLike, 0};
    auto codes = block_by_key(phonetic, "name", soundex);
    REQUIRE(codes.blocks.size() == 1);
    CHECK(codes.blocks.begin()->first == "R163");
    CHECK(codes.blocks.begin()->second.size() == 2);

    // Non-text keys are a config error under these transforms.
    std::vector<EntityReference> numeric = {
        make_ref("x:0", "x", {{"name", AttributeValue::number(5)}})};
    CHECK_THROWS_AS(block_by_key(numeric, "name", prefix2), ConfigError);
    CHECK_THROWS_AS(block_by_key(numeric, "name", soundex), ConfigError);
}

TEST_CASE("pairs_from_blocks deduplicates across blocks") {
    BlockIndex index;
    index.blocks["NYC"] = {"r:1", "r:2"};
    index.blocks["LA"] = {"r:3"};
    auto space = pairs_from_blocks(index, 3);
    CHECK(pair_set(space) == std::set<std::pair<std::string, std::string>>{{"r:1", "r:2"}});

    BlockIndex big;
    big.blocks["k"] = {"a", "b", "c", "d"};
    CHECK(pairs_from_blocks(big, 4).stats.group_count == 6);

    BlockIndex dup;
    dup.blocks["k1"] = {"r:1", "r:2"};
    dup.blocks["k2"] = {"r:1", "r:2"};
    auto deduped = pairs_from_blocks(dup, 2);
    CHECK(deduped.stats.group_count == 1);
    check_canonical(deduped);
}

TEST_CASE("sorted_neighborhood pairs within the window") {
    std::vector<EntityReference> refs = {
        make_ref("r:0", "r", {{"k", AttributeValue::text("a")}}),
        make_ref("r:1", "r", {{"k", AttributeValue::text("b")}}),
        make_ref("r:2", "r", {{"k", AttributeValue::text("c")}}),
        make_ref("r:3", "r", {{"k", AttributeValue::text("d")}}),
    };
    auto space = sorted_neighborhood(refs, "k", 2);
    CHECK(pair_set(space) ==
          std::set<std::pair<std::string, std::string>>{{"r:0", "r:1"}, {"r:1", "r:2"},
                                                        {"r:2", "r:3"}});

    CHECK_THROWS_AS(sorted_neighborhood(refs, "k", 1), ConfigError);

    // w = n equals the full space exactly.
    auto windowed = sorted_neighborhood(refs, "k", static_cast<std::int64_t>(refs.size()));
    auto full = full_space(refs);
    CHECK(windowed.groups == full.groups);
}

TEST_CASE("sorted_neighborhood five refs window three gives seven pairs") {
    std::vector<EntityReference> refs;
    std::vector<std::string> sorted_ids;
    for (int i = 0; i < 5; ++i) {
        std::string id = "r:" + std::to_string(i);
        refs.push_back(make_ref(id, "r",
                                {{"k", AttributeValue::text(std::string(1, char('a' + i)))}}));
        sorted_ids.push_back(id);
    }
    auto space = sorted_neighborhood(refs, "k", 3);
    auto expected = oracles::window_pairs(sorted_ids, 3);
    CHECK(expected.size() == 7);
    CHECK(pair_set(space) == expected);
}

TEST_CASE("sorted_neighborhood requires a text key") {
    std::vector<EntityReference> refs = {
        make_ref("r:0", "r", {{"k", AttributeValue::number(1)}}),
        make_ref("r:1", "r", {{"k", AttributeValue::number(2)}}),
    };
    CHECK_THROWS_AS(sorted_neighborhood(refs, "k", 2), ConfigError);
}

TEST_CASE("sorted_neighborhood puts missing keys last, ties by ref id") {
    std::vector<EntityReference> refs = {
        make_ref("r:0", "r", {{"other", AttributeValue::text("x")}}),  // missing key
        make_ref("r:1", "r", {{"k", AttributeValue::text("z")}}),
        make_ref("r:2", "r", {{"k", AttributeValue::text("a")}}),
    };
    auto space = sorted_neighborhood(refs, "k", 2);
    // Sort order: r:2 (a), r:1 (z), r:0 (missing).
    CHECK(pair_set(space) ==
          std::set<std::pair<std::string, std::string>>{{"r:1", "r:2"}, {"r:0", "r:1"}});
}

TEST_CASE("filter_shared_tokens keeps overlapping and missing, drops disjoint") {
    std::vector<EntityReference> refs = {
        make_ref("t:0", "t", {{"toks", AttributeValue::token_set({"john", "smith"})}}),
        make_ref("t:1", "t", {{"toks", AttributeValue::token_set({"jon", "smith"})}}),
        make_ref("t:2", "t", {{"toks", AttributeValue::token_set({"alice"})}}),
        make_ref("t:3", "t", {{"name", AttributeValue::text("no tokens")}}),
    };
    auto space = full_space(refs);
    auto result = filter_shared_tokens(space, refs, "toks", 1);
    auto kept = pair_set(result.space);
    CHECK(kept.count({"t:0", "t:1"}) == 1);   // share "smith"
    CHECK(kept.count({"t:0", "t:2"}) == 0);   // disjoint
    CHECK(kept.count({"t:1", "t:2"}) == 0);
    CHECK(kept.count({"t:0", "t:3"}) == 1);   // missing side kept
    CHECK(kept.count({"t:2", "t:3"}) == 1);
    CHECK(result.removed == 2);
    CHECK(result.removed + result.space.stats.group_count == space.stats.group_count);
}

TEST_CASE("containment: every reducer emits a subset of the full space") {
    std::mt19937 rng(17);
    std::uniform_int_distribution<int> n_refs(2, 60);
    std::uniform_int_distribution<int> key(0, 5);
    std::uniform_int_distribution<int> window(2, 10);
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<EntityReference> refs;
        int n = n_refs(rng);
        for (int i = 0; i < n; ++i) {
            AttributeMap attrs;
            if (key(rng) != 0) {
                attrs["k"] = AttributeValue::text("key" + std::to_string(key(rng)));
            } else {
                attrs["pad"] = AttributeValue::text("x");
            }
            std::set<std::string> tokens;
            tokens.insert("t" + std::to_string(key(rng)));
            tokens.insert("t" + std::to_string(key(rng)));
            attrs["toks"] = AttributeValue::token_set(tokens);
            refs.push_back(make_ref("z:" + std::to_string(i), "z", std::move(attrs)));
        }
        auto all = pair_set(full_space(refs));

        auto blocked = pairs_from_blocks(block_by_key(refs, "k", KeyTransform{}),
                                         static_cast<std::int64_t>(refs.size()));
        check_canonical(blocked);
        for (const auto& pair : pair_set(blocked)) CHECK(all.count(pair) == 1);

        auto neighborhood = sorted_neighborhood(refs, "k", window(rng));
        check_canonical(neighborhood);
        for (const auto& pair : pair_set(neighborhood)) CHECK(all.count(pair) == 1);

        auto filtered = filter_shared_tokens(neighborhood, refs, "toks", 1);
        check_canonical(filtered.space);
        auto kept = pair_set(filtered.space);
        for (const auto& pair : kept) CHECK(pair_set(neighborhood).count(pair) == 1);
        CHECK(filtered.removed + filtered.space.stats.group_count ==
              neighborhood.stats.group_count);
    }
}
