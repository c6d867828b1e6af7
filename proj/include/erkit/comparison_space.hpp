#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "erkit/types.hpp"

namespace erkit {

enum class KeyTransformKind { Exact, PrefixK, SoundexLike };

const char* to_string(KeyTransformKind kind);
KeyTransformKind key_transform_from_string(const std::string& s);

struct KeyTransform {
    KeyTransformKind kind = KeyTransformKind::Exact;
    std::int64_t prefix_length = 3;  // prefix_k only
};

struct BlockIndex {
    std::map<std::string, std::vector<std::string>> blocks;  // key -> sorted ref_ids
    std::int64_t missing_key_count = 0;
};

// Block key of a single reference, or nullopt when the attribute is absent or
// transforms to nothing (e.g. soundex of a letterless string).
std::optional<std::string> block_key(const EntityReference& ref, const std::string& key_attribute,
                                     const KeyTransform& transform);

// All n(n-1)/2 unordered pairs as sorted 2-groups, globally sorted.
ComparisonSpace full_space(const std::vector<EntityReference>& refs);

BlockIndex block_by_key(const std::vector<EntityReference>& refs,
                        const std::string& key_attribute, const KeyTransform& transform);

// All within-block pairs, deduplicated across blocks, sorted.
ComparisonSpace pairs_from_blocks(const BlockIndex& blocks, std::int64_t total_references);

// Sort by text key (absent last, ties by ref_id), pair each ref with its
// w-1 successors.
ComparisonSpace sorted_neighborhood(const std::vector<EntityReference>& refs,
                                    const std::string& key_attribute, std::int64_t window);

struct FilterResult {
    ComparisonSpace space;
    std::int64_t removed = 0;
};

// Keeps pairs whose token_set intersection on `attribute` has >= min_shared
// tokens; pairs missing the attribute on either side are kept. Groups larger
// than 2 pass through untouched.
FilterResult filter_shared_tokens(const ComparisonSpace& space,
                                  const std::vector<EntityReference>& refs,
                                  const std::string& attribute, std::int64_t min_shared);

}  // namespace erkit
