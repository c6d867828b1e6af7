#include "erkit/comparison_space.hpp"

#include <algorithm>
#include <tuple>
#include <unordered_map>

#include "erkit/canonical.hpp"
#include "erkit/text.hpp"

namespace erkit {

const char* to_string(KeyTransformKind kind) {
    switch (kind) {
        case KeyTransformKind::Exact: return "exact";
        case KeyTransformKind::PrefixK: return "prefix_k";
        case KeyTransformKind::SoundexLike: return "soundex_like";
    }
    return "exact";
}

KeyTransformKind key_transform_from_string(const std::string& s) {
    if (s == "exact") return KeyTransformKind::Exact;
    if (s == "prefix_k" || s == "prefix") return KeyTransformKind::PrefixK;
    if (s == "soundex_like" || s == "soundex") return KeyTransformKind::SoundexLike;
    throw InvalidArgumentError("unknown key transform '" + s + "'");
}

namespace {

void finalize_groups(ComparisonSpace& space) {
    std::sort(space.groups.begin(), space.groups.end());
    space.groups.erase(std::unique(space.groups.begin(), space.groups.end()),
                       space.groups.end());
    space.stats.group_count = static_cast<std::int64_t>(space.groups.size());
}

CandidateGroup pair_group(const std::string& x, const std::string& y) {
    CandidateGroup group;
    if (x < y) {
        group.member_ids = {x, y};
    } else {
        group.member_ids = {y, x};
    }
    return group;
}

}  // namespace

std::optional<std::string> block_key(const EntityReference& ref, const std::string& key_attribute,
                                     const KeyTransform& transform) {
    auto it = ref.attributes.find(key_attribute);
    if (it == ref.attributes.end()) return std::nullopt;
    const AttributeValue& value = it->second;
    switch (transform.kind) {
        case KeyTransformKind::Exact:
            // Non-text values key on their canonical serialization.
            return value.is_text() ? value.as_text() : to_json(value).dump();
        case KeyTransformKind::PrefixK: {
            if (!value.is_text()) {
                throw ConfigError("prefix_k blocking requires a text attribute: '" +
                                  key_attribute + "'");
            }
            return text::utf8_prefix(value.as_text(),
                                     static_cast<std::size_t>(transform.prefix_length));
        }
        case KeyTransformKind::SoundexLike: {
            if (!value.is_text()) {
                throw ConfigError("soundex_like blocking requires a text attribute: '" +
                                  key_attribute + "'");
            }
            std::string code = text::soundex(value.as_text());
            if (code.empty()) return std::nullopt;
            return code;
        }
    }
    return std::nullopt;
}

ComparisonSpace full_space(const std::vector<EntityReference>& refs) {
    std::vector<std::string> ids;
    ids.reserve(refs.size());
    for (const auto& ref : refs) ids.push_back(ref.ref_id);
    std::sort(ids.begin(), ids.end());

    ComparisonSpace space;
    space.stats.total_references = static_cast<std::int64_t>(refs.size());
    if (ids.size() >= 2) {
        space.groups.reserve(ids.size() * (ids.size() - 1) / 2);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            for (std::size_t j = i + 1; j < ids.size(); ++j) {
                CandidateGroup group;
                group.member_ids = {ids[i], ids[j]};
                space.groups.push_back(std::move(group));
            }
        }
    }
    // Pairs from a sorted id list are already sorted and distinct.
    space.stats.group_count = static_cast<std::int64_t>(space.groups.size());
    return space;
}

BlockIndex block_by_key(const std::vector<EntityReference>& refs,
                        const std::string& key_attribute, const KeyTransform& transform) {
    BlockIndex index;
    for (const auto& ref : refs) {
        auto key = block_key(ref, key_attribute, transform);
        if (!key) {
            ++index.missing_key_count;
            continue;
        }
        index.blocks[*key].push_back(ref.ref_id);
    }
    for (auto& [key, members] : index.blocks) {
        std::sort(members.begin(), members.end());
    }
    return index;
}

ComparisonSpace pairs_from_blocks(const BlockIndex& blocks, std::int64_t total_references) {
    ComparisonSpace space;
    space.stats.total_references = total_references;
    for (const auto& [key, members] : blocks.blocks) {
        for (std::size_t i = 0; i < members.size(); ++i) {
            for (std::size_t j = i + 1; j < members.size(); ++j) {
                space.groups.push_back(pair_group(members[i], members[j]));
            }
        }
    }
    finalize_groups(space);
    return space;
}

ComparisonSpace sorted_neighborhood(const std::vector<EntityReference>& refs,
                                    const std::string& key_attribute, std::int64_t window) {
    if (window < 2) {
        throw ConfigError("sorted_neighborhood window must be >= 2");
    }
    struct Entry {
        bool missing;
        std::string key;
        std::string ref_id;
    };
    std::vector<Entry> entries;
    entries.reserve(refs.size());
    for (const auto& ref : refs) {
        auto it = ref.attributes.find(key_attribute);
        if (it == ref.attributes.end()) {
            entries.push_back({true, "", ref.ref_id});
            continue;
        }
        if (!it->second.is_text()) {
            throw ConfigError("sorted_neighborhood requires a text key attribute: '" +
                              key_attribute + "'");
        }
        entries.push_back({false, it->second.as_text(), ref.ref_id});
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return std::tie(a.missing, a.key, a.ref_id) < std::tie(b.missing, b.key, b.ref_id);
    });

    ComparisonSpace space;
    space.stats.total_references = static_cast<std::int64_t>(refs.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        std::size_t last = std::min(entries.size(), i + static_cast<std::size_t>(window));
        for (std::size_t j = i + 1; j < last; ++j) {
            space.groups.push_back(pair_group(entries[i].ref_id, entries[j].ref_id));
        }
    }
    finalize_groups(space);
    return space;
}

FilterResult filter_shared_tokens(const ComparisonSpace& space,
                                  const std::vector<EntityReference>& refs,
                                  const std::string& attribute, std::int64_t min_shared) {
    if (min_shared < 1) {
        throw ConfigError("filter min_shared must be >= 1");
    }
    std::unordered_map<std::string, const std::set<std::string>*> tokens_by_ref;
    tokens_by_ref.reserve(refs.size());
    for (const auto& ref : refs) {
        auto it = ref.attributes.find(attribute);
        if (it == ref.attributes.end()) continue;
        if (!it->second.is_token_set()) {
            throw ConfigError("filter attribute '" + attribute + "' must be a token_set");
        }
        tokens_by_ref[ref.ref_id] = &it->second.as_tokens();
    }

    FilterResult result;
    result.space.stats.total_references = space.stats.total_references;
    for (const auto& group : space.groups) {
        bool keep = true;
        if (group.member_ids.size() == 2) {
            auto a = tokens_by_ref.find(group.member_ids[0]);
            auto b = tokens_by_ref.find(group.member_ids[1]);
            if (a != tokens_by_ref.end() && b != tokens_by_ref.end()) {
                std::int64_t shared = 0;
                const auto& sa = *a->second;
                const auto& sb = *b->second;
                const auto& small = sa.size() <= sb.size() ? sa : sb;
                const auto& large = sa.size() <= sb.size() ? sb : sa;
                for (const auto& token : small) {
                    if (large.count(token) != 0 && ++shared >= min_shared) break;
                }
                keep = shared >= min_shared;
            }
        }
        if (keep) {
            result.space.groups.push_back(group);
        } else {
            ++result.removed;
        }
    }
    result.space.stats.group_count = static_cast<std::int64_t>(result.space.groups.size());
    return result;
}

}  // namespace erkit
