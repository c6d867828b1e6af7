#include "erkit/profile_assembly.hpp"

#include <algorithm>
#include <unordered_map>

#include "erkit/canonical.hpp"

namespace erkit {

namespace {

using RefLookup = std::unordered_map<std::string, const EntityReference*>;

RefLookup index_refs(const std::vector<EntityReference>& refs) {
    RefLookup lookup;
    lookup.reserve(refs.size());
    for (const auto& ref : refs) lookup[ref.ref_id] = &ref;
    return lookup;
}

const EntityReference& resolve(const RefLookup& lookup, const std::string& ref_id) {
    auto it = lookup.find(ref_id);
    if (it == lookup.end()) {
        throw InvalidArgumentError("profile member '" + ref_id + "' is not a known reference");
    }
    return *it->second;
}

Provenance member_provenance(const RefLookup& lookup, const std::vector<std::string>& members) {
    Provenance out;
    for (const auto& id : members) {
        out = merge_provenance(out, resolve(lookup, id).provenance);
    }
    return out;
}

void sort_by_profile_id(std::vector<EntityProfile>& profiles) {
    std::sort(profiles.begin(), profiles.end(),
              [](const EntityProfile& a, const EntityProfile& b) {
                  return a.profile_id < b.profile_id;
              });
}

}  // namespace

std::vector<EntityProfile> assemble_pairs(const std::vector<MatchEdge>& edges,
                                          const std::vector<EntityReference>& refs) {
    RefLookup lookup = index_refs(refs);
    std::vector<EntityProfile> profiles;
    for (const auto& edge : edges) {
        if (edge.label != MatchLabel::Match) continue;
        EntityProfile profile;
        profile.profile_id = "p:" + edge.a + "+" + edge.b;
        profile.representation = ProfileRepresentation::Pair;
        profile.member_ids = {edge.a, edge.b};
        profile.provenance = member_provenance(lookup, profile.member_ids);
        profiles.push_back(std::move(profile));
    }
    sort_by_profile_id(profiles);
    return profiles;
}

std::vector<EntityProfile> assemble_partitions(const ClusterPartition& partition,
                                               const std::vector<EntityReference>& refs) {
    validate_partition(partition);
    RefLookup lookup = index_refs(refs);
    std::vector<EntityProfile> profiles;
    profiles.reserve(partition.clusters.size());
    for (const auto& cluster : partition.clusters) {
        EntityProfile profile;
        profile.profile_id = "p:" + cluster.front();
        profile.representation = ProfileRepresentation::Partition;
        profile.member_ids = cluster;
        profile.provenance = member_provenance(lookup, cluster);
        profiles.push_back(std::move(profile));
    }
    sort_by_profile_id(profiles);
    return profiles;
}

std::vector<EntityProfile> assemble_merged(const ClusterPartition& partition,
                                           const std::vector<EntityReference>& refs) {
    validate_partition(partition);
    RefLookup lookup = index_refs(refs);
    std::vector<EntityProfile> profiles;
    profiles.reserve(partition.clusters.size());
    for (const auto& cluster : partition.clusters) {
        // Per attribute: canonical serialization -> (votes, value).
        std::map<std::string, std::map<std::string, std::pair<std::int64_t, AttributeValue>>>
            tallies;
        for (const auto& id : cluster) {
            for (const auto& [name, value] : resolve(lookup, id).attributes) {
                auto& slot = tallies[name];
                auto it = slot.try_emplace(to_json(value).dump(), 0, value).first;
                ++it->second.first;
            }
        }
        AttributeMap merged;
        for (const auto& [name, votes] : tallies) {
            const std::pair<const std::string, std::pair<std::int64_t, AttributeValue>>* best =
                nullptr;
            for (const auto& entry : votes) {
                // Ties break toward the smaller serialization, which is the
                // first key visited in map order.
                if (!best || entry.second.first > best->second.first) best = &entry;
            }
            merged.emplace(name, best->second.second);
        }

        EntityProfile profile;
        profile.profile_id = "p:" + cluster.front();
        profile.representation = ProfileRepresentation::Merged;
        profile.member_ids = cluster;
        profile.merged_attributes = std::move(merged);
        profile.provenance = member_provenance(lookup, cluster);
        profiles.push_back(std::move(profile));
    }
    sort_by_profile_id(profiles);
    return profiles;
}

std::vector<EntityReference> profiles_to_references(const std::vector<EntityProfile>& profiles) {
    std::vector<EntityReference> refs;
    refs.reserve(profiles.size());
    for (const auto& profile : profiles) {
        if (profile.representation != ProfileRepresentation::Merged) {
            throw InvalidArgumentError("profile '" + profile.profile_id +
                                       "' is not a merged profile; only merged profiles can "
                                       "feed back as references");
        }
        EntityReference ref;
        ref.ref_id = profile.profile_id;
        ref.source_id = "profiles";
        ref.attributes = *profile.merged_attributes;
        ref.provenance = profile.provenance;
        refs.push_back(std::move(ref));
    }
    return refs;
}

}  // namespace erkit
