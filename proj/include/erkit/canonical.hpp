#pragma once

// Canonical JSON for every core type: one object per line, map keys in
// ascending lexicographic order, so equal values serialize to equal bytes.

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "erkit/types.hpp"

namespace erkit {

using Json = nlohmann::json;  // std::map-backed: keys come out sorted

Json to_json(const AttributeValue& value);
Json to_json(const AttributeMap& attributes);
Json to_json(const Provenance& provenance);
Json to_json(const InformationRecord& record);
Json to_json(const EntityReference& reference);
Json to_json(const CandidateGroup& group);
Json to_json(const MatchEdge& edge);
Json to_json(const EntityProfile& profile);

AttributeValue attribute_value_from_json(const Json& j);
AttributeMap attribute_map_from_json(const Json& j);
Provenance provenance_from_json(const Json& j);
InformationRecord record_from_json(const Json& j);
EntityReference reference_from_json(const Json& j);
CandidateGroup candidate_group_from_json(const Json& j);
MatchEdge edge_from_json(const Json& j);
EntityProfile profile_from_json(const Json& j);

template <typename T>
std::string canonical_line(const T& value) {
    return to_json(value).dump();
}

// One JSON object per line; a trailing newline after every line.
std::string references_to_jsonl(const std::vector<EntityReference>& refs);
std::string groups_to_jsonl(const std::vector<CandidateGroup>& groups);
std::string edges_to_jsonl(const std::vector<MatchEdge>& edges);
std::string profiles_to_jsonl(const std::vector<EntityProfile>& profiles);
// One cluster per line: {"members": [...]}.
std::string partition_to_jsonl(const ClusterPartition& partition);

std::vector<EntityReference> references_from_jsonl(std::istream& in);
std::vector<EntityProfile> profiles_from_jsonl(std::istream& in);
std::vector<MatchEdge> edges_from_jsonl(std::istream& in);
std::vector<CandidateGroup> groups_from_jsonl(std::istream& in);
ClusterPartition partition_from_jsonl(std::istream& in);

GroundTruth ground_truth_from_jsonl(std::istream& in);

// FNV-1a 64-bit, as 16 lowercase hex characters.
std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

}  // namespace erkit
