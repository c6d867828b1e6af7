#pragma once

#include <vector>

#include "erkit/types.hpp"

namespace erkit {

// One pair-profile per match-labeled edge; other labels are ignored.
std::vector<EntityProfile> assemble_pairs(const std::vector<MatchEdge>& edges,
                                          const std::vector<EntityReference>& refs);

// One profile per cluster, singletons included.
std::vector<EntityProfile> assemble_partitions(const ClusterPartition& partition,
                                               const std::vector<EntityReference>& refs);

// Per cluster, each attribute resolves to the most frequent value among
// members; ties break toward the smallest canonical serialization. Member
// ids stay on the profile so it remains deconstructible.
std::vector<EntityProfile> assemble_merged(const ClusterPartition& partition,
                                           const std::vector<EntityReference>& refs);

// Feedback loop: merged profiles become references for a later run.
std::vector<EntityReference> profiles_to_references(const std::vector<EntityProfile>& profiles);

}  // namespace erkit
