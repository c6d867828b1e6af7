#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "erkit/types.hpp"

namespace erkit {

enum class ClustererKind { ConnectedComponents, UniqueMapping };

const char* to_string(ClustererKind kind);
ClustererKind clusterer_kind_from_string(const std::string& s);

// Union-find over ref_ids with path compression and union by size.
// Single-writer; partition() materializes a canonical snapshot.
class UnionFind {
public:
    // Registers an id (no-op when known).
    void add(const std::string& ref_id);
    bool contains(const std::string& ref_id) const;

    // Union the endpoints of every match-labeled edge. Unknown endpoints
    // raise InvalidArgumentError.
    void merge_edges(const std::vector<MatchEdge>& edges);
    void merge(const std::string& a, const std::string& b);

    // Ids sharing a component with ref_id (including itself), sorted.
    std::vector<std::string> component_of(const std::string& ref_id) const;

    ClusterPartition partition() const;
    std::size_t size() const { return ids_.size(); }

private:
    std::size_t find(std::size_t node) const;
    std::size_t index_of(const std::string& ref_id) const;

    std::vector<std::string> ids_;
    std::unordered_map<std::string, std::size_t> index_;
    mutable std::vector<std::size_t> parent_;
    std::vector<std::size_t> component_size_;
};

// Two refs share a cluster iff a path of match-labeled edges connects them;
// singletons stay on their own.
ClusterPartition connected_components(const std::vector<EntityReference>& refs,
                                      const std::vector<MatchEdge>& edges);

// Greedy one-to-one linkage for two-source setups: edges sorted by
// (score desc, a, b), accepted when both endpoints are still free.
ClusterPartition unique_mapping(const std::vector<EntityReference>& refs,
                                const std::vector<MatchEdge>& edges);

// Merges new match-labeled edges into live state and returns the resulting
// partition; equals connected_components over the cumulative edge set.
ClusterPartition incremental_merge(UnionFind& state, const std::vector<MatchEdge>& new_edges);

}  // namespace erkit
