#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "erkit/types.hpp"

namespace erkit {

enum class ArtifactKind { References, ComparisonSpace, Edges, Partition, Profiles };

const char* to_string(ArtifactKind kind);
ArtifactKind artifact_kind_from_string(const std::string& s);

struct StoreVersion {
    std::int64_t version = 0;
    std::string created_at;                    // UTC, RFC 3339
    std::map<std::string, std::int64_t> counts;  // artifact kind name -> item count
};

// Versioned repository for pipeline artifacts. Writes are serialized and
// publish a new immutable version; readers see complete versions only.
//
// References, comparison-space groups, edges and profiles accumulate as a
// set union across versions. A partition write replaces the previous
// partition (a partition is a snapshot of cluster state, unioning two of
// them would break disjointness); earlier versions still expose the
// partition they were written with.
class ReferenceStore {
public:
    // In-memory store.
    ReferenceStore();
    // Append-only file-backed store; replays `path` when it exists and
    // continues appending to it. An index sidecar `path + ".idx"` tracks the
    // last committed offset.
    explicit ReferenceStore(const std::string& path);

    ReferenceStore(const ReferenceStore&) = delete;
    ReferenceStore& operator=(const ReferenceStore&) = delete;

    StoreVersion put_references(const std::vector<EntityReference>& items);
    StoreVersion put_comparison_space(const std::vector<CandidateGroup>& items);
    StoreVersion put_edges(const std::vector<MatchEdge>& items);
    StoreVersion put_partition(const ClusterPartition& partition);
    StoreVersion put_profiles(const std::vector<EntityProfile>& items);

    std::vector<EntityReference> get_references(std::optional<std::int64_t> at_version = {}) const;
    std::vector<CandidateGroup> get_comparison_space(
        std::optional<std::int64_t> at_version = {}) const;
    std::vector<MatchEdge> get_edges(std::optional<std::int64_t> at_version = {}) const;
    ClusterPartition get_partition(std::optional<std::int64_t> at_version = {}) const;
    std::vector<EntityProfile> get_profiles(std::optional<std::int64_t> at_version = {}) const;

    std::int64_t latest_version() const;
    std::vector<StoreVersion> versions() const;

    // Full dump: header line, JSONL segments per artifact kind, trailing
    // FNV-1a checksum line. Requires a quiescent store.
    void snapshot(const std::string& path) const;

    // All-or-nothing load of a snapshot file into a fresh in-memory store.
    static std::unique_ptr<ReferenceStore> restore(const std::string& path);

private:
    struct Event {
        std::int64_t version;
        ArtifactKind kind;
        std::string line;  // canonical serialization of one item
    };

    StoreVersion put_lines(ArtifactKind kind, std::vector<std::string> lines);
    std::vector<std::string> lines_at(ArtifactKind kind, std::optional<std::int64_t> at) const;
    void replay_log();
    void append_to_log(const std::vector<Event>& events, const StoreVersion& version);
    void load_events(std::vector<Event> events, std::vector<StoreVersion> versions);

    mutable std::shared_mutex mutex_;
    std::vector<Event> events_;          // ordered by version
    std::vector<StoreVersion> versions_;
    std::map<std::string, std::string> reference_content_;  // ref_id -> canonical line
    std::string log_path_;  // empty for the memory backend
};

}  // namespace erkit
