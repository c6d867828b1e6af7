#pragma once

#include <memory>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>
#include <unordered_set>

#include "erkit/canonical.hpp"
#include "erkit/clustering.hpp"
#include "erkit/config.hpp"
#include "erkit/reference_store.hpp"
#include "erkit/types.hpp"

namespace erkit {

struct StageTimes {
    double extraction_ms = 0.0;
    double comparison_ms = 0.0;
    double matching_ms = 0.0;
    double clustering_ms = 0.0;
    double assembly_ms = 0.0;
};

struct RunReport {
    // extraction
    std::int64_t records_read = 0;
    std::int64_t malformed_records = 0;
    std::int64_t parse_failures = 0;
    std::int64_t collisions = 0;
    std::int64_t dropped_zero_attribute = 0;
    std::int64_t references_built = 0;
    // comparison space
    std::int64_t groups_generated = 0;
    std::int64_t groups_filtered_out = 0;
    std::int64_t groups_final = 0;
    std::int64_t missing_block_key = 0;
    // matching
    bool matching_ran = false;
    std::int64_t pairs_scored = 0;
    std::int64_t edges_match = 0;
    std::int64_t edges_possible = 0;
    std::int64_t edges_non_match = 0;
    // clustering
    bool clustering_ran = false;
    std::int64_t clusters = 0;
    // assembly
    std::int64_t profiles = 0;

    StageTimes wall;

    Json to_json() const;
};

struct BatchResult {
    std::vector<EntityProfile> profiles;  // canonical order
    RunReport report;
};

// Runs extraction -> comparison space -> (matching) -> (clustering) ->
// assembly. Deterministic for fixed config and inputs, including across
// matcher thread counts.
BatchResult run_batch(const RuntimeConfig& cfg);

// Long-lived incremental engine: ingests one record at a time, matches it
// against stored references only, folds match edges into live union-find
// state and persists reference/edges/partition per ingest. The cumulative
// partition equals run_batch over the same records under
// connected_components, in any ingestion order.
class IncrementalPipeline {
public:
    // cfg.mode must be incremental. A file-backed store is replayed and the
    // runtime state rebuilt from stored references and match edges.
    explicit IncrementalPipeline(RuntimeConfig cfg);

    struct IngestResult {
        std::string ref_id;
        bool dropped = false;                // record yielded no attributes
        bool already_known = false;          // idempotent re-ingest
        std::vector<EntityProfile> profiles;  // profiles containing the new ref
    };

    IngestResult ingest(InformationRecord record);

    std::vector<EntityProfile> query_by_ref(const std::string& ref_id) const;
    std::vector<EntityProfile> query_by_attribute(const std::string& attribute,
                                                  const std::string& value) const;

    ClusterPartition partition() const;
    Json report() const;
    std::int64_t store_version() const { return store_->latest_version(); }
    const RuntimeConfig& config() const { return cfg_; }

private:
    std::vector<EntityProfile> profiles_for_members(
        const std::vector<std::string>& member_ids) const;
    std::vector<EntityProfile> profiles_for_cluster(const std::vector<std::string>& cluster) const;
    void index_reference(const EntityReference& ref, std::size_t index);
    const SourceDescriptor& source_for(const std::string& source_id) const;

    RuntimeConfig cfg_;
    std::unique_ptr<ReferenceStore> store_;

    mutable std::shared_mutex state_mutex_;
    std::vector<EntityReference> refs_;
    std::unordered_map<std::string, std::size_t> ref_index_;
    std::unordered_map<std::string, std::vector<std::string>> block_members_;
    std::vector<MatchEdge> match_edges_;  // match-labeled, for pair assembly
    UnionFind components_;
    std::map<std::string, std::int64_t> next_ordinal_;
    std::int64_t ingest_seq_ = 0;
    RunReport totals_;
};

}  // namespace erkit
