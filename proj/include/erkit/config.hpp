#pragma once

#include <optional>
#include <string>
#include <vector>

#include "erkit/comparison_space.hpp"
#include "erkit/extraction.hpp"
#include "erkit/matching.hpp"
#include "erkit/clustering.hpp"
#include "erkit/types.hpp"

namespace erkit {

enum class RunMode { Batch, Incremental };
enum class StoreBackend { Memory, File };

struct ComparisonConfig {
    enum class Strategy { Full, BlockKey, SortedNeighborhood };
    Strategy strategy = Strategy::Full;
    std::string key_attribute;       // block_key, sorted_neighborhood
    KeyTransform key_transform;      // block_key
    std::int64_t window = 2;         // sorted_neighborhood
};

struct FilterConfig {
    std::string attribute;
    std::int64_t min_shared = 1;
};

struct StoreConfig {
    StoreBackend backend = StoreBackend::Memory;
    std::string path;          // file backend
    bool persist_artifacts = false;  // batch: write stage outputs to the store
};

struct RuntimeConfig {
    RunMode mode = RunMode::Batch;
    std::vector<SourceDescriptor> sources;
    CleaningRules cleaning;
    std::map<std::string, std::vector<Extractor>> chains;  // source_id -> chain
    RecordErrorPolicy record_errors = RecordErrorPolicy::Skip;
    ComparisonConfig comparison;
    std::optional<FilterConfig> filter;
    std::optional<MatcherConfig> matcher;
    std::optional<ClustererKind> clusterer;
    ProfileRepresentation assembly = ProfileRepresentation::Partition;
    StoreConfig store;
    std::size_t threads = 1;
};

// Parses the {"version": 1, ...} config document; unknown keys are rejected.
RuntimeConfig parse_runtime_config(const std::string& json_text);
RuntimeConfig load_runtime_config(const std::string& path);

// Cross-field checks: distinct source ids, chains for every non-passthrough
// source, referenced attributes produced by some extractor, strategy
// constraints for the chosen mode.
void validate_runtime_config(const RuntimeConfig& cfg);

}  // namespace erkit
