#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>

#include "erkit/types.hpp"

namespace erkit {

// What to do with predicted pairs naming refs the truth does not know. The
// default counts them as false positives (a predicted pair not in the truth
// is wrong); Ignore drops them from the confusion counts. Either way the
// count is reported separately.
enum class UnknownRefPolicy { CountAsFp, Ignore };

struct PairwiseMetrics {
    double precision = 1.0;  // 1.0 when nothing was predicted
    double recall = 1.0;     // 1.0 when the truth holds no pairs
    double f1 = 1.0;
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t unknown_ref_pairs = 0;  // reported separately from tp/fp/fn
};

PairwiseMetrics pairwise_metrics(const std::set<std::pair<std::string, std::string>>& predicted,
                                 const GroundTruth& truth,
                                 UnknownRefPolicy policy = UnknownRefPolicy::CountAsFp);

// Chance-corrected partition agreement via the contingency-table formula.
// 1.0 for identical partitions (including degenerate ones).
double adjusted_rand_index(const ClusterPartition& a, const ClusterPartition& b);

struct BlockingMetrics {
    double reduction_ratio = 0.0;
    double pair_completeness = 1.0;  // 1.0 when the truth holds no pairs
    std::int64_t space_pairs = 0;
    std::int64_t truth_pairs = 0;
};

// Groups larger than 2 count as all their within-group pairs.
BlockingMetrics blocking_metrics(const ComparisonSpace& space, const GroundTruth& truth,
                                 std::int64_t total_references);

}  // namespace erkit
