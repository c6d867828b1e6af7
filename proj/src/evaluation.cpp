#include "erkit/evaluation.hpp"

#include <map>

namespace erkit {

PairwiseMetrics pairwise_metrics(const std::set<std::pair<std::string, std::string>>& predicted,
                                 const GroundTruth& truth, UnknownRefPolicy policy) {
    const auto truth_pairs = truth.as_pairs();
    const auto known = truth.universe();

    PairwiseMetrics out;
    for (const auto& pair : predicted) {
        auto normalized = ordered_pair(pair.first, pair.second);
        if (known.count(normalized.first) == 0 || known.count(normalized.second) == 0) {
            ++out.unknown_ref_pairs;
            if (policy == UnknownRefPolicy::CountAsFp) ++out.fp;
            continue;
        }
        if (truth_pairs.count(normalized) != 0) {
            ++out.tp;
        } else {
            ++out.fp;
        }
    }
    for (const auto& pair : truth_pairs) {
        auto normalized = pair;
        bool hit = predicted.count(normalized) != 0 ||
                   predicted.count({normalized.second, normalized.first}) != 0;
        if (!hit) ++out.fn;
    }

    out.precision = out.tp + out.fp == 0
                        ? 1.0
                        : static_cast<double>(out.tp) / static_cast<double>(out.tp + out.fp);
    out.recall = out.tp + out.fn == 0
                     ? 1.0
                     : static_cast<double>(out.tp) / static_cast<double>(out.tp + out.fn);
    out.f1 = out.precision + out.recall == 0.0
                 ? 0.0
                 : 2.0 * out.precision * out.recall / (out.precision + out.recall);
    return out;
}

namespace {

double choose2(std::int64_t n) { return 0.5 * static_cast<double>(n) * static_cast<double>(n - 1); }

}  // namespace

double adjusted_rand_index(const ClusterPartition& a, const ClusterPartition& b) {
    validate_partition(a);
    validate_partition(b);
    if (a.universe != b.universe) {
        throw InvalidArgumentError("adjusted_rand_index requires partitions over one universe");
    }

    std::map<std::string, std::size_t> cluster_of_b;
    for (std::size_t j = 0; j < b.clusters.size(); ++j) {
        for (const auto& id : b.clusters[j]) cluster_of_b[id] = j;
    }

    double sum_cells = 0.0;  // sum over the contingency table of C(n_ij, 2)
    std::vector<std::int64_t> col_sums(b.clusters.size(), 0);
    for (const auto& row : a.clusters) {
        std::map<std::size_t, std::int64_t> cells;
        for (const auto& id : row) ++cells[cluster_of_b.at(id)];
        for (const auto& [j, count] : cells) {
            sum_cells += choose2(count);
            col_sums[j] += count;
        }
    }
    double sum_rows = 0.0;
    for (const auto& row : a.clusters) sum_rows += choose2(static_cast<std::int64_t>(row.size()));
    double sum_cols = 0.0;
    for (std::int64_t col : col_sums) sum_cols += choose2(col);

    double total_pairs = choose2(static_cast<std::int64_t>(a.universe.size()));
    if (total_pairs == 0.0) return 1.0;  // zero or one element: partitions coincide
    double expected = sum_rows * sum_cols / total_pairs;
    double maximum = 0.5 * (sum_rows + sum_cols);
    if (maximum == expected) {
        // Degenerate agreement (e.g. both all-singletons or both one cluster).
        return 1.0;
    }
    return (sum_cells - expected) / (maximum - expected);
}

BlockingMetrics blocking_metrics(const ComparisonSpace& space, const GroundTruth& truth,
                                 std::int64_t total_references) {
    std::set<std::pair<std::string, std::string>> space_pairs;
    for (const auto& group : space.groups) {
        for (std::size_t i = 0; i < group.member_ids.size(); ++i) {
            for (std::size_t j = i + 1; j < group.member_ids.size(); ++j) {
                space_pairs.insert(ordered_pair(group.member_ids[i], group.member_ids[j]));
            }
        }
    }
    const auto truth_pairs = truth.as_pairs();

    BlockingMetrics out;
    out.space_pairs = static_cast<std::int64_t>(space_pairs.size());
    out.truth_pairs = static_cast<std::int64_t>(truth_pairs.size());

    double full = choose2(total_references);
    out.reduction_ratio =
        full > 0.0 ? 1.0 - static_cast<double>(space_pairs.size()) / full : 0.0;

    if (truth_pairs.empty()) {
        out.pair_completeness = 1.0;
    } else {
        std::int64_t covered = 0;
        for (const auto& pair : truth_pairs) {
            if (space_pairs.count(pair) != 0) ++covered;
        }
        out.pair_completeness =
            static_cast<double>(covered) / static_cast<double>(truth_pairs.size());
    }
    return out;
}

}  // namespace erkit
