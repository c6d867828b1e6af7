#include "erkit/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <tuple>

#include "erkit/comparison_space.hpp"
#include "erkit/matching.hpp"
#include "erkit/profile_assembly.hpp"

namespace erkit {

namespace {

class StageTimer {
public:
    explicit StageTimer(double& slot)
        : slot_(slot), start_(std::chrono::steady_clock::now()) {}
    ~StageTimer() {
        auto elapsed = std::chrono::steady_clock::now() - start_;
        slot_ = std::chrono::duration<double, std::milli>(elapsed).count();
    }

private:
    double& slot_;
    std::chrono::steady_clock::time_point start_;
};

Json stage_json(std::initializer_list<std::pair<const char*, std::int64_t>> counts,
                double wall_ms) {
    Json j = Json::object();
    for (const auto& [key, value] : counts) j[key] = value;
    j["wall_ms"] = wall_ms;
    return j;
}

}  // namespace

Json RunReport::to_json() const {
    Json stages = Json::object();
    stages["extraction"] = stage_json({{"records_read", records_read},
                                       {"malformed_records", malformed_records},
                                       {"parse_failures", parse_failures},
                                       {"collisions", collisions},
                                       {"dropped_zero_attribute", dropped_zero_attribute},
                                       {"references_built", references_built}},
                                      wall.extraction_ms);
    stages["comparison_space"] = stage_json({{"groups_generated", groups_generated},
                                             {"groups_filtered_out", groups_filtered_out},
                                             {"groups_final", groups_final},
                                             {"missing_block_key", missing_block_key}},
                                            wall.comparison_ms);
    if (matching_ran) {
        stages["matching"] = stage_json({{"pairs_scored", pairs_scored},
                                         {"match", edges_match},
                                         {"possible", edges_possible},
                                         {"non_match", edges_non_match}},
                                        wall.matching_ms);
    }
    if (clustering_ran) {
        stages["clustering"] = stage_json({{"clusters", clusters}}, wall.clustering_ms);
    }
    stages["assembly"] = stage_json({{"profiles", profiles}}, wall.assembly_ms);

    Json out = Json::object();
    out["stages"] = std::move(stages);
    return out;
}

namespace {

std::vector<EntityReference> extract_all(const RuntimeConfig& cfg, RunReport& report) {
    StageTimer timer(report.wall.extraction_ms);
    std::vector<EntityReference> refs;
    std::set<std::string> seen_ids;
    for (const auto& source : cfg.sources) {
        ExtractionStats stats;
        static const std::vector<Extractor> kNoChain;
        auto chain_it = cfg.chains.find(source.source_id);
        const auto& chain = chain_it == cfg.chains.end() ? kNoChain : chain_it->second;
        auto built = build_references(source, cfg.cleaning, chain, cfg.record_errors, stats);
        report.records_read += stats.records_read;
        report.malformed_records += stats.malformed_records;
        report.parse_failures += stats.parse_failures;
        report.collisions += stats.collisions;
        report.dropped_zero_attribute += stats.dropped_zero_attribute;
        report.references_built += stats.references_built;
        for (auto& ref : built) {
            if (!seen_ids.insert(ref.ref_id).second) {
                throw SourceError(source.source_id,
                                  "ref_id '" + ref.ref_id + "' collides with another source");
            }
            refs.push_back(std::move(ref));
        }
    }
    return refs;
}

ComparisonSpace generate_space(const RuntimeConfig& cfg,
                               const std::vector<EntityReference>& refs, RunReport& report) {
    StageTimer timer(report.wall.comparison_ms);
    ComparisonSpace space;
    switch (cfg.comparison.strategy) {
        case ComparisonConfig::Strategy::Full:
            space = full_space(refs);
            break;
        case ComparisonConfig::Strategy::BlockKey: {
            auto index = block_by_key(refs, cfg.comparison.key_attribute,
                                      cfg.comparison.key_transform);
            report.missing_block_key = index.missing_key_count;
            space = pairs_from_blocks(index, static_cast<std::int64_t>(refs.size()));
            break;
        }
        case ComparisonConfig::Strategy::SortedNeighborhood:
            space = sorted_neighborhood(refs, cfg.comparison.key_attribute,
                                        cfg.comparison.window);
            break;
    }
    report.groups_generated = space.stats.group_count;

    if (cfg.filter) {
        auto filtered =
            filter_shared_tokens(space, refs, cfg.filter->attribute, cfg.filter->min_shared);
        report.groups_filtered_out = filtered.removed;
        space = std::move(filtered.space);
    }
    report.groups_final = space.stats.group_count;
    return space;
}

}  // namespace

BatchResult run_batch(const RuntimeConfig& cfg) {
    if (cfg.mode != RunMode::Batch) {
        throw ConfigError("run_batch requires mode = batch");
    }
    validate_runtime_config(cfg);

    BatchResult result;
    std::unique_ptr<ReferenceStore> store;
    if (cfg.store.persist_artifacts) {
        store = cfg.store.backend == StoreBackend::File
                    ? std::make_unique<ReferenceStore>(cfg.store.path)
                    : std::make_unique<ReferenceStore>();
    }

    auto refs = extract_all(cfg, result.report);
    if (store) store->put_references(refs);

    auto space = generate_space(cfg, refs, result.report);
    if (store) store->put_comparison_space(space.groups);

    std::vector<MatchEdge> edges;
    if (cfg.matcher) {
        StageTimer timer(result.report.wall.matching_ms);
        result.report.matching_ran = true;
        edges = match_space(space, *cfg.matcher, refs, cfg.threads);
        result.report.pairs_scored = static_cast<std::int64_t>(edges.size());
        for (const auto& edge : edges) {
            switch (edge.label) {
                case MatchLabel::Match: ++result.report.edges_match; break;
                case MatchLabel::Possible: ++result.report.edges_possible; break;
                case MatchLabel::NonMatch: ++result.report.edges_non_match; break;
            }
        }
        if (store) store->put_edges(edges);
        // Downstream stages only consume match-labeled edges.
        std::erase_if(edges, [](const MatchEdge& e) { return e.label != MatchLabel::Match; });
        edges.shrink_to_fit();
    }

    std::optional<ClusterPartition> partition;
    if (cfg.clusterer) {
        StageTimer timer(result.report.wall.clustering_ms);
        result.report.clustering_ran = true;
        partition = *cfg.clusterer == ClustererKind::ConnectedComponents
                        ? connected_components(refs, edges)
                        : unique_mapping(refs, edges);
        result.report.clusters = static_cast<std::int64_t>(partition->clusters.size());
        if (store && !partition->clusters.empty()) store->put_partition(*partition);
    }

    {
        StageTimer timer(result.report.wall.assembly_ms);
        switch (cfg.assembly) {
            case ProfileRepresentation::Pair:
                result.profiles = assemble_pairs(edges, refs);
                break;
            case ProfileRepresentation::Partition:
                result.profiles = assemble_partitions(*partition, refs);
                break;
            case ProfileRepresentation::Merged:
                result.profiles = assemble_merged(*partition, refs);
                break;
        }
        result.report.profiles = static_cast<std::int64_t>(result.profiles.size());
    }
    if (store) store->put_profiles(result.profiles);

    return result;
}

// ---------------------------------------------------------------------------
// Incremental
// ---------------------------------------------------------------------------

IncrementalPipeline::IncrementalPipeline(RuntimeConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.mode != RunMode::Incremental) {
        throw ConfigError("IncrementalPipeline requires mode = incremental");
    }
    validate_runtime_config(cfg_);
    if (!cfg_.clusterer) {
        throw ConfigError("incremental mode requires a clusterer");
    }

    store_ = cfg_.store.backend == StoreBackend::File
                 ? std::make_unique<ReferenceStore>(cfg_.store.path)
                 : std::make_unique<ReferenceStore>();

    // Rebuild runtime state: references and match edges are authoritative
    // (the partition always equals components over the cumulative edges).
    for (auto& ref : store_->get_references()) {
        index_reference(ref, refs_.size());
        refs_.push_back(std::move(ref));
    }
    totals_.references_built = static_cast<std::int64_t>(refs_.size());
    totals_.records_read = totals_.references_built;
    for (auto& edge : store_->get_edges()) {
        if (edge.label != MatchLabel::Match) continue;
        components_.merge(edge.a, edge.b);
        match_edges_.push_back(std::move(edge));
    }
    if (!refs_.empty()) {
        totals_.clustering_ran = true;
        totals_.clusters = static_cast<std::int64_t>(components_.partition().clusters.size());
        totals_.profiles = cfg_.assembly == ProfileRepresentation::Pair
                               ? static_cast<std::int64_t>(match_edges_.size())
                               : totals_.clusters;
    }
}

const SourceDescriptor& IncrementalPipeline::source_for(const std::string& source_id) const {
    for (const auto& source : cfg_.sources) {
        if (source.source_id == source_id) return source;
    }
    throw InvalidArgumentError("record names undeclared source '" + source_id + "'");
}

void IncrementalPipeline::index_reference(const EntityReference& ref, std::size_t index) {
    ref_index_[ref.ref_id] = index;
    components_.add(ref.ref_id);
    if (cfg_.comparison.strategy == ComparisonConfig::Strategy::BlockKey) {
        auto key = block_key(ref, cfg_.comparison.key_attribute, cfg_.comparison.key_transform);
        if (key) block_members_[*key].push_back(ref.ref_id);
    }
    for (const auto& [source_id, ordinal] : ref.provenance) {
        auto& next = next_ordinal_[source_id];
        next = std::max(next, ordinal + 1);
    }
}

IncrementalPipeline::IngestResult IncrementalPipeline::ingest(InformationRecord record) {
    std::unique_lock lock(state_mutex_);
    const SourceDescriptor& source = source_for(record.source_id);
    if (source.kind == SourceKind::ReferencePassthrough) {
        throw InvalidArgumentError("passthrough sources cannot ingest records");
    }
    if (record.record_ordinal < 0) {
        auto it = next_ordinal_.find(record.source_id);
        record.record_ordinal = it == next_ordinal_.end() ? 0 : it->second;
    }
    record.ingest_seq = ingest_seq_++;
    ++totals_.records_read;

    // Extraction for this single record.
    InformationRecord cleaned = clean_record(record, cfg_.cleaning);
    AttributeMap attributes;
    auto chain_it = cfg_.chains.find(record.source_id);
    if (chain_it == cfg_.chains.end() || chain_it->second.empty()) {
        throw ConfigError("source '" + record.source_id + "' has no extractor chain");
    }
    ExtractionStats stats;
    for (const auto& extractor : chain_it->second) {
        for (auto& [name, value] : apply_extractor(extractor, {cleaned}, stats)) {
            attributes.insert_or_assign(name, std::move(value));
        }
    }
    totals_.parse_failures += stats.parse_failures;
    totals_.collisions += stats.collisions;

    IngestResult result;
    result.ref_id = make_reference_id(record.source_id, record.record_ordinal);
    if (attributes.empty()) {
        ++totals_.dropped_zero_attribute;
        result.dropped = true;
        return result;
    }

    EntityReference ref;
    ref.ref_id = result.ref_id;
    ref.source_id = record.source_id;
    ref.attributes = std::move(attributes);
    ref.provenance = {{record.source_id, record.record_ordinal}};

    if (auto existing = ref_index_.find(ref.ref_id); existing != ref_index_.end()) {
        if (canonical_line(refs_[existing->second]) != canonical_line(ref)) {
            throw ConflictError("ref_id '" + ref.ref_id +
                                "' already ingested with different content");
        }
        result.already_known = true;
        result.profiles = profiles_for_cluster(components_.component_of(ref.ref_id));
        return result;
    }

    // Candidates: the new reference against stored references only.
    std::vector<const EntityReference*> candidates;
    if (cfg_.comparison.strategy == ComparisonConfig::Strategy::Full) {
        candidates.reserve(refs_.size());
        for (const auto& stored : refs_) candidates.push_back(&stored);
    } else {
        auto key = block_key(ref, cfg_.comparison.key_attribute, cfg_.comparison.key_transform);
        if (key) {
            auto members = block_members_.find(*key);
            if (members != block_members_.end()) {
                for (const auto& id : members->second) {
                    candidates.push_back(&refs_[ref_index_.at(id)]);
                }
            }
        } else {
            ++totals_.missing_block_key;
        }
    }
    totals_.groups_generated += static_cast<std::int64_t>(candidates.size());

    if (cfg_.filter) {
        const auto attr = ref.attributes.find(cfg_.filter->attribute);
        const std::set<std::string>* new_tokens = nullptr;
        if (attr != ref.attributes.end()) {
            if (!attr->second.is_token_set()) {
                throw ConfigError("filter attribute '" + cfg_.filter->attribute +
                                  "' must be a token_set");
            }
            new_tokens = &attr->second.as_tokens();
        }
        if (new_tokens) {
            std::erase_if(candidates, [&](const EntityReference* other) {
                auto other_attr = other->attributes.find(cfg_.filter->attribute);
                if (other_attr == other->attributes.end()) return false;  // keep: missing side
                const auto& other_tokens = other_attr->second.as_tokens();
                std::int64_t shared = 0;
                for (const auto& token : *new_tokens) {
                    if (other_tokens.count(token) != 0 && ++shared >= cfg_.filter->min_shared) {
                        return false;
                    }
                }
                bool drop = shared < cfg_.filter->min_shared;
                if (drop) ++totals_.groups_filtered_out;
                return drop;
            });
        }
    }
    totals_.groups_final += static_cast<std::int64_t>(candidates.size());

    std::vector<MatchEdge> edges;
    if (cfg_.matcher && !candidates.empty()) {
        totals_.matching_ran = true;
        edges.reserve(candidates.size());
        for (const EntityReference* other : candidates) {
            edges.push_back(score_pair(*cfg_.matcher, ref, *other));
        }
        std::sort(edges.begin(), edges.end(), [](const MatchEdge& x, const MatchEdge& y) {
            return std::tie(x.a, x.b) < std::tie(y.a, y.b);
        });
        totals_.pairs_scored += static_cast<std::int64_t>(edges.size());
        for (const auto& edge : edges) {
            switch (edge.label) {
                case MatchLabel::Match: ++totals_.edges_match; break;
                case MatchLabel::Possible: ++totals_.edges_possible; break;
                case MatchLabel::NonMatch: ++totals_.edges_non_match; break;
            }
        }
    }

    // Publish to the store first; on failure the runtime state is unchanged.
    store_->put_references({ref});
    if (!edges.empty()) store_->put_edges(edges);

    refs_.push_back(ref);
    index_reference(refs_.back(), refs_.size() - 1);
    components_.merge_edges(edges);
    for (auto& edge : edges) {
        if (edge.label == MatchLabel::Match) match_edges_.push_back(std::move(edge));
    }
    ++totals_.references_built;

    auto current = components_.partition();
    totals_.clustering_ran = true;
    totals_.clusters = static_cast<std::int64_t>(current.clusters.size());
    totals_.profiles = cfg_.assembly == ProfileRepresentation::Pair
                           ? static_cast<std::int64_t>(match_edges_.size())
                           : totals_.clusters;
    store_->put_partition(current);

    result.profiles = profiles_for_cluster(components_.component_of(ref.ref_id));
    return result;
}

std::vector<EntityProfile> IncrementalPipeline::profiles_for_cluster(
    const std::vector<std::string>& cluster) const {
    switch (cfg_.assembly) {
        case ProfileRepresentation::Pair: {
            // Pair profiles over stored match edges inside this cluster.
            std::set<std::string> members(cluster.begin(), cluster.end());
            std::vector<MatchEdge> inside;
            for (const auto& edge : match_edges_) {
                if (members.count(edge.a) != 0 && members.count(edge.b) != 0) {
                    inside.push_back(edge);
                }
            }
            return assemble_pairs(inside, refs_);
        }
        case ProfileRepresentation::Partition:
        case ProfileRepresentation::Merged: {
            ClusterPartition sub;
            sub.clusters.push_back(cluster);
            sub.universe.insert(cluster.begin(), cluster.end());
            return cfg_.assembly == ProfileRepresentation::Partition
                       ? assemble_partitions(sub, refs_)
                       : assemble_merged(sub, refs_);
        }
    }
    return {};
}

std::vector<EntityProfile> IncrementalPipeline::profiles_for_members(
    const std::vector<std::string>& member_ids) const {
    std::map<std::string, EntityProfile> by_id;
    for (const auto& id : member_ids) {
        for (auto& profile : profiles_for_cluster(components_.component_of(id))) {
            by_id.emplace(profile.profile_id, std::move(profile));
        }
    }
    std::vector<EntityProfile> out;
    out.reserve(by_id.size());
    for (auto& [id, profile] : by_id) out.push_back(std::move(profile));
    return out;
}

std::vector<EntityProfile> IncrementalPipeline::query_by_ref(const std::string& ref_id) const {
    std::shared_lock lock(state_mutex_);
    if (ref_index_.count(ref_id) == 0) {
        throw NotFoundError("unknown ref '" + ref_id + "'");
    }
    return profiles_for_members({ref_id});
}

std::vector<EntityProfile> IncrementalPipeline::query_by_attribute(
    const std::string& attribute, const std::string& value) const {
    std::shared_lock lock(state_mutex_);
    std::vector<std::string> hits;
    for (const auto& ref : refs_) {
        auto it = ref.attributes.find(attribute);
        if (it == ref.attributes.end()) continue;
        const AttributeValue& attr = it->second;
        bool match = false;
        switch (attr.kind()) {
            case AttributeValue::Kind::Text:
                match = attr.as_text() == value;
                break;
            case AttributeValue::Kind::Number: {
                char* end = nullptr;
                double parsed = std::strtod(value.c_str(), &end);
                match = end == value.c_str() + value.size() && !value.empty() &&
                        parsed == attr.as_number();
                break;
            }
            case AttributeValue::Kind::TokenSet:
                match = to_json(attr).dump() == value;
                break;
        }
        if (match) hits.push_back(ref.ref_id);
    }
    return profiles_for_members(hits);
}

ClusterPartition IncrementalPipeline::partition() const {
    std::shared_lock lock(state_mutex_);
    return components_.partition();
}

Json IncrementalPipeline::report() const {
    std::shared_lock lock(state_mutex_);
    return totals_.to_json();
}

}  // namespace erkit
