#include "erkit/reference_store.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "erkit/canonical.hpp"

namespace erkit {

const char* to_string(ArtifactKind kind) {
    switch (kind) {
        case ArtifactKind::References: return "references";
        case ArtifactKind::ComparisonSpace: return "comparison_space";
        case ArtifactKind::Edges: return "edges";
        case ArtifactKind::Partition: return "partition";
        case ArtifactKind::Profiles: return "profiles";
    }
    return "references";
}

ArtifactKind artifact_kind_from_string(const std::string& s) {
    if (s == "references") return ArtifactKind::References;
    if (s == "comparison_space") return ArtifactKind::ComparisonSpace;
    if (s == "edges") return ArtifactKind::Edges;
    if (s == "partition") return ArtifactKind::Partition;
    if (s == "profiles") return ArtifactKind::Profiles;
    throw InvalidArgumentError("unknown artifact kind '" + s + "'");
}

namespace {

constexpr ArtifactKind kAllKinds[] = {ArtifactKind::References, ArtifactKind::ComparisonSpace,
                                      ArtifactKind::Edges, ArtifactKind::Partition,
                                      ArtifactKind::Profiles};

std::string utc_now_rfc3339() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string ref_id_of_line(const std::string& line) {
    Json j = Json::parse(line);
    return j.at("ref_id").get<std::string>();
}

// Log record wrapped with its own checksum: {"crc":...,"record":{...}}.
std::string wrap_log_record(const Json& record) {
    std::string payload = record.dump();
    Json wrapper = Json::object();
    wrapper["crc"] = fnv1a64_hex(payload);
    wrapper["record"] = std::move(payload);
    return wrapper.dump();
}

// Returns the verified record, or nullopt when the line is damaged.
std::optional<Json> unwrap_log_record(const std::string& line) {
    Json wrapper = Json::parse(line, nullptr, false);
    if (wrapper.is_discarded() || !wrapper.is_object() || !wrapper.contains("crc") ||
        !wrapper.contains("record") || !wrapper.at("record").is_string()) {
        return std::nullopt;
    }
    std::string payload = wrapper.at("record").get<std::string>();
    if (wrapper.at("crc").get<std::string>() != fnv1a64_hex(payload)) {
        return std::nullopt;
    }
    Json record = Json::parse(payload, nullptr, false);
    if (record.is_discarded() || !record.is_object()) return std::nullopt;
    return record;
}

}  // namespace

ReferenceStore::ReferenceStore() = default;

ReferenceStore::ReferenceStore(const std::string& path) : log_path_(path) { replay_log(); }

StoreVersion ReferenceStore::put_lines(ArtifactKind kind, std::vector<std::string> lines) {
    std::unique_lock lock(mutex_);

    std::vector<Event> new_events;
    std::int64_t next = static_cast<std::int64_t>(versions_.size()) + 1;

    if (kind == ArtifactKind::Partition) {
        for (auto& line : lines) {
            new_events.push_back({next, kind, std::move(line)});
        }
    } else {
        std::set<std::string> existing;
        for (const auto& event : events_) {
            if (event.kind == kind) existing.insert(event.line);
        }
        std::map<std::string, std::string> batch_refs;
        for (auto& line : lines) {
            if (kind == ArtifactKind::References) {
                std::string id = ref_id_of_line(line);
                auto prior = reference_content_.find(id);
                if (prior != reference_content_.end() && prior->second != line) {
                    throw ConflictError("ref_id '" + id +
                                        "' already stored with different content");
                }
                auto batch = batch_refs.find(id);
                if (batch != batch_refs.end() && batch->second != line) {
                    throw ConflictError("ref_id '" + id + "' appears twice with different content");
                }
                batch_refs.emplace(id, line);
            }
            if (existing.insert(line).second) {
                new_events.push_back({next, kind, std::move(line)});
            }
        }
    }

    StoreVersion version;
    version.version = next;
    version.created_at = utc_now_rfc3339();

    // Cumulative per-kind counts at this version.
    std::map<ArtifactKind, std::int64_t> counts;
    std::int64_t partition_version = 0;
    for (const auto& event : events_) {
        if (event.kind == ArtifactKind::Partition) {
            partition_version = std::max(partition_version, event.version);
        }
    }
    if (kind == ArtifactKind::Partition) partition_version = next;
    auto count_event = [&](const Event& event) {
        if (event.kind == ArtifactKind::Partition && event.version != partition_version) return;
        ++counts[event.kind];
    };
    for (const auto& event : events_) count_event(event);
    for (const auto& event : new_events) count_event(event);
    for (const auto& [k, n] : counts) {
        if (n > 0) version.counts[to_string(k)] = n;
    }

    if (!log_path_.empty()) {
        append_to_log(new_events, version);  // throws StoreError, state untouched
    }
    for (const auto& event : new_events) {
        if (event.kind == ArtifactKind::References) {
            reference_content_[ref_id_of_line(event.line)] = event.line;
        }
    }
    std::move(new_events.begin(), new_events.end(), std::back_inserter(events_));
    versions_.push_back(version);
    return version;
}

StoreVersion ReferenceStore::put_references(const std::vector<EntityReference>& items) {
    std::vector<std::string> lines;
    lines.reserve(items.size());
    for (const auto& item : items) {
        if (item.ref_id.empty()) throw InvalidArgumentError("reference ref_id must be non-empty");
        if (item.provenance.empty()) {
            throw InvalidArgumentError("reference provenance must be non-empty");
        }
        lines.push_back(canonical_line(item));
    }
    return put_lines(ArtifactKind::References, std::move(lines));
}

StoreVersion ReferenceStore::put_comparison_space(const std::vector<CandidateGroup>& items) {
    std::vector<std::string> lines;
    lines.reserve(items.size());
    for (const auto& item : items) {
        if (item.member_ids.size() < 2) {
            throw InvalidArgumentError("candidate group needs >= 2 members");
        }
        lines.push_back(canonical_line(item));
    }
    return put_lines(ArtifactKind::ComparisonSpace, std::move(lines));
}

StoreVersion ReferenceStore::put_edges(const std::vector<MatchEdge>& items) {
    std::vector<std::string> lines;
    lines.reserve(items.size());
    for (const auto& item : items) {
        if (!(item.a < item.b)) throw InvalidArgumentError("edge endpoints must satisfy a < b");
        lines.push_back(canonical_line(item));
    }
    return put_lines(ArtifactKind::Edges, std::move(lines));
}

StoreVersion ReferenceStore::put_partition(const ClusterPartition& partition) {
    validate_partition(partition);
    if (partition.clusters.empty()) {
        // An empty partition would leave no trace to supersede the previous
        // one with.
        throw InvalidArgumentError("cannot store an empty partition");
    }
    std::istringstream stream(partition_to_jsonl(partition));
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(stream, line)) {
        if (!line.empty()) lines.push_back(line);
    }
    return put_lines(ArtifactKind::Partition, std::move(lines));
}

StoreVersion ReferenceStore::put_profiles(const std::vector<EntityProfile>& items) {
    std::vector<std::string> lines;
    lines.reserve(items.size());
    for (const auto& item : items) {
        if (item.member_ids.empty()) {
            throw InvalidArgumentError("profile member_ids must be non-empty");
        }
        lines.push_back(canonical_line(item));
    }
    return put_lines(ArtifactKind::Profiles, std::move(lines));
}

std::vector<std::string> ReferenceStore::lines_at(ArtifactKind kind,
                                                  std::optional<std::int64_t> at) const {
    std::shared_lock lock(mutex_);
    std::int64_t version = at.value_or(static_cast<std::int64_t>(versions_.size()));
    if (version < 0 || version > static_cast<std::int64_t>(versions_.size())) {
        throw NotFoundError("store has no version " + std::to_string(version));
    }
    std::vector<std::string> lines;
    if (kind == ArtifactKind::Partition) {
        std::int64_t partition_version = 0;
        for (const auto& event : events_) {
            if (event.kind == kind && event.version <= version) {
                partition_version = std::max(partition_version, event.version);
            }
        }
        for (const auto& event : events_) {
            if (event.kind == kind && event.version == partition_version) {
                lines.push_back(event.line);
            }
        }
    } else {
        for (const auto& event : events_) {
            if (event.kind == kind && event.version <= version) {
                lines.push_back(event.line);
            }
        }
    }
    std::sort(lines.begin(), lines.end());
    return lines;
}

std::vector<EntityReference> ReferenceStore::get_references(
    std::optional<std::int64_t> at_version) const {
    std::vector<EntityReference> out;
    for (const auto& line : lines_at(ArtifactKind::References, at_version)) {
        out.push_back(reference_from_json(Json::parse(line)));
    }
    return out;
}

std::vector<CandidateGroup> ReferenceStore::get_comparison_space(
    std::optional<std::int64_t> at_version) const {
    std::vector<CandidateGroup> out;
    for (const auto& line : lines_at(ArtifactKind::ComparisonSpace, at_version)) {
        out.push_back(candidate_group_from_json(Json::parse(line)));
    }
    return out;
}

std::vector<MatchEdge> ReferenceStore::get_edges(std::optional<std::int64_t> at_version) const {
    std::vector<MatchEdge> out;
    for (const auto& line : lines_at(ArtifactKind::Edges, at_version)) {
        out.push_back(edge_from_json(Json::parse(line)));
    }
    return out;
}

ClusterPartition ReferenceStore::get_partition(std::optional<std::int64_t> at_version) const {
    std::string jsonl;
    for (const auto& line : lines_at(ArtifactKind::Partition, at_version)) {
        jsonl += line;
        jsonl += '\n';
    }
    std::istringstream in(jsonl);
    return partition_from_jsonl(in);
}

std::vector<EntityProfile> ReferenceStore::get_profiles(
    std::optional<std::int64_t> at_version) const {
    std::vector<EntityProfile> out;
    for (const auto& line : lines_at(ArtifactKind::Profiles, at_version)) {
        out.push_back(profile_from_json(Json::parse(line)));
    }
    return out;
}

std::int64_t ReferenceStore::latest_version() const {
    std::shared_lock lock(mutex_);
    return static_cast<std::int64_t>(versions_.size());
}

std::vector<StoreVersion> ReferenceStore::versions() const {
    std::shared_lock lock(mutex_);
    return versions_;
}

void ReferenceStore::append_to_log(const std::vector<Event>& events,
                                   const StoreVersion& version) {
    std::ofstream out(log_path_, std::ios::binary | std::ios::app);
    if (!out) throw StoreError("cannot open store log '" + log_path_ + "'");
    for (const auto& event : events) {
        Json record = Json::object();
        record["type"] = "item";
        record["version"] = event.version;
        record["kind"] = to_string(event.kind);
        record["item"] = event.line;
        out << wrap_log_record(record) << '\n';
    }
    Json commit = Json::object();
    commit["type"] = "commit";
    commit["version"] = version.version;
    commit["created_at"] = version.created_at;
    commit["counts"] = version.counts;
    out << wrap_log_record(commit) << '\n';
    out.flush();
    if (!out) throw StoreError("write to store log '" + log_path_ + "' failed");

    std::ofstream idx(log_path_ + ".idx", std::ios::binary | std::ios::trunc);
    if (idx) {
        Json meta = Json::object();
        meta["version"] = version.version;
        meta["offset"] = static_cast<std::int64_t>(std::filesystem::file_size(log_path_));
        idx << meta.dump() << '\n';
    }
}

void ReferenceStore::replay_log() {
    std::ifstream in(log_path_, std::ios::binary);
    if (!in) return;  // fresh store

    std::vector<Event> committed;
    std::vector<StoreVersion> versions;
    std::vector<Event> pending;
    std::string line;
    bool damaged = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto record = unwrap_log_record(line);
        if (!record) {
            damaged = true;
            break;
        }
        const std::string type = record->value("type", "");
        if (type == "item") {
            Event event;
            event.version = record->at("version").get<std::int64_t>();
            event.kind = artifact_kind_from_string(record->at("kind").get<std::string>());
            event.line = record->at("item").get<std::string>();
            pending.push_back(std::move(event));
        } else if (type == "commit") {
            StoreVersion version;
            version.version = record->at("version").get<std::int64_t>();
            version.created_at = record->at("created_at").get<std::string>();
            for (auto it = record->at("counts").begin(); it != record->at("counts").end(); ++it) {
                version.counts[it.key()] = it.value().get<std::int64_t>();
            }
            if (version.version != static_cast<std::int64_t>(versions.size()) + 1) {
                throw StoreError("store log '" + log_path_ + "' has out-of-order versions");
            }
            std::move(pending.begin(), pending.end(), std::back_inserter(committed));
            pending.clear();
            versions.push_back(std::move(version));
        } else {
            damaged = true;
            break;
        }
    }
    if (damaged || !pending.empty()) {
        std::cerr << "warning: store log '" << log_path_
                  << "' ends mid-write; resuming from version " << versions.size() << "\n";
    }
    load_events(std::move(committed), std::move(versions));
}

void ReferenceStore::load_events(std::vector<Event> events, std::vector<StoreVersion> versions) {
    events_ = std::move(events);
    versions_ = std::move(versions);
    reference_content_.clear();
    for (const auto& event : events_) {
        if (event.kind == ArtifactKind::References) {
            reference_content_[ref_id_of_line(event.line)] = event.line;
        }
    }
}

void ReferenceStore::snapshot(const std::string& path) const {
    std::shared_lock lock(mutex_);
    std::string body;
    {
        Json header = Json::object();
        header["format_version"] = 1;
        body += header.dump();
        body += '\n';
    }
    for (const auto& version : versions_) {
        Json j = Json::object();
        j["kind"] = "store_version";
        j["version"] = version.version;
        j["created_at"] = version.created_at;
        j["counts"] = version.counts;
        body += j.dump();
        body += '\n';
    }
    for (ArtifactKind kind : kAllKinds) {
        std::vector<const Event*> segment;
        for (const auto& event : events_) {
            if (event.kind == kind) segment.push_back(&event);
        }
        std::stable_sort(segment.begin(), segment.end(), [](const Event* a, const Event* b) {
            return std::tie(a->version, a->line) < std::tie(b->version, b->line);
        });
        for (const Event* event : segment) {
            Json j = Json::object();
            j["kind"] = to_string(kind);
            j["version"] = event->version;
            j["item"] = event->line;
            body += j.dump();
            body += '\n';
        }
    }
    std::string checksum = fnv1a64_hex(body);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw StoreError("cannot open snapshot path '" + path + "'");
    out << body << checksum << '\n';
    out.flush();
    if (!out) throw StoreError("snapshot write to '" + path + "' failed");
}

std::unique_ptr<ReferenceStore> ReferenceStore::restore(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StoreError("cannot open snapshot '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string content = buf.str();

    // The checksum line is the last non-empty line.
    if (content.empty()) throw StoreError("snapshot '" + path + "' is empty");
    std::size_t end = content.size();
    if (content[end - 1] == '\n') --end;
    std::size_t line_start = content.rfind('\n', end == 0 ? 0 : end - 1);
    line_start = line_start == std::string::npos ? 0 : line_start + 1;
    std::string checksum = content.substr(line_start, end - line_start);
    std::string body = content.substr(0, line_start);
    if (checksum.size() != 16 || fnv1a64_hex(body) != checksum) {
        throw StoreError("snapshot '" + path + "' failed checksum verification");
    }

    std::istringstream lines(body);
    std::string line;
    std::int64_t line_no = 0;
    bool saw_header = false;
    std::vector<Event> events;
    std::vector<StoreVersion> versions;
    while (std::getline(lines, line)) {
        ++line_no;
        if (line.empty()) continue;
        Json j = Json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw StoreError("snapshot line " + std::to_string(line_no) + " is not JSON");
        }
        if (!saw_header) {
            if (j.value("format_version", 0) != 1) {
                throw StoreError("snapshot '" + path + "' has an unsupported format_version");
            }
            saw_header = true;
            continue;
        }
        const std::string kind = j.value("kind", "");
        if (kind == "store_version") {
            StoreVersion version;
            version.version = j.at("version").get<std::int64_t>();
            version.created_at = j.at("created_at").get<std::string>();
            for (auto it = j.at("counts").begin(); it != j.at("counts").end(); ++it) {
                version.counts[it.key()] = it.value().get<std::int64_t>();
            }
            versions.push_back(std::move(version));
        } else {
            Event event;
            event.kind = artifact_kind_from_string(kind);
            event.version = j.at("version").get<std::int64_t>();
            event.line = j.at("item").get<std::string>();
            events.push_back(std::move(event));
        }
    }
    if (!saw_header) throw StoreError("snapshot '" + path + "' is missing its header");
    std::sort(versions.begin(), versions.end(),
              [](const StoreVersion& a, const StoreVersion& b) { return a.version < b.version; });
    for (std::size_t i = 0; i < versions.size(); ++i) {
        if (versions[i].version != static_cast<std::int64_t>(i) + 1) {
            throw StoreError("snapshot '" + path + "' has gaps in its version sequence");
        }
    }
    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
        return std::tie(a.version, a.line) < std::tie(b.version, b.line);
    });

    auto store = std::make_unique<ReferenceStore>();
    store->load_events(std::move(events), std::move(versions));
    return store;
}

}  // namespace erkit
