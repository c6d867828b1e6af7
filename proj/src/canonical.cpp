#include "erkit/canonical.hpp"

#include <cmath>
#include <istream>
#include <sstream>

namespace erkit {

namespace {

Json parse_object_line(const std::string& line, std::int64_t line_no) {
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded()) {
        throw ParseError(line_no, "invalid JSON");
    }
    if (!j.is_object()) {
        throw ParseError(line_no, "expected a JSON object");
    }
    return j;
}

const Json& require(const Json& j, const char* key, std::int64_t line_no = -1) {
    auto it = j.find(key);
    if (it == j.end()) {
        std::string msg = std::string("missing field '") + key + "'";
        if (line_no >= 0) throw ParseError(line_no, msg);
        throw ParseError(std::move(msg));
    }
    return *it;
}

// Applies fn to every non-empty line, with 1-based line numbers.
template <typename Fn>
void for_each_line(std::istream& in, Fn&& fn) {
    std::string line;
    std::int64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        fn(line, line_no);
    }
}

}  // namespace

Json to_json(const AttributeValue& value) {
    switch (value.kind()) {
        case AttributeValue::Kind::Text:
            return Json(value.as_text());
        case AttributeValue::Kind::Number:
            return Json(value.as_number());
        case AttributeValue::Kind::TokenSet: {
            Json arr = Json::array();
            for (const auto& token : value.as_tokens()) arr.push_back(token);
            return arr;
        }
    }
    return Json();
}

Json to_json(const AttributeMap& attributes) {
    Json obj = Json::object();
    for (const auto& [name, value] : attributes) {
        obj[name] = to_json(value);
    }
    return obj;
}

Json to_json(const Provenance& provenance) {
    Json arr = Json::array();
    for (const auto& [source_id, ordinal] : provenance) {
        arr.push_back(Json::array({source_id, ordinal}));
    }
    return arr;
}

Json to_json(const InformationRecord& record) {
    Json obj = Json::object();
    obj["source_id"] = record.source_id;
    obj["record_ordinal"] = record.record_ordinal;
    obj["payload"] = record.payload;
    obj["ingest_seq"] = record.ingest_seq;
    return obj;
}

Json to_json(const EntityReference& reference) {
    Json obj = Json::object();
    obj["ref_id"] = reference.ref_id;
    obj["source_id"] = reference.source_id;
    obj["attributes"] = to_json(reference.attributes);
    obj["provenance"] = to_json(reference.provenance);
    return obj;
}

Json to_json(const CandidateGroup& group) {
    Json obj = Json::object();
    obj["member_ids"] = group.member_ids;
    return obj;
}

Json to_json(const MatchEdge& edge) {
    Json obj = Json::object();
    obj["a"] = edge.a;
    obj["b"] = edge.b;
    obj["score"] = edge.score;
    obj["label"] = to_string(edge.label);
    obj["field_scores"] = edge.field_scores;
    return obj;
}

Json to_json(const EntityProfile& profile) {
    Json obj = Json::object();
    obj["profile_id"] = profile.profile_id;
    obj["representation"] = to_string(profile.representation);
    obj["member_ids"] = profile.member_ids;
    if (profile.merged_attributes) {
        obj["merged_attributes"] = to_json(*profile.merged_attributes);
    }
    obj["provenance"] = to_json(profile.provenance);
    return obj;
}

AttributeValue attribute_value_from_json(const Json& j) {
    if (j.is_string()) return AttributeValue::text(j.get<std::string>());
    if (j.is_number()) {
        double v = j.get<double>();
        if (!std::isfinite(v)) throw ParseError("attribute number is not finite");
        return AttributeValue::number(v);
    }
    if (j.is_array()) {
        std::set<std::string> tokens;
        for (const auto& t : j) {
            if (!t.is_string()) throw ParseError("token_set entries must be strings");
            tokens.insert(t.get<std::string>());
        }
        return AttributeValue::token_set(std::move(tokens));
    }
    throw ParseError("attribute value must be a string, number, or array of tokens");
}

AttributeMap attribute_map_from_json(const Json& j) {
    if (!j.is_object()) throw ParseError("attributes must be an object");
    AttributeMap out;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key().empty()) throw ParseError("attribute names must be non-empty");
        out.emplace(it.key(), attribute_value_from_json(it.value()));
    }
    return out;
}

Provenance provenance_from_json(const Json& j) {
    if (!j.is_array()) throw ParseError("provenance must be an array");
    Provenance out;
    for (const auto& entry : j) {
        if (!entry.is_array() || entry.size() != 2 || !entry[0].is_string() ||
            !entry[1].is_number_integer()) {
            throw ParseError("provenance entries must be [source_id, ordinal]");
        }
        out.emplace_back(entry[0].get<std::string>(), entry[1].get<std::int64_t>());
    }
    return out;
}

InformationRecord record_from_json(const Json& j) {
    if (!j.is_object()) throw ParseError("record must be an object");
    InformationRecord record;
    record.source_id = require(j, "source_id").get<std::string>();
    record.record_ordinal = require(j, "record_ordinal").get<std::int64_t>();
    const Json& payload = require(j, "payload");
    if (!payload.is_object()) throw ParseError("payload must be an object");
    for (auto it = payload.begin(); it != payload.end(); ++it) {
        if (it.key().empty()) throw ParseError("payload keys must be non-empty");
        if (!it.value().is_string()) throw ParseError("payload values must be strings");
        record.payload[it.key()] = it.value().get<std::string>();
    }
    if (j.contains("ingest_seq")) {
        record.ingest_seq = j.at("ingest_seq").get<std::int64_t>();
    }
    return record;
}

EntityReference reference_from_json(const Json& j) {
    if (!j.is_object()) throw ParseError("reference must be an object");
    EntityReference ref;
    ref.ref_id = require(j, "ref_id").get<std::string>();
    ref.source_id = require(j, "source_id").get<std::string>();
    ref.attributes = attribute_map_from_json(require(j, "attributes"));
    ref.provenance = provenance_from_json(require(j, "provenance"));
    if (ref.ref_id.empty()) throw ParseError("ref_id must be non-empty");
    if (ref.provenance.empty()) throw ParseError("provenance must be non-empty");
    return ref;
}

CandidateGroup candidate_group_from_json(const Json& j) {
    if (!j.is_object()) throw ParseError("candidate group must be an object");
    CandidateGroup group;
    const Json& members = require(j, "member_ids");
    if (!members.is_array()) throw ParseError("member_ids must be an array");
    for (const auto& m : members) group.member_ids.push_back(m.get<std::string>());
    if (group.member_ids.size() < 2) throw ParseError("candidate group needs >= 2 members");
    for (std::size_t i = 1; i < group.member_ids.size(); ++i) {
        if (!(group.member_ids[i - 1] < group.member_ids[i])) {
            throw ParseError("candidate group members must be sorted and distinct");
        }
    }
    return group;
}

MatchEdge edge_from_json(const Json& j) {
    if (!j.is_object()) throw ParseError("edge must be an object");
    MatchEdge edge;
    edge.a = require(j, "a").get<std::string>();
    edge.b = require(j, "b").get<std::string>();
    edge.score = require(j, "score").get<double>();
    edge.label = match_label_from_string(require(j, "label").get<std::string>());
    if (j.contains("field_scores")) {
        const Json& fs = j.at("field_scores");
        if (!fs.is_object()) throw ParseError("field_scores must be an object");
        for (auto it = fs.begin(); it != fs.end(); ++it) {
            edge.field_scores[it.key()] = it.value().get<double>();
        }
    }
    if (!(edge.a < edge.b)) throw ParseError("edge endpoints must satisfy a < b");
    if (edge.score < 0.0 || edge.score > 1.0) throw ParseError("edge score must be in [0,1]");
    return edge;
}

EntityProfile profile_from_json(const Json& j) {
    if (!j.is_object()) throw ParseError("profile must be an object");
    EntityProfile profile;
    profile.profile_id = require(j, "profile_id").get<std::string>();
    profile.representation =
        profile_representation_from_string(require(j, "representation").get<std::string>());
    const Json& members = require(j, "member_ids");
    if (!members.is_array() || members.empty()) {
        throw ParseError("member_ids must be a non-empty array");
    }
    for (const auto& m : members) profile.member_ids.push_back(m.get<std::string>());
    if (j.contains("merged_attributes")) {
        profile.merged_attributes = attribute_map_from_json(j.at("merged_attributes"));
    }
    if ((profile.representation == ProfileRepresentation::Merged) !=
        profile.merged_attributes.has_value()) {
        throw ParseError("merged_attributes present iff representation is merged");
    }
    profile.provenance = provenance_from_json(require(j, "provenance"));
    return profile;
}

namespace {

template <typename T>
std::string items_to_jsonl(const std::vector<T>& items) {
    std::string out;
    for (const auto& item : items) {
        out += canonical_line(item);
        out += '\n';
    }
    return out;
}

}  // namespace

std::string references_to_jsonl(const std::vector<EntityReference>& refs) {
    return items_to_jsonl(refs);
}
std::string groups_to_jsonl(const std::vector<CandidateGroup>& groups) {
    return items_to_jsonl(groups);
}
std::string edges_to_jsonl(const std::vector<MatchEdge>& edges) { return items_to_jsonl(edges); }
std::string profiles_to_jsonl(const std::vector<EntityProfile>& profiles) {
    return items_to_jsonl(profiles);
}

std::string partition_to_jsonl(const ClusterPartition& partition) {
    std::string out;
    for (const auto& cluster : partition.clusters) {
        Json obj = Json::object();
        obj["members"] = cluster;
        out += obj.dump();
        out += '\n';
    }
    return out;
}

namespace {

template <typename T, typename Fn>
std::vector<T> items_from_jsonl(std::istream& in, Fn&& parse) {
    std::vector<T> out;
    for_each_line(in, [&](const std::string& line, std::int64_t line_no) {
        try {
            out.push_back(parse(parse_object_line(line, line_no)));
        } catch (const ParseError& e) {
            if (e.line()) throw;
            throw ParseError(line_no, e.what());
        }
    });
    return out;
}

}  // namespace

std::vector<EntityReference> references_from_jsonl(std::istream& in) {
    return items_from_jsonl<EntityReference>(in, reference_from_json);
}

std::vector<EntityProfile> profiles_from_jsonl(std::istream& in) {
    return items_from_jsonl<EntityProfile>(in, profile_from_json);
}

std::vector<MatchEdge> edges_from_jsonl(std::istream& in) {
    return items_from_jsonl<MatchEdge>(in, edge_from_json);
}

std::vector<CandidateGroup> groups_from_jsonl(std::istream& in) {
    return items_from_jsonl<CandidateGroup>(in, candidate_group_from_json);
}

ClusterPartition partition_from_jsonl(std::istream& in) {
    ClusterPartition partition;
    for_each_line(in, [&](const std::string& line, std::int64_t line_no) {
        Json j = parse_object_line(line, line_no);
        const Json& members = require(j, "members", line_no);
        if (!members.is_array() || members.empty()) {
            throw ParseError(line_no, "members must be a non-empty array");
        }
        std::vector<std::string> cluster;
        for (const auto& m : members) cluster.push_back(m.get<std::string>());
        for (const auto& id : cluster) {
            if (!partition.universe.insert(id).second) {
                throw ParseError(line_no, "ref '" + id + "' appears in two clusters");
            }
        }
        partition.clusters.push_back(std::move(cluster));
    });
    return partition;
}

GroundTruth ground_truth_from_jsonl(std::istream& in) {
    GroundTruth truth;
    for_each_line(in, [&](const std::string& line, std::int64_t line_no) {
        Json j = parse_object_line(line, line_no);
        if (j.contains("pair")) {
            if (truth.cluster_labels) {
                throw ParseError(line_no, "truth file mixes pair and cluster forms");
            }
            const Json& pair = j.at("pair");
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() ||
                !pair[1].is_string()) {
                throw ParseError(line_no, "pair must be [ref_a, ref_b]");
            }
            std::string a = pair[0].get<std::string>();
            std::string b = pair[1].get<std::string>();
            if (a == b) throw ParseError(line_no, "pair endpoints must differ");
            if (!truth.match_pairs) truth.match_pairs.emplace();
            truth.match_pairs->insert(ordered_pair(std::move(a), std::move(b)));
        } else if (j.contains("ref")) {
            if (truth.match_pairs) {
                throw ParseError(line_no, "truth file mixes pair and cluster forms");
            }
            if (!j.contains("label") || !j.at("label").is_string()) {
                throw ParseError(line_no, "cluster-form line needs a string 'label'");
            }
            if (!truth.cluster_labels) truth.cluster_labels.emplace();
            (*truth.cluster_labels)[j.at("ref").get<std::string>()] =
                j.at("label").get<std::string>();
        } else {
            throw ParseError(line_no, "truth line must contain 'pair' or 'ref'");
        }
    });
    if (!truth.match_pairs && !truth.cluster_labels) {
        truth.match_pairs.emplace();  // empty truth defaults to pair form
    }
    return truth;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string fnv1a64_hex(std::string_view bytes) {
    static const char* digits = "0123456789abcdef";
    std::uint64_t h = fnv1a64(bytes);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

}  // namespace erkit
