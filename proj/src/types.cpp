#include "erkit/types.hpp"

#include <algorithm>
#include <cmath>

namespace erkit {

std::string make_reference_id(const std::string& source_id, std::int64_t record_ordinal) {
    if (source_id.empty()) {
        throw InvalidArgumentError("source_id must be non-empty");
    }
    if (source_id.find(':') != std::string::npos) {
        throw InvalidArgumentError("source_id must not contain ':': '" + source_id + "'");
    }
    if (record_ordinal < 0) {
        throw InvalidArgumentError("record_ordinal must be >= 0");
    }
    return source_id + ":" + std::to_string(record_ordinal);
}

const char* to_string(SourceKind kind) {
    switch (kind) {
        case SourceKind::Csv: return "csv";
        case SourceKind::Jsonl: return "jsonl";
        case SourceKind::ReferencePassthrough: return "reference_passthrough";
    }
    return "csv";
}

SourceKind source_kind_from_string(const std::string& s) {
    if (s == "csv") return SourceKind::Csv;
    if (s == "jsonl") return SourceKind::Jsonl;
    if (s == "reference_passthrough") return SourceKind::ReferencePassthrough;
    throw InvalidArgumentError("unknown source kind '" + s + "'");
}

AttributeValue AttributeValue::text(std::string value) {
    AttributeValue v;
    v.value_ = std::move(value);
    return v;
}

AttributeValue AttributeValue::number(double value) {
    if (!std::isfinite(value)) {
        throw InvalidArgumentError("number attribute must be finite");
    }
    AttributeValue v;
    v.value_ = value;
    return v;
}

AttributeValue AttributeValue::token_set(std::set<std::string> tokens) {
    if (tokens.empty()) {
        throw InvalidArgumentError("token_set attribute must be non-empty");
    }
    if (tokens.count("") != 0) {
        throw InvalidArgumentError("token_set must not contain empty tokens");
    }
    AttributeValue v;
    v.value_ = std::move(tokens);
    return v;
}

AttributeValue::Kind AttributeValue::kind() const {
    switch (value_.index()) {
        case 0: return Kind::Text;
        case 1: return Kind::Number;
        default: return Kind::TokenSet;
    }
}

const std::string& AttributeValue::as_text() const {
    if (!is_text()) throw InvalidArgumentError("attribute value is not text");
    return std::get<std::string>(value_);
}

double AttributeValue::as_number() const {
    if (!is_number()) throw InvalidArgumentError("attribute value is not a number");
    return std::get<double>(value_);
}

const std::set<std::string>& AttributeValue::as_tokens() const {
    if (!is_token_set()) throw InvalidArgumentError("attribute value is not a token set");
    return std::get<std::set<std::string>>(value_);
}

Provenance merge_provenance(const Provenance& a, const Provenance& b) {
    Provenance out = a;
    out.insert(out.end(), b.begin(), b.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

const char* to_string(MatchLabel label) {
    switch (label) {
        case MatchLabel::Match: return "match";
        case MatchLabel::Possible: return "possible";
        case MatchLabel::NonMatch: return "non_match";
    }
    return "non_match";
}

MatchLabel match_label_from_string(const std::string& s) {
    if (s == "match") return MatchLabel::Match;
    if (s == "possible") return MatchLabel::Possible;
    if (s == "non_match") return MatchLabel::NonMatch;
    throw InvalidArgumentError("unknown match label '" + s + "'");
}

void validate_partition(const ClusterPartition& partition) {
    std::set<std::string> seen;
    for (const auto& cluster : partition.clusters) {
        if (cluster.empty()) {
            throw InvalidArgumentError("partition contains an empty cluster");
        }
        for (const auto& id : cluster) {
            if (!seen.insert(id).second) {
                throw InvalidArgumentError("partition clusters overlap on '" + id + "'");
            }
        }
    }
    if (seen != partition.universe) {
        throw InvalidArgumentError("partition clusters do not cover the universe exactly");
    }
}

const char* to_string(ProfileRepresentation rep) {
    switch (rep) {
        case ProfileRepresentation::Pair: return "pair";
        case ProfileRepresentation::Partition: return "partition";
        case ProfileRepresentation::Merged: return "merged";
    }
    return "partition";
}

ProfileRepresentation profile_representation_from_string(const std::string& s) {
    if (s == "pair") return ProfileRepresentation::Pair;
    if (s == "partition") return ProfileRepresentation::Partition;
    if (s == "merged") return ProfileRepresentation::Merged;
    throw InvalidArgumentError("unknown profile representation '" + s + "'");
}

std::set<std::pair<std::string, std::string>> GroundTruth::as_pairs() const {
    std::set<std::pair<std::string, std::string>> pairs;
    if (match_pairs) {
        for (const auto& [a, b] : *match_pairs) pairs.insert(ordered_pair(a, b));
        return pairs;
    }
    if (cluster_labels) {
        std::map<std::string, std::vector<std::string>> by_label;
        for (const auto& [ref, label] : *cluster_labels) {
            by_label[label].push_back(ref);
        }
        for (auto& [label, members] : by_label) {
            std::sort(members.begin(), members.end());
            for (std::size_t i = 0; i < members.size(); ++i) {
                for (std::size_t j = i + 1; j < members.size(); ++j) {
                    pairs.insert({members[i], members[j]});
                }
            }
        }
    }
    return pairs;
}

std::set<std::string> GroundTruth::universe() const {
    std::set<std::string> out;
    if (match_pairs) {
        for (const auto& [a, b] : *match_pairs) {
            out.insert(a);
            out.insert(b);
        }
    }
    if (cluster_labels) {
        for (const auto& [ref, label] : *cluster_labels) {
            out.insert(ref);
        }
    }
    return out;
}

std::pair<std::string, std::string> ordered_pair(std::string x, std::string y) {
    if (y < x) std::swap(x, y);
    return {std::move(x), std::move(y)};
}

}  // namespace erkit
