#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace erkit {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgumentError : public Error {
public:
    using Error::Error;
};

// Configuration that cannot be executed (bad thresholds, unknown strategy, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Problems reading a data source. Carries the source and, when the error is
// record-level, the ordinal of the offending record.
class SourceError : public Error {
public:
    SourceError(std::string source_id, std::string message)
        : Error("source '" + source_id + "': " + message), source_id_(std::move(source_id)) {}
    SourceError(std::string source_id, std::int64_t ordinal, std::string message)
        : Error("source '" + source_id + "' record " + std::to_string(ordinal) + ": " + message),
          source_id_(std::move(source_id)),
          ordinal_(ordinal) {}

    const std::string& source_id() const { return source_id_; }
    std::optional<std::int64_t> ordinal() const { return ordinal_; }

private:
    std::string source_id_;
    std::optional<std::int64_t> ordinal_;
};

class StoreError : public Error {
public:
    using Error::Error;
};

class ConflictError : public StoreError {
public:
    using StoreError::StoreError;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

// Malformed serialized input; carries the 1-based line number when known.
class ParseError : public Error {
public:
    explicit ParseError(std::string message) : Error(std::move(message)) {}
    ParseError(std::int64_t line, const std::string& message)
        : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

    std::optional<std::int64_t> line() const { return line_; }

private:
    std::optional<std::int64_t> line_;
};

// ---------------------------------------------------------------------------
// Identifiers
// ---------------------------------------------------------------------------

// "<source_id>:<record_ordinal>". The separator is forbidden inside source_id
// so the mapping stays injective.
std::string make_reference_id(const std::string& source_id, std::int64_t record_ordinal);

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

enum class SourceKind { Csv, Jsonl, ReferencePassthrough };

const char* to_string(SourceKind kind);
SourceKind source_kind_from_string(const std::string& s);

struct SourceDescriptor {
    std::string source_id;
    SourceKind kind = SourceKind::Csv;
    std::string location;
    // Column names for headerless CSV; when set the first line is data.
    std::optional<std::vector<std::string>> field_names;
};

struct InformationRecord {
    std::string source_id;
    std::int64_t record_ordinal = 0;
    std::map<std::string, std::string> payload;
    std::int64_t ingest_seq = 0;
};

// text | finite number | non-empty set of non-empty lowercase tokens.
class AttributeValue {
public:
    enum class Kind { Text, Number, TokenSet };

    AttributeValue() = default;  // empty text

    static AttributeValue text(std::string value);
    static AttributeValue number(double value);
    static AttributeValue token_set(std::set<std::string> tokens);

    Kind kind() const;
    bool is_text() const { return kind() == Kind::Text; }
    bool is_number() const { return kind() == Kind::Number; }
    bool is_token_set() const { return kind() == Kind::TokenSet; }

    const std::string& as_text() const;
    double as_number() const;
    const std::set<std::string>& as_tokens() const;

    bool operator==(const AttributeValue& other) const { return value_ == other.value_; }
    bool operator!=(const AttributeValue& other) const { return !(*this == other); }

private:
    std::variant<std::string, double, std::set<std::string>> value_;
};

using AttributeMap = std::map<std::string, AttributeValue>;

// (source_id, record_ordinal) pairs, kept sorted and de-duplicated.
using Provenance = std::vector<std::pair<std::string, std::int64_t>>;

Provenance merge_provenance(const Provenance& a, const Provenance& b);

struct EntityReference {
    std::string ref_id;
    std::string source_id;
    AttributeMap attributes;
    Provenance provenance;
};

// >= 2 distinct ref_ids, sorted ascending so equal groups are byte-identical.
struct CandidateGroup {
    std::vector<std::string> member_ids;

    bool operator==(const CandidateGroup& other) const { return member_ids == other.member_ids; }
    bool operator<(const CandidateGroup& other) const { return member_ids < other.member_ids; }
};

struct ComparisonSpaceStats {
    std::int64_t total_references = 0;
    std::int64_t group_count = 0;
};

struct ComparisonSpace {
    std::vector<CandidateGroup> groups;  // pairwise distinct, globally sorted
    ComparisonSpaceStats stats;
};

enum class MatchLabel { Match, Possible, NonMatch };

const char* to_string(MatchLabel label);
MatchLabel match_label_from_string(const std::string& s);

struct MatchEdge {
    std::string a;  // a < b lexicographically
    std::string b;
    double score = 0.0;
    MatchLabel label = MatchLabel::NonMatch;
    std::map<std::string, double> field_scores;
};

struct ClusterPartition {
    // Each cluster sorted ascending; clusters ordered by smallest member.
    std::vector<std::vector<std::string>> clusters;
    std::set<std::string> universe;
};

// Throws InvalidArgumentError if clusters are empty, overlap, or fail to
// cover the universe exactly.
void validate_partition(const ClusterPartition& partition);

enum class ProfileRepresentation { Pair, Partition, Merged };

const char* to_string(ProfileRepresentation rep);
ProfileRepresentation profile_representation_from_string(const std::string& s);

struct EntityProfile {
    std::string profile_id;
    ProfileRepresentation representation = ProfileRepresentation::Partition;
    std::vector<std::string> member_ids;
    std::optional<AttributeMap> merged_attributes;  // present iff representation == Merged
    Provenance provenance;
};

// Exactly one of the two forms is populated.
struct GroundTruth {
    std::optional<std::set<std::pair<std::string, std::string>>> match_pairs;  // normalized a < b
    std::optional<std::map<std::string, std::string>> cluster_labels;

    bool is_pair_form() const { return match_pairs.has_value(); }
    // Pair form as-is; cluster form expanded to all within-cluster pairs.
    std::set<std::pair<std::string, std::string>> as_pairs() const;
    // Every ref_id the truth knows about.
    std::set<std::string> universe() const;
};

// Normalizes an unordered pair to (min, max).
std::pair<std::string, std::string> ordered_pair(std::string x, std::string y);

}  // namespace erkit
