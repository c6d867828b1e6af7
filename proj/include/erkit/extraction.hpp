#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "erkit/types.hpp"

namespace erkit {

struct CleaningRules {
    bool trim_whitespace = true;
    bool lowercase = false;
    bool collapse_internal_whitespace = false;
    std::set<std::string> null_markers = {"", "NULL", "N/A", "-"};
};

enum class ExtractorKind { CopyField, ConcatFields, TokenizeField, ParseNumber, Composite };

const char* to_string(ExtractorKind kind);
ExtractorKind extractor_kind_from_string(const std::string& s);

struct Extractor {
    std::string name;
    ExtractorKind kind = ExtractorKind::CopyField;
    std::vector<std::string> source_fields;  // one field except for concat_fields
    std::string output_attribute;
    std::string separator = " ";             // concat_fields only
    std::vector<Extractor> children;         // composite only
};

// Attribute names an extractor can contribute.
std::set<std::string> output_attributes(const Extractor& extractor);

// Rejects composites without children and duplicate output names across the
// top-level chain (composite-internal collisions stay legal, last child wins).
void validate_chain(const std::vector<Extractor>& chain);

enum class RecordErrorPolicy { Skip, Abort };

struct ExtractionStats {
    std::int64_t records_read = 0;
    std::int64_t malformed_records = 0;   // skipped under RecordErrorPolicy::Skip
    std::int64_t parse_failures = 0;      // parse_number on non-numeric text
    std::int64_t collisions = 0;          // composite children overwriting a name
    std::int64_t dropped_zero_attribute = 0;
    std::int64_t references_built = 0;
};

// Reads all records of a source in file order; record_ordinal is the data-row
// position. CSV expects RFC-4180 quoting; JSONL expects one flat object per
// line. ingest_seq is assigned sequentially from 0 within this call.
std::vector<InformationRecord> open_source(const SourceDescriptor& desc,
                                           RecordErrorPolicy policy, ExtractionStats& stats);

InformationRecord clean_record(const InformationRecord& record, const CleaningRules& rules);

// The attributes this extractor contributes for one (or more) clean records.
AttributeMap apply_extractor(const Extractor& extractor,
                             const std::vector<InformationRecord>& records,
                             ExtractionStats& stats);

std::vector<EntityReference> build_references(const SourceDescriptor& desc,
                                              const CleaningRules& rules,
                                              const std::vector<Extractor>& chain,
                                              RecordErrorPolicy policy, ExtractionStats& stats);

// Reloads canonical reference JSONL emitted by this system (or profiles fed
// back through the reference feedback loop).
std::vector<EntityReference> passthrough_load(const SourceDescriptor& desc);

// RFC-4180 row reader used by the csv adapter; exposed for tests.
std::vector<std::vector<std::string>> parse_csv(const std::string& content);

}  // namespace erkit
