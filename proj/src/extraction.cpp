#include "erkit/extraction.hpp"

#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "erkit/canonical.hpp"
#include "erkit/text.hpp"

namespace erkit {

const char* to_string(ExtractorKind kind) {
    switch (kind) {
        case ExtractorKind::CopyField: return "copy_field";
        case ExtractorKind::ConcatFields: return "concat_fields";
        case ExtractorKind::TokenizeField: return "tokenize_field";
        case ExtractorKind::ParseNumber: return "parse_number";
        case ExtractorKind::Composite: return "composite";
    }
    return "copy_field";
}

ExtractorKind extractor_kind_from_string(const std::string& s) {
    if (s == "copy_field") return ExtractorKind::CopyField;
    if (s == "concat_fields") return ExtractorKind::ConcatFields;
    if (s == "tokenize_field") return ExtractorKind::TokenizeField;
    if (s == "parse_number") return ExtractorKind::ParseNumber;
    if (s == "composite") return ExtractorKind::Composite;
    throw InvalidArgumentError("unknown extractor kind '" + s + "'");
}

std::set<std::string> output_attributes(const Extractor& extractor) {
    if (extractor.kind == ExtractorKind::Composite) {
        std::set<std::string> out;
        for (const auto& child : extractor.children) {
            auto child_out = output_attributes(child);
            out.insert(child_out.begin(), child_out.end());
        }
        return out;
    }
    return {extractor.output_attribute};
}

namespace {

void validate_extractor(const Extractor& extractor) {
    if (extractor.kind == ExtractorKind::Composite) {
        if (extractor.children.empty()) {
            throw ConfigError("composite extractor '" + extractor.name + "' has no children");
        }
        for (const auto& child : extractor.children) validate_extractor(child);
        return;
    }
    if (extractor.output_attribute.empty()) {
        throw ConfigError("extractor '" + extractor.name + "' has no output attribute");
    }
    if (extractor.source_fields.empty()) {
        throw ConfigError("extractor '" + extractor.name + "' has no source fields");
    }
    if (extractor.kind != ExtractorKind::ConcatFields && extractor.source_fields.size() != 1) {
        throw ConfigError("extractor '" + extractor.name + "' takes exactly one source field");
    }
}

}  // namespace

void validate_chain(const std::vector<Extractor>& chain) {
    std::set<std::string> seen;
    for (const auto& extractor : chain) {
        validate_extractor(extractor);
        for (const auto& name : output_attributes(extractor)) {
            if (!seen.insert(name).second) {
                throw ConfigError("output attribute '" + name +
                                  "' produced by more than one extractor in the chain");
            }
        }
    }
}

std::vector<std::vector<std::string>> parse_csv(const std::string& content) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    bool row_started = false;
    std::size_t i = 0;

    // Skip a UTF-8 BOM if present.
    if (content.size() >= 3 && content.compare(0, 3, "\xEF\xBB\xBF") == 0) i = 3;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        // A fully blank line is not a record; a lone "" is.
        if (row_started || row.size() > 1) rows.push_back(std::move(row));
        row.clear();
        row_started = false;
    };

    for (; i < content.size(); ++i) {
        char c = content[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                in_quotes = true;
                field_started = true;
                row_started = true;
                break;
            case ',':
                end_field();
                row_started = true;
                break;
            case '\r':
                if (i + 1 < content.size() && content[i + 1] == '\n') ++i;
                end_row();
                break;
            case '\n':
                end_row();
                break;
            default:
                field.push_back(c);
                field_started = true;
                row_started = true;
                break;
        }
    }
    if (row_started || !row.empty() || field_started || !field.empty()) end_row();
    return rows;
}

namespace {

std::string read_file(const SourceDescriptor& desc) {
    std::ifstream in(desc.location, std::ios::binary);
    if (!in) {
        throw SourceError(desc.source_id, "not found or unreadable: " + desc.location);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void record_error(const SourceDescriptor& desc, std::int64_t ordinal, const std::string& message,
                  RecordErrorPolicy policy, ExtractionStats& stats) {
    if (policy == RecordErrorPolicy::Abort) {
        throw SourceError(desc.source_id, ordinal, message);
    }
    ++stats.malformed_records;
    std::cerr << "warning: source '" << desc.source_id << "' record " << ordinal << ": "
              << message << " (skipped)\n";
}

std::vector<InformationRecord> open_csv(const SourceDescriptor& desc, RecordErrorPolicy policy,
                                        ExtractionStats& stats) {
    auto rows = parse_csv(read_file(desc));
    std::vector<std::string> header;
    std::size_t first_data_row = 0;
    if (desc.field_names) {
        header = *desc.field_names;
    } else {
        if (rows.empty()) return {};
        header = rows[0];
        first_data_row = 1;
    }
    for (const auto& name : header) {
        if (name.empty()) throw SourceError(desc.source_id, "csv header has an empty field name");
    }

    std::vector<InformationRecord> records;
    for (std::size_t r = first_data_row; r < rows.size(); ++r) {
        std::int64_t ordinal = static_cast<std::int64_t>(r - first_data_row);
        ++stats.records_read;
        const auto& cells = rows[r];
        if (cells.size() != header.size()) {
            record_error(desc, ordinal,
                         "expected " + std::to_string(header.size()) + " fields, got " +
                             std::to_string(cells.size()),
                         policy, stats);
            continue;
        }
        InformationRecord record;
        record.source_id = desc.source_id;
        record.record_ordinal = ordinal;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            record.payload[header[c]] = cells[c];
        }
        records.push_back(std::move(record));
    }
    return records;
}

std::vector<InformationRecord> open_jsonl(const SourceDescriptor& desc, RecordErrorPolicy policy,
                                          ExtractionStats& stats) {
    std::string content = read_file(desc);
    std::vector<InformationRecord> records;
    std::istringstream in(content);
    std::string line;
    std::int64_t ordinal = -1;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++ordinal;
        ++stats.records_read;
        Json j = Json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            record_error(desc, ordinal, "invalid JSON line", policy, stats);
            continue;
        }
        InformationRecord record;
        record.source_id = desc.source_id;
        record.record_ordinal = ordinal;
        bool ok = true;
        for (auto it = j.begin(); it != j.end() && ok; ++it) {
            if (it.key().empty()) {
                record_error(desc, ordinal, "empty payload key", policy, stats);
                ok = false;
            } else if (it.value().is_string()) {
                record.payload[it.key()] = it.value().get<std::string>();
            } else if (it.value().is_number() || it.value().is_boolean()) {
                record.payload[it.key()] = it.value().dump();
            } else if (it.value().is_null()) {
                // absent value
            } else {
                record_error(desc, ordinal, "field '" + it.key() + "' is not flat", policy,
                             stats);
                ok = false;
            }
        }
        if (ok) records.push_back(std::move(record));
    }
    return records;
}

}  // namespace

std::vector<InformationRecord> open_source(const SourceDescriptor& desc,
                                           RecordErrorPolicy policy, ExtractionStats& stats) {
    std::vector<InformationRecord> records;
    switch (desc.kind) {
        case SourceKind::Csv:
            records = open_csv(desc, policy, stats);
            break;
        case SourceKind::Jsonl:
            records = open_jsonl(desc, policy, stats);
            break;
        case SourceKind::ReferencePassthrough:
            throw ConfigError("passthrough sources carry references, not records");
    }
    std::int64_t seq = 0;
    for (auto& record : records) record.ingest_seq = seq++;
    return records;
}

InformationRecord clean_record(const InformationRecord& record, const CleaningRules& rules) {
    InformationRecord out;
    out.source_id = record.source_id;
    out.record_ordinal = record.record_ordinal;
    out.ingest_seq = record.ingest_seq;
    for (const auto& [key, raw] : record.payload) {
        if (rules.null_markers.count(raw) != 0) continue;
        std::string value = raw;
        if (rules.trim_whitespace) value = text::trim(value);
        if (rules.collapse_internal_whitespace) value = text::collapse_whitespace(value);
        if (rules.lowercase) value = text::ascii_lower(value);
        if (rules.null_markers.count(value) != 0) continue;
        out.payload[key] = std::move(value);
    }
    return out;
}

namespace {

const std::string* find_field(const std::vector<InformationRecord>& records,
                              const std::string& field) {
    for (const auto& record : records) {
        auto it = record.payload.find(field);
        if (it != record.payload.end()) return &it->second;
    }
    return nullptr;
}

}  // namespace

AttributeMap apply_extractor(const Extractor& extractor,
                             const std::vector<InformationRecord>& records,
                             ExtractionStats& stats) {
    if (records.empty()) {
        throw InvalidArgumentError("apply_extractor requires at least one record");
    }
    AttributeMap out;
    switch (extractor.kind) {
        case ExtractorKind::CopyField: {
            if (const auto* value = find_field(records, extractor.source_fields[0])) {
                out.emplace(extractor.output_attribute, AttributeValue::text(*value));
            }
            break;
        }
        case ExtractorKind::ConcatFields: {
            std::string joined;
            bool any = false;
            for (const auto& field : extractor.source_fields) {
                if (const auto* value = find_field(records, field)) {
                    if (any) joined += extractor.separator;
                    joined += *value;
                    any = true;
                }
            }
            if (any) out.emplace(extractor.output_attribute, AttributeValue::text(joined));
            break;
        }
        case ExtractorKind::TokenizeField: {
            if (const auto* value = find_field(records, extractor.source_fields[0])) {
                std::set<std::string> tokens;
                for (const auto& token : text::split_tokens(*value)) {
                    tokens.insert(text::ascii_lower(token));
                }
                if (!tokens.empty()) {
                    out.emplace(extractor.output_attribute,
                                AttributeValue::token_set(std::move(tokens)));
                }
            }
            break;
        }
        case ExtractorKind::ParseNumber: {
            if (const auto* value = find_field(records, extractor.source_fields[0])) {
                std::string trimmed = text::trim(*value);
                errno = 0;
                char* end = nullptr;
                double parsed = std::strtod(trimmed.c_str(), &end);
                if (trimmed.empty() || end != trimmed.c_str() + trimmed.size() || errno != 0 ||
                    !std::isfinite(parsed)) {
                    ++stats.parse_failures;
                } else {
                    out.emplace(extractor.output_attribute, AttributeValue::number(parsed));
                }
            }
            break;
        }
        case ExtractorKind::Composite: {
            for (const auto& child : extractor.children) {
                for (auto& [name, value] : apply_extractor(child, records, stats)) {
                    auto [it, inserted] = out.insert_or_assign(name, std::move(value));
                    if (!inserted) {
                        ++stats.collisions;
                        std::cerr << "warning: extractor '" << child.name
                                  << "' overwrote attribute '" << name << "'\n";
                    }
                }
            }
            break;
        }
    }
    return out;
}

std::vector<EntityReference> build_references(const SourceDescriptor& desc,
                                              const CleaningRules& rules,
                                              const std::vector<Extractor>& chain,
                                              RecordErrorPolicy policy, ExtractionStats& stats) {
    if (desc.kind == SourceKind::ReferencePassthrough) {
        auto refs = passthrough_load(desc);
        stats.records_read += static_cast<std::int64_t>(refs.size());
        stats.references_built += static_cast<std::int64_t>(refs.size());
        return refs;
    }
    if (chain.empty()) {
        throw ConfigError("source '" + desc.source_id + "' has no extractor chain");
    }
    validate_chain(chain);

    std::vector<EntityReference> refs;
    for (const auto& raw : open_source(desc, policy, stats)) {
        InformationRecord record = clean_record(raw, rules);
        AttributeMap attributes;
        for (const auto& extractor : chain) {
            for (auto& [name, value] : apply_extractor(extractor, {record}, stats)) {
                attributes.insert_or_assign(name, std::move(value));
            }
        }
        if (attributes.empty()) {
            ++stats.dropped_zero_attribute;
            continue;
        }
        EntityReference ref;
        ref.ref_id = make_reference_id(desc.source_id, record.record_ordinal);
        ref.source_id = desc.source_id;
        ref.attributes = std::move(attributes);
        ref.provenance = {{desc.source_id, record.record_ordinal}};
        refs.push_back(std::move(ref));
    }
    stats.references_built += static_cast<std::int64_t>(refs.size());
    return refs;
}

std::vector<EntityReference> passthrough_load(const SourceDescriptor& desc) {
    if (desc.kind != SourceKind::ReferencePassthrough) {
        throw ConfigError("passthrough_load requires a reference_passthrough source");
    }
    std::ifstream in(desc.location, std::ios::binary);
    if (!in) {
        throw SourceError(desc.source_id, "not found or unreadable: " + desc.location);
    }
    std::vector<EntityReference> refs;
    try {
        refs = references_from_jsonl(in);
    } catch (const ParseError& e) {
        throw SourceError(desc.source_id, std::string("reference load failed: ") + e.what());
    }
    std::set<std::string> ids;
    for (const auto& ref : refs) {
        if (!ids.insert(ref.ref_id).second) {
            throw SourceError(desc.source_id, "duplicate ref_id '" + ref.ref_id + "'");
        }
    }
    return refs;
}

}  // namespace erkit
