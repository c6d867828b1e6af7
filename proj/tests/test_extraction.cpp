#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "erkit/canonical.hpp"
#include "erkit/extraction.hpp"
#include "test_support.hpp"

using namespace erkit;
using testsupport::TempDir;
using testsupport::write_file;

namespace {

SourceDescriptor csv_source(const TempDir& dir, const std::string& name,
                            const std::string& content) {
    std::string path = dir.file(name);
    write_file(path, content);
    SourceDescriptor desc;
    desc.source_id = "cust";
    desc.kind = SourceKind::Csv;
    desc.location = path;
    return desc;
}

Extractor copy_field(const std::string& field, const std::string& output) {
    Extractor e;
    e.name = "copy_" + field;
    e.kind = ExtractorKind::CopyField;
    e.source_fields = {field};
    e.output_attribute = output;
    return e;
}

}  // namespace

TEST_CASE("csv parsing handles rfc4180 quoting") {
    auto rows = parse_csv("a,b\n\"x,y\",\"he said \"\"hi\"\"\"\n\"multi\nline\",z\n");
    REQUIRE(rows.size() == 3);
    CHECK(rows[1][0] == "x,y");
    CHECK(rows[1][1] == "he said \"hi\"");
    CHECK(rows[2][0] == "multi\nline");
    CHECK(rows[2][1] == "z");

    CHECK(parse_csv("").empty());
    CHECK(parse_csv("a,b\r\nc,d\r\n").size() == 2);
    CHECK(parse_csv("a,b\n\n\nc,d\n").size() == 2);  // blank lines skipped
    CHECK(parse_csv("one\n\"\"\n").size() == 2);      // quoted empty survives
}

TEST_CASE("open_source reads csv records in order") {
    TempDir dir;
    auto desc = csv_source(dir, "input.csv", "name,city\nJohn,NYC\nJon,NYC\nAlice,LA\n");
    ExtractionStats stats;
    auto records = open_source(desc, RecordErrorPolicy::Skip, stats);
    REQUIRE(records.size() == 3);
    CHECK(records[0].payload == std::map<std::string, std::string>{{"name", "John"},
                                                                   {"city", "NYC"}});
    CHECK(records[0].record_ordinal == 0);
    CHECK(records[2].record_ordinal == 2);
    CHECK(records[0].ingest_seq < records[1].ingest_seq);
    CHECK(stats.records_read == 3);
}

TEST_CASE("headerless csv uses field_names and treats line one as data") {
    TempDir dir;
    auto desc = csv_source(dir, "input.csv", "John,NYC\n");
    desc.field_names = {{"name", "city"}};
    ExtractionStats stats;
    auto records = open_source(desc, RecordErrorPolicy::Skip, stats);
    REQUIRE(records.size() == 1);
    CHECK(records[0].payload.at("name") == "John");
}

TEST_CASE("csv arity mismatch follows the record error policy") {
    TempDir dir;
    auto desc = csv_source(dir, "input.csv", "name,city\nJohn,NYC,extra\nJon,NYC\n");
    ExtractionStats stats;
    auto records = open_source(desc, RecordErrorPolicy::Skip, stats);
    CHECK(records.size() == 1);
    CHECK(stats.malformed_records == 1);
    CHECK(records[0].record_ordinal == 1);  // ordinals track file positions

    ExtractionStats abort_stats;
    CHECK_THROWS_AS(open_source(desc, RecordErrorPolicy::Abort, abort_stats), SourceError);
}

TEST_CASE("missing source file raises source-not-found") {
    SourceDescriptor desc;
    desc.source_id = "gone";
    desc.kind = SourceKind::Csv;
    desc.location = "/nonexistent/gone.csv";
    ExtractionStats stats;
    CHECK_THROWS_AS(open_source(desc, RecordErrorPolicy::Skip, stats), SourceError);
}

TEST_CASE("jsonl records coerce flat scalars and reject nesting") {
    TempDir dir;
    std::string path = dir.file("rows.jsonl");
    write_file(path, "{\"name\":\"Jo\",\"age\":41,\"ok\":true,\"gone\":null}\n"
                     "{\"bad\":{\"nested\":1}}\n");
    SourceDescriptor desc;
    desc.source_id = "j";
    desc.kind = SourceKind::Jsonl;
    desc.location = path;
    ExtractionStats stats;
    auto records = open_source(desc, RecordErrorPolicy::Skip, stats);
    REQUIRE(records.size() == 1);
    CHECK(records[0].payload.at("name") == "Jo");
    CHECK(records[0].payload.at("age") == "41");
    CHECK(records[0].payload.at("ok") == "true");
    CHECK(records[0].payload.count("gone") == 0);
    CHECK(stats.malformed_records == 1);
}

TEST_CASE("clean_record applies rules and strips null markers") {
    CleaningRules rules;
    rules.trim_whitespace = true;
    rules.lowercase = true;
    rules.collapse_internal_whitespace = true;

    InformationRecord record;
    record.source_id = "s";
    record.payload = {{"name", "  John   SMITH "}, {"city", "N/A"}, {"note", "NULL"}};
    auto cleaned = clean_record(record, rules);
    CHECK(cleaned.payload == std::map<std::string, std::string>{{"name", "john smith"}});
}

TEST_CASE("cleaning is idempotent on random payloads") {
    std::mt19937 rng(3);
    CleaningRules rules;
    rules.trim_whitespace = true;
    rules.lowercase = true;
    rules.collapse_internal_whitespace = true;
    std::uniform_int_distribution<int> len(0, 20);
    std::uniform_int_distribution<int> ch(0, 127);
    for (int trial = 0; trial < 500; ++trial) {
        InformationRecord record;
        record.source_id = "s";
        for (int f = 0; f < 4; ++f) {
            std::string value;
            int n = len(rng);
            for (int i = 0; i < n; ++i) value.push_back(static_cast<char>(ch(rng)));
            record.payload["f" + std::to_string(f)] = value;
        }
        auto once = clean_record(record, rules);
        auto twice = clean_record(once, rules);
        CHECK(twice.payload == once.payload);
    }
}

TEST_CASE("extractors produce their documented attributes") {
    InformationRecord record;
    record.source_id = "s";
    record.payload = {{"name", "john smith"}, {"age", "35"}, {"bad_age", "abc"}};
    ExtractionStats stats;

    auto copied = apply_extractor(copy_field("name", "name"), {record}, stats);
    CHECK(copied.at("name").as_text() == "john smith");

    Extractor tokenizer;
    tokenizer.kind = ExtractorKind::TokenizeField;
    tokenizer.source_fields = {"name"};
    tokenizer.output_attribute = "name_tokens";
    auto tokens = apply_extractor(tokenizer, {record}, stats);
    CHECK(tokens.at("name_tokens").as_tokens() == std::set<std::string>{"john", "smith"});

    Extractor number;
    number.kind = ExtractorKind::ParseNumber;
    number.source_fields = {"age"};
    number.output_attribute = "age";
    CHECK(apply_extractor(number, {record}, stats).at("age").as_number() == 35.0);

    number.source_fields = {"bad_age"};
    CHECK(apply_extractor(number, {record}, stats).empty());
    CHECK(stats.parse_failures == 1);

    Extractor concat;
    concat.kind = ExtractorKind::ConcatFields;
    concat.source_fields = {"name", "age", "missing"};
    concat.output_attribute = "full";
    concat.separator = "|";
    CHECK(apply_extractor(concat, {record}, stats).at("full").as_text() == "john smith|35");

    auto absent = apply_extractor(copy_field("missing", "x"), {record}, stats);
    CHECK(absent.empty());
}

TEST_CASE("composite extractors union children, last child wins on collision") {
    InformationRecord record;
    record.source_id = "s";
    record.payload = {{"a", "1"}, {"b", "2"}};
    Extractor composite;
    composite.kind = ExtractorKind::Composite;
    composite.name = "combo";
    composite.children = {copy_field("a", "out"), copy_field("b", "out")};
    ExtractionStats stats;
    auto result = apply_extractor(composite, {record}, stats);
    CHECK(result.at("out").as_text() == "2");
    CHECK(stats.collisions == 1);
}

TEST_CASE("chain validation rejects duplicates and empty composites") {
    CHECK_THROWS_AS(validate_chain({copy_field("a", "x"), copy_field("b", "x")}), ConfigError);
    Extractor empty_composite;
    empty_composite.kind = ExtractorKind::Composite;
    CHECK_THROWS_AS(validate_chain({empty_composite}), ConfigError);
    CHECK_NOTHROW(validate_chain({copy_field("a", "x"), copy_field("b", "y")}));
}

TEST_CASE("build_references yields one reference per surviving record") {
    TempDir dir;
    auto desc = csv_source(dir, "input.csv", "name,city\nJohn,NYC\nJon,NYC\nAlice,LA\n");
    CleaningRules rules;
    rules.lowercase = true;
    ExtractionStats stats;
    auto refs = build_references(desc, rules, {copy_field("name", "name"),
                                               copy_field("city", "city")},
                                 RecordErrorPolicy::Skip, stats);
    REQUIRE(refs.size() == 3);
    CHECK(refs[0].ref_id == "cust:0");
    CHECK(refs[1].ref_id == "cust:1");
    CHECK(refs[2].ref_id == "cust:2");
    CHECK(refs[0].attributes.at("name").as_text() == "john");
    CHECK(refs[0].provenance == Provenance{{"cust", 0}});
    CHECK(stats.references_built == 3);
}

TEST_CASE("records with zero attributes are dropped and counted") {
    TempDir dir;
    auto desc = csv_source(dir, "input.csv", "name,city\n,NYC\nJon,NYC\n");
    ExtractionStats stats;
    auto refs = build_references(desc, CleaningRules{}, {copy_field("name", "name")},
                                 RecordErrorPolicy::Skip, stats);
    REQUIRE(refs.size() == 1);
    CHECK(refs[0].ref_id == "cust:1");
    CHECK(stats.dropped_zero_attribute == 1);
}

TEST_CASE("empty source yields an empty list") {
    TempDir dir;
    auto desc = csv_source(dir, "input.csv", "name,city\n");
    ExtractionStats stats;
    auto refs = build_references(desc, CleaningRules{}, {copy_field("name", "name")},
                                 RecordErrorPolicy::Skip, stats);
    CHECK(refs.empty());
}

TEST_CASE("build_references is byte-deterministic") {
    TempDir dir;
    auto desc = csv_source(dir, "input.csv", "name,city\nJohn,NYC\nJon,NYC\n");
    CleaningRules rules;
    rules.lowercase = true;
    auto run = [&] {
        ExtractionStats stats;
        return references_to_jsonl(build_references(
            desc, rules, {copy_field("name", "name"), copy_field("city", "city")},
            RecordErrorPolicy::Skip, stats));
    };
    CHECK(run() == run());
}

TEST_CASE("passthrough reloads emitted references byte-for-byte") {
    TempDir dir;
    auto desc = csv_source(dir, "input.csv", "name,city\nJohn,NYC\nJon,NYC\nAlice,LA\n");
    ExtractionStats stats;
    auto refs = build_references(desc, CleaningRules{}, {copy_field("name", "name"),
                                                         copy_field("city", "city")},
                                 RecordErrorPolicy::Skip, stats);
    std::string emitted = references_to_jsonl(refs);
    std::string path = dir.file("refs.jsonl");
    write_file(path, emitted);

    SourceDescriptor pass;
    pass.source_id = "pass";
    pass.kind = SourceKind::ReferencePassthrough;
    pass.location = path;
    auto reloaded = passthrough_load(pass);
    CHECK(references_to_jsonl(reloaded) == emitted);

    // Through build_references as well: passthrough ignores the chain.
    ExtractionStats stats2;
    auto again = build_references(pass, CleaningRules{}, {}, RecordErrorPolicy::Skip, stats2);
    CHECK(references_to_jsonl(again) == emitted);
}

TEST_CASE("passthrough rejects duplicate ref ids and bad schema") {
    TempDir dir;
    std::string path = dir.file("refs.jsonl");
    EntityReference ref = testsupport::make_ref("a:0", "a", {{"n", AttributeValue::text("x")}});
    write_file(path, canonical_line(ref) + "\n" + canonical_line(ref) + "\n");

    SourceDescriptor pass;
    pass.source_id = "pass";
    pass.kind = SourceKind::ReferencePassthrough;
    pass.location = path;
    CHECK_THROWS_AS(passthrough_load(pass), SourceError);

    write_file(path, "{\"ref_id\":\"x\"}\n");
    try {
        passthrough_load(pass);
        FAIL("expected SourceError");
    } catch (const SourceError& e) {
        CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }
}
