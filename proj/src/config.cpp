#include "erkit/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "erkit/canonical.hpp"

namespace erkit {

namespace {

void reject_unknown_keys(const Json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (allowed.count(it.key()) == 0) {
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
        }
    }
}

const Json& require_key(const Json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw ConfigError("missing key '" + std::string(key) + "' in " + where);
    }
    return *it;
}

std::string require_string(const Json& obj, const char* key, const std::string& where) {
    const Json& v = require_key(obj, key, where);
    if (!v.is_string()) throw ConfigError("key '" + std::string(key) + "' in " + where +
                                          " must be a string");
    return v.get<std::string>();
}

SourceDescriptor parse_source(const Json& j, std::size_t index) {
    std::string where = "sources[" + std::to_string(index) + "]";
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    reject_unknown_keys(j, {"source_id", "kind", "location", "field_names"}, where);
    SourceDescriptor desc;
    desc.source_id = require_string(j, "source_id", where);
    if (desc.source_id.empty()) throw ConfigError(where + ".source_id must be non-empty");
    if (desc.source_id.find(':') != std::string::npos) {
        throw ConfigError(where + ".source_id must not contain ':'");
    }
    desc.kind = source_kind_from_string(require_string(j, "kind", where));
    desc.location = require_string(j, "location", where);
    if (j.contains("field_names")) {
        const Json& names = j.at("field_names");
        if (!names.is_array()) throw ConfigError(where + ".field_names must be an array");
        desc.field_names.emplace();
        for (const auto& n : names) desc.field_names->push_back(n.get<std::string>());
    }
    return desc;
}

Extractor parse_extractor(const Json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    reject_unknown_keys(
        j, {"name", "kind", "source_field", "source_fields", "output", "separator", "children"},
        where);
    Extractor e;
    e.kind = extractor_kind_from_string(require_string(j, "kind", where));
    e.name = j.contains("name") ? j.at("name").get<std::string>() : to_string(e.kind);
    if (e.kind == ExtractorKind::Composite) {
        const Json& children = require_key(j, "children", where);
        if (!children.is_array() || children.empty()) {
            throw ConfigError(where + ".children must be a non-empty array");
        }
        std::size_t i = 0;
        for (const auto& child : children) {
            e.children.push_back(
                parse_extractor(child, where + ".children[" + std::to_string(i++) + "]"));
        }
        return e;
    }
    e.output_attribute = require_string(j, "output", where);
    if (j.contains("source_fields")) {
        const Json& fields = j.at("source_fields");
        if (!fields.is_array()) throw ConfigError(where + ".source_fields must be an array");
        for (const auto& f : fields) e.source_fields.push_back(f.get<std::string>());
    } else {
        e.source_fields.push_back(require_string(j, "source_field", where));
    }
    if (j.contains("separator")) e.separator = j.at("separator").get<std::string>();
    return e;
}

CleaningRules parse_cleaning(const Json& j) {
    reject_unknown_keys(j,
                        {"trim_whitespace", "lowercase", "collapse_internal_whitespace",
                         "null_markers"},
                        "extraction.cleaning");
    CleaningRules rules;
    if (j.contains("trim_whitespace")) rules.trim_whitespace = j.at("trim_whitespace").get<bool>();
    if (j.contains("lowercase")) rules.lowercase = j.at("lowercase").get<bool>();
    if (j.contains("collapse_internal_whitespace")) {
        rules.collapse_internal_whitespace = j.at("collapse_internal_whitespace").get<bool>();
    }
    if (j.contains("null_markers")) {
        const Json& markers = j.at("null_markers");
        if (!markers.is_array()) throw ConfigError("null_markers must be an array");
        rules.null_markers.clear();
        for (const auto& m : markers) rules.null_markers.insert(m.get<std::string>());
    }
    return rules;
}

ComparisonConfig parse_comparison(const Json& j) {
    reject_unknown_keys(j, {"strategy", "key_attribute", "key_transform", "prefix_length",
                            "window"},
                        "comparison");
    ComparisonConfig cfg;
    std::string strategy = require_string(j, "strategy", "comparison");
    if (strategy == "full") {
        cfg.strategy = ComparisonConfig::Strategy::Full;
    } else if (strategy == "block_key") {
        cfg.strategy = ComparisonConfig::Strategy::BlockKey;
        cfg.key_attribute = require_string(j, "key_attribute", "comparison");
        if (j.contains("key_transform")) {
            cfg.key_transform.kind =
                key_transform_from_string(j.at("key_transform").get<std::string>());
        }
        if (j.contains("prefix_length")) {
            cfg.key_transform.prefix_length = j.at("prefix_length").get<std::int64_t>();
            if (cfg.key_transform.prefix_length < 1) {
                throw ConfigError("comparison.prefix_length must be >= 1");
            }
        }
    } else if (strategy == "sorted_neighborhood") {
        cfg.strategy = ComparisonConfig::Strategy::SortedNeighborhood;
        cfg.key_attribute = require_string(j, "key_attribute", "comparison");
        cfg.window = require_key(j, "window", "comparison").get<std::int64_t>();
        if (cfg.window < 2) throw ConfigError("comparison.window must be >= 2");
    } else {
        throw ConfigError("unknown comparison strategy '" + strategy + "'");
    }
    return cfg;
}

MatcherConfig parse_matcher(const Json& j) {
    reject_unknown_keys(j, {"kind", "rules", "tau_match", "tau_possible"}, "matcher");
    MatcherConfig cfg;
    cfg.kind = matcher_kind_from_string(require_string(j, "kind", "matcher"));
    const Json& rules = require_key(j, "rules", "matcher");
    if (!rules.is_array() || rules.empty()) {
        throw ConfigError("matcher.rules must be a non-empty array");
    }
    std::size_t i = 0;
    for (const auto& rj : rules) {
        std::string where = "matcher.rules[" + std::to_string(i++) + "]";
        reject_unknown_keys(rj, {"attribute", "similarity", "weight", "m", "u",
                                 "agreement_threshold"},
                            where);
        FieldRule rule;
        rule.attribute = require_string(rj, "attribute", where);
        rule.similarity = similarity_kind_from_string(require_string(rj, "similarity", where));
        if (rj.contains("weight")) rule.weight = rj.at("weight").get<double>();
        if (rj.contains("m")) rule.m = rj.at("m").get<double>();
        if (rj.contains("u")) rule.u = rj.at("u").get<double>();
        if (rj.contains("agreement_threshold")) {
            rule.agreement_threshold = rj.at("agreement_threshold").get<double>();
        }
        cfg.rules.push_back(std::move(rule));
    }
    cfg.tau_match = require_key(j, "tau_match", "matcher").get<double>();
    cfg.tau_possible =
        j.contains("tau_possible") ? j.at("tau_possible").get<double>() : cfg.tau_match;
    validate_matcher_config(cfg);
    return cfg;
}

StoreConfig parse_store(const Json& j) {
    reject_unknown_keys(j, {"backend", "path", "persist_artifacts"}, "store");
    StoreConfig cfg;
    std::string backend = require_string(j, "backend", "store");
    if (backend == "memory") {
        cfg.backend = StoreBackend::Memory;
    } else if (backend == "file") {
        cfg.backend = StoreBackend::File;
        cfg.path = require_string(j, "path", "store");
    } else {
        throw ConfigError("unknown store backend '" + backend + "'");
    }
    if (j.contains("persist_artifacts")) {
        cfg.persist_artifacts = j.at("persist_artifacts").get<bool>();
    }
    return cfg;
}

}  // namespace

RuntimeConfig parse_runtime_config(const std::string& json_text) {
    Json j = Json::parse(json_text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw ConfigError("config is not a JSON object");
    }
    reject_unknown_keys(j,
                        {"version", "mode", "sources", "extraction", "comparison", "filter",
                         "matcher", "clusterer", "assembly", "store", "threads"},
                        "config");
    if (require_key(j, "version", "config").get<std::int64_t>() != 1) {
        throw ConfigError("unsupported config version; expected 1");
    }

    RuntimeConfig cfg;
    std::string mode = require_string(j, "mode", "config");
    if (mode == "batch") {
        cfg.mode = RunMode::Batch;
    } else if (mode == "incremental") {
        cfg.mode = RunMode::Incremental;
    } else {
        throw ConfigError("mode must be 'batch' or 'incremental'");
    }

    const Json& sources = require_key(j, "sources", "config");
    if (!sources.is_array() || sources.empty()) {
        throw ConfigError("sources must be a non-empty array");
    }
    for (std::size_t i = 0; i < sources.size(); ++i) {
        cfg.sources.push_back(parse_source(sources[i], i));
    }

    const Json& extraction = require_key(j, "extraction", "config");
    reject_unknown_keys(extraction, {"cleaning", "chains", "on_record_error"}, "extraction");
    if (extraction.contains("cleaning")) {
        cfg.cleaning = parse_cleaning(extraction.at("cleaning"));
    }
    if (extraction.contains("on_record_error")) {
        std::string policy = extraction.at("on_record_error").get<std::string>();
        if (policy == "skip") {
            cfg.record_errors = RecordErrorPolicy::Skip;
        } else if (policy == "abort") {
            cfg.record_errors = RecordErrorPolicy::Abort;
        } else {
            throw ConfigError("on_record_error must be 'skip' or 'abort'");
        }
    }
    if (extraction.contains("chains")) {
        const Json& chains = extraction.at("chains");
        if (!chains.is_object()) throw ConfigError("extraction.chains must be an object");
        for (auto it = chains.begin(); it != chains.end(); ++it) {
            if (!it.value().is_array()) {
                throw ConfigError("extraction.chains['" + it.key() + "'] must be an array");
            }
            std::vector<Extractor> chain;
            std::size_t i = 0;
            for (const auto& ej : it.value()) {
                chain.push_back(parse_extractor(
                    ej, "extraction.chains['" + it.key() + "'][" + std::to_string(i++) + "]"));
            }
            cfg.chains.emplace(it.key(), std::move(chain));
        }
    }

    cfg.comparison = parse_comparison(require_key(j, "comparison", "config"));

    if (j.contains("filter")) {
        const Json& f = j.at("filter");
        reject_unknown_keys(f, {"attribute", "min_shared"}, "filter");
        FilterConfig filter;
        filter.attribute = require_string(f, "attribute", "filter");
        if (f.contains("min_shared")) filter.min_shared = f.at("min_shared").get<std::int64_t>();
        if (filter.min_shared < 1) throw ConfigError("filter.min_shared must be >= 1");
        cfg.filter = filter;
    }
    if (j.contains("matcher")) cfg.matcher = parse_matcher(j.at("matcher"));
    if (j.contains("clusterer")) {
        const Json& c = j.at("clusterer");
        reject_unknown_keys(c, {"strategy"}, "clusterer");
        cfg.clusterer = clusterer_kind_from_string(require_string(c, "strategy", "clusterer"));
    }
    if (j.contains("assembly")) {
        const Json& a = j.at("assembly");
        reject_unknown_keys(a, {"representation"}, "assembly");
        cfg.assembly =
            profile_representation_from_string(require_string(a, "representation", "assembly"));
    }
    if (j.contains("store")) cfg.store = parse_store(j.at("store"));
    if (j.contains("threads")) {
        std::int64_t threads = j.at("threads").get<std::int64_t>();
        if (threads < 1) throw ConfigError("threads must be >= 1");
        cfg.threads = static_cast<std::size_t>(threads);
    }

    validate_runtime_config(cfg);
    return cfg;
}

RuntimeConfig load_runtime_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_runtime_config(buf.str());
}

void validate_runtime_config(const RuntimeConfig& cfg) {
    std::set<std::string> source_ids;
    bool any_passthrough = false;
    for (const auto& source : cfg.sources) {
        if (!source_ids.insert(source.source_id).second) {
            throw ConfigError("duplicate source_id '" + source.source_id + "'");
        }
        if (source.kind == SourceKind::ReferencePassthrough) {
            any_passthrough = true;
            continue;
        }
        auto chain = cfg.chains.find(source.source_id);
        if (chain == cfg.chains.end() || chain->second.empty()) {
            throw ConfigError("source '" + source.source_id + "' has no extractor chain");
        }
    }
    for (const auto& [source_id, chain] : cfg.chains) {
        if (source_ids.count(source_id) == 0) {
            throw ConfigError("extraction chain for undeclared source '" + source_id + "'");
        }
        validate_chain(chain);
    }

    // Attributes named elsewhere must be producible by some extractor;
    // passthrough sources can carry arbitrary attributes, so skip the check
    // when one is present.
    if (!any_passthrough) {
        std::set<std::string> produced;
        for (const auto& [source_id, chain] : cfg.chains) {
            for (const auto& extractor : chain) {
                auto outs = output_attributes(extractor);
                produced.insert(outs.begin(), outs.end());
            }
        }
        auto check = [&](const std::string& attribute, const char* who) {
            if (!attribute.empty() && produced.count(attribute) == 0) {
                throw ConfigError(std::string(who) + " references attribute '" + attribute +
                                  "' which no extractor produces");
            }
        };
        check(cfg.comparison.key_attribute, "comparison");
        if (cfg.filter) check(cfg.filter->attribute, "filter");
        if (cfg.matcher) {
            for (const auto& rule : cfg.matcher->rules) check(rule.attribute, "matcher");
        }
    }

    if (cfg.matcher) validate_matcher_config(*cfg.matcher);
    if (!cfg.matcher && !cfg.clusterer) {
        throw ConfigError("at least one of matcher and clusterer is required");
    }
    if (cfg.assembly == ProfileRepresentation::Pair && !cfg.matcher) {
        throw ConfigError("pair assembly requires a matcher");
    }
    if (cfg.assembly != ProfileRepresentation::Pair && !cfg.clusterer) {
        throw ConfigError("partition and merged assembly require a clusterer");
    }

    if (cfg.mode == RunMode::Incremental) {
        if (!cfg.clusterer) {
            throw ConfigError("incremental mode requires a clusterer");
        }
        if (cfg.comparison.strategy == ComparisonConfig::Strategy::SortedNeighborhood) {
            // Window membership depends on ingestion order, which breaks the
            // batch/incremental equivalence contract.
            throw ConfigError("sorted_neighborhood is not available in incremental mode; "
                              "use full or block_key");
        }
        if (cfg.clusterer && *cfg.clusterer == ClustererKind::UniqueMapping) {
            throw ConfigError("unique_mapping is not available in incremental mode; "
                              "use connected_components");
        }
    }
}

}  // namespace erkit
