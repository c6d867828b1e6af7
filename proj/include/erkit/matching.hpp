#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "erkit/types.hpp"

namespace erkit {

enum class SimilarityKind { Exact, LevenshteinNorm, JaroWinkler, JaccardTokens, NumericCloseness };

const char* to_string(SimilarityKind kind);
SimilarityKind similarity_kind_from_string(const std::string& s);

double levenshtein_norm(const std::string& a, const std::string& b);
double jaro_winkler(const std::string& a, const std::string& b);
double jaccard_tokens(const std::set<std::string>& a, const std::set<std::string>& b);
double numeric_closeness(double a, double b);

// Symmetric, 1.0 on equal operands. Throws InvalidArgumentError when the
// operand types do not fit the measure.
double similarity(SimilarityKind kind, const AttributeValue& a, const AttributeValue& b);

enum class MatcherKind { RuleWeighted, FellegiSunter };

const char* to_string(MatcherKind kind);
MatcherKind matcher_kind_from_string(const std::string& s);

struct FieldRule {
    std::string attribute;
    SimilarityKind similarity = SimilarityKind::Exact;
    double weight = 1.0;               // rule_weighted
    double m = 0.9;                    // fellegi_sunter: P(agree | match)
    double u = 0.1;                    // fellegi_sunter: P(agree | non-match)
    double agreement_threshold = 1.0;  // fellegi_sunter: sim >= threshold counts as agreement
};

struct MatcherConfig {
    MatcherKind kind = MatcherKind::RuleWeighted;
    std::vector<FieldRule> rules;
    // rule_weighted: both in [0,1]; fellegi_sunter: log2-weight units.
    double tau_match = 1.0;
    double tau_possible = 0.0;
};

// Throws ConfigError on empty rules, bad thresholds, non-positive weights, or
// m/u outside (0,1); warns on stderr when a fellegi_sunter field has m <= u.
void validate_matcher_config(const MatcherConfig& cfg);

MatchEdge score_rule_weighted(const MatcherConfig& cfg, const EntityReference& x,
                              const EntityReference& y);

MatchEdge score_fellegi_sunter(const MatcherConfig& cfg, const EntityReference& x,
                               const EntityReference& y);

MatchEdge score_pair(const MatcherConfig& cfg, const EntityReference& x,
                     const EntityReference& y);

// Total log2 agreement weight (the decision variable the thresholds apply
// to); exposed for tests and diagnostics.
double fellegi_sunter_weight(const MatcherConfig& cfg, const EntityReference& x,
                             const EntityReference& y);

// Scores every group of the space; shipped matchers accept pairs only.
// Output is in canonical group order regardless of thread count.
std::vector<MatchEdge> match_space(const ComparisonSpace& space, const MatcherConfig& cfg,
                                   const std::vector<EntityReference>& refs,
                                   std::size_t threads = 1);

}  // namespace erkit
