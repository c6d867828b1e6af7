#include "erkit/matching.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "erkit/text.hpp"

namespace erkit {

const char* to_string(SimilarityKind kind) {
    switch (kind) {
        case SimilarityKind::Exact: return "exact";
        case SimilarityKind::LevenshteinNorm: return "levenshtein_norm";
        case SimilarityKind::JaroWinkler: return "jaro_winkler";
        case SimilarityKind::JaccardTokens: return "jaccard_tokens";
        case SimilarityKind::NumericCloseness: return "numeric_closeness";
    }
    return "exact";
}

SimilarityKind similarity_kind_from_string(const std::string& s) {
    if (s == "exact") return SimilarityKind::Exact;
    if (s == "levenshtein_norm") return SimilarityKind::LevenshteinNorm;
    if (s == "jaro_winkler") return SimilarityKind::JaroWinkler;
    if (s == "jaccard_tokens") return SimilarityKind::JaccardTokens;
    if (s == "numeric_closeness") return SimilarityKind::NumericCloseness;
    throw InvalidArgumentError("unknown similarity kind '" + s + "'");
}

double levenshtein_norm(const std::string& a, const std::string& b) {
    std::u32string s = text::decode_utf8(a);
    std::u32string t = text::decode_utf8(b);
    if (s == t) return 1.0;
    const std::size_t n = s.size();
    const std::size_t m = t.size();
    if (n == 0 || m == 0) return 0.0;

    std::vector<std::size_t> prev(m + 1);
    std::vector<std::size_t> curr(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
    for (std::size_t i = 0; i < n; ++i) {
        curr[0] = i + 1;
        for (std::size_t j = 0; j < m; ++j) {
            std::size_t subst = prev[j] + (s[i] == t[j] ? 0 : 1);
            curr[j + 1] = std::min({curr[j] + 1, prev[j + 1] + 1, subst});
        }
        std::swap(prev, curr);
    }
    double dist = static_cast<double>(prev[m]);
    return 1.0 - dist / static_cast<double>(std::max(n, m));
}

double jaro_winkler(const std::string& a, const std::string& b) {
    std::u32string s = text::decode_utf8(a);
    std::u32string t = text::decode_utf8(b);
    if (s == t) return 1.0;
    const std::size_t n = s.size();
    const std::size_t m = t.size();
    if (n == 0 || m == 0) return 0.0;

    const std::size_t window = std::max(n, m) / 2 == 0 ? 0 : std::max(n, m) / 2 - 1;
    std::vector<bool> s_matched(n, false);
    std::vector<bool> t_matched(m, false);
    std::size_t matches = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t lo = i > window ? i - window : 0;
        std::size_t hi = std::min(m, i + window + 1);
        for (std::size_t j = lo; j < hi; ++j) {
            if (t_matched[j] || s[i] != t[j]) continue;
            s_matched[i] = true;
            t_matched[j] = true;
            ++matches;
            break;
        }
    }
    if (matches == 0) return 0.0;

    std::size_t transpositions = 0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!s_matched[i]) continue;
        while (!t_matched[k]) ++k;
        if (s[i] != t[k]) ++transpositions;
        ++k;
    }
    double mm = static_cast<double>(matches);
    double jaro = (mm / static_cast<double>(n) + mm / static_cast<double>(m) +
                   (mm - static_cast<double>(transpositions / 2)) / mm) /
                  3.0;

    // Standard Winkler boost: common prefix up to 4 code points, scale 0.1.
    std::size_t prefix = 0;
    for (std::size_t i = 0; i < std::min({n, m, std::size_t{4}}); ++i) {
        if (s[i] != t[i]) break;
        ++prefix;
    }
    return jaro + static_cast<double>(prefix) * 0.1 * (1.0 - jaro);
}

double jaccard_tokens(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t intersection = 0;
    const auto& small = a.size() <= b.size() ? a : b;
    const auto& large = a.size() <= b.size() ? b : a;
    for (const auto& token : small) {
        if (large.count(token) != 0) ++intersection;
    }
    std::size_t unioned = a.size() + b.size() - intersection;
    return static_cast<double>(intersection) / static_cast<double>(unioned);
}

double numeric_closeness(double a, double b) {
    constexpr double kEpsilon = 1e-9;
    double denom = std::max({std::fabs(a), std::fabs(b), kEpsilon});
    double sim = 1.0 - std::fabs(a - b) / denom;
    return std::clamp(sim, 0.0, 1.0);
}

double similarity(SimilarityKind kind, const AttributeValue& a, const AttributeValue& b) {
    switch (kind) {
        case SimilarityKind::Exact:
            if (a.kind() != b.kind()) {
                throw InvalidArgumentError("exact similarity requires operands of one type");
            }
            return a == b ? 1.0 : 0.0;
        case SimilarityKind::LevenshteinNorm:
            if (!a.is_text() || !b.is_text()) {
                throw InvalidArgumentError("levenshtein_norm requires text operands");
            }
            return levenshtein_norm(a.as_text(), b.as_text());
        case SimilarityKind::JaroWinkler:
            if (!a.is_text() || !b.is_text()) {
                throw InvalidArgumentError("jaro_winkler requires text operands");
            }
            return jaro_winkler(a.as_text(), b.as_text());
        case SimilarityKind::JaccardTokens:
            if (!a.is_token_set() || !b.is_token_set()) {
                throw InvalidArgumentError("jaccard_tokens requires token_set operands");
            }
            return jaccard_tokens(a.as_tokens(), b.as_tokens());
        case SimilarityKind::NumericCloseness:
            if (!a.is_number() || !b.is_number()) {
                throw InvalidArgumentError("numeric_closeness requires number operands");
            }
            return numeric_closeness(a.as_number(), b.as_number());
    }
    throw InvalidArgumentError("unknown similarity kind");
}

const char* to_string(MatcherKind kind) {
    switch (kind) {
        case MatcherKind::RuleWeighted: return "rule_weighted";
        case MatcherKind::FellegiSunter: return "fellegi_sunter";
    }
    return "rule_weighted";
}

MatcherKind matcher_kind_from_string(const std::string& s) {
    if (s == "rule_weighted") return MatcherKind::RuleWeighted;
    if (s == "fellegi_sunter") return MatcherKind::FellegiSunter;
    throw InvalidArgumentError("unknown matcher kind '" + s + "'");
}

void validate_matcher_config(const MatcherConfig& cfg) {
    if (cfg.rules.empty()) {
        throw ConfigError("matcher needs at least one field rule");
    }
    if (cfg.tau_possible > cfg.tau_match) {
        throw ConfigError("tau_possible must be <= tau_match");
    }
    if (cfg.kind == MatcherKind::RuleWeighted) {
        if (cfg.tau_possible < 0.0 || cfg.tau_match > 1.0) {
            throw ConfigError("rule_weighted thresholds must lie in [0,1]");
        }
    }
    for (const auto& rule : cfg.rules) {
        if (rule.attribute.empty()) {
            throw ConfigError("field rule attribute must be non-empty");
        }
        if (cfg.kind == MatcherKind::RuleWeighted) {
            if (!(rule.weight > 0.0)) {
                throw ConfigError("field rule weight must be > 0: '" + rule.attribute + "'");
            }
        } else {
            if (rule.m <= 0.0 || rule.m >= 1.0 || rule.u <= 0.0 || rule.u >= 1.0) {
                throw ConfigError("fellegi_sunter m and u must lie in (0,1): '" +
                                  rule.attribute + "'");
            }
            if (rule.agreement_threshold < 0.0 || rule.agreement_threshold > 1.0) {
                throw ConfigError("agreement_threshold must lie in [0,1]: '" + rule.attribute +
                                  "'");
            }
            if (rule.m <= rule.u) {
                std::cerr << "warning: field '" << rule.attribute
                          << "' has m <= u (uninformative or inverted)\n";
            }
        }
    }
}

namespace {

MatchLabel label_for(double value, double tau_match, double tau_possible) {
    if (value >= tau_match) return MatchLabel::Match;
    if (value >= tau_possible) return MatchLabel::Possible;
    return MatchLabel::NonMatch;
}

MatchEdge edge_skeleton(const EntityReference& x, const EntityReference& y) {
    MatchEdge edge;
    if (x.ref_id < y.ref_id) {
        edge.a = x.ref_id;
        edge.b = y.ref_id;
    } else {
        edge.a = y.ref_id;
        edge.b = x.ref_id;
    }
    return edge;
}

}  // namespace

MatchEdge score_rule_weighted(const MatcherConfig& cfg, const EntityReference& x,
                              const EntityReference& y) {
    MatchEdge edge = edge_skeleton(x, y);
    double weighted_sum = 0.0;
    double weight_total = 0.0;
    for (const auto& rule : cfg.rules) {
        auto ix = x.attributes.find(rule.attribute);
        auto iy = y.attributes.find(rule.attribute);
        if (ix == x.attributes.end() || iy == y.attributes.end()) continue;
        double sim = similarity(rule.similarity, ix->second, iy->second);
        edge.field_scores[rule.attribute] = sim;
        weighted_sum += rule.weight * sim;
        weight_total += rule.weight;
    }
    if (weight_total > 0.0) {
        edge.score = weighted_sum / weight_total;
        edge.label = label_for(edge.score, cfg.tau_match, cfg.tau_possible);
    } else {
        edge.score = 0.0;
        edge.label = MatchLabel::NonMatch;
    }
    return edge;
}

double fellegi_sunter_weight(const MatcherConfig& cfg, const EntityReference& x,
                             const EntityReference& y) {
    double total = 0.0;
    for (const auto& rule : cfg.rules) {
        auto ix = x.attributes.find(rule.attribute);
        auto iy = y.attributes.find(rule.attribute);
        if (ix == x.attributes.end() || iy == y.attributes.end()) continue;
        double sim = similarity(rule.similarity, ix->second, iy->second);
        if (sim >= rule.agreement_threshold) {
            total += std::log2(rule.m / rule.u);
        } else {
            total += std::log2((1.0 - rule.m) / (1.0 - rule.u));
        }
    }
    return total;
}

MatchEdge score_fellegi_sunter(const MatcherConfig& cfg, const EntityReference& x,
                               const EntityReference& y) {
    MatchEdge edge = edge_skeleton(x, y);
    double total = 0.0;
    double w_min = 0.0;
    double w_max = 0.0;
    for (const auto& rule : cfg.rules) {
        double agree = std::log2(rule.m / rule.u);
        double disagree = std::log2((1.0 - rule.m) / (1.0 - rule.u));
        w_max += agree;
        w_min += disagree;
        auto ix = x.attributes.find(rule.attribute);
        auto iy = y.attributes.find(rule.attribute);
        if (ix == x.attributes.end() || iy == y.attributes.end()) continue;
        double sim = similarity(rule.similarity, ix->second, iy->second);
        edge.field_scores[rule.attribute] = sim;
        total += sim >= rule.agreement_threshold ? agree : disagree;
    }
    edge.label = label_for(total, cfg.tau_match, cfg.tau_possible);
    if (w_max > w_min) {
        edge.score = std::clamp((total - w_min) / (w_max - w_min), 0.0, 1.0);
    } else {
        edge.score = 0.5;  // every field uninformative: no evidence either way
    }
    return edge;
}

MatchEdge score_pair(const MatcherConfig& cfg, const EntityReference& x,
                     const EntityReference& y) {
    return cfg.kind == MatcherKind::RuleWeighted ? score_rule_weighted(cfg, x, y)
                                                 : score_fellegi_sunter(cfg, x, y);
}

std::vector<MatchEdge> match_space(const ComparisonSpace& space, const MatcherConfig& cfg,
                                   const std::vector<EntityReference>& refs,
                                   std::size_t threads) {
    validate_matcher_config(cfg);
    std::unordered_map<std::string, const EntityReference*> by_id;
    by_id.reserve(refs.size());
    for (const auto& ref : refs) by_id[ref.ref_id] = &ref;

    auto resolve = [&](const std::string& id) -> const EntityReference& {
        auto it = by_id.find(id);
        if (it == by_id.end()) {
            throw InvalidArgumentError("comparison group names unknown ref '" + id + "'");
        }
        return *it->second;
    };

    for (const auto& group : space.groups) {
        if (group.member_ids.size() != 2) {
            throw InvalidArgumentError("shipped matchers require groups of size 2, got " +
                                       std::to_string(group.member_ids.size()) + " starting at '" +
                                       (group.member_ids.empty() ? "" : group.member_ids[0]) +
                                       "'");
        }
    }

    std::vector<MatchEdge> edges(space.groups.size());
    auto score_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto& group = space.groups[i];
            edges[i] = score_pair(cfg, resolve(group.member_ids[0]), resolve(group.member_ids[1]));
        }
    };

    if (threads <= 1 || space.groups.size() < 2) {
        score_range(0, space.groups.size());
    } else {
        // Each worker fills a disjoint slice; output order stays canonical.
        std::size_t worker_count = std::min(threads, space.groups.size());
        std::vector<std::thread> workers;
        workers.reserve(worker_count);
        std::size_t chunk = (space.groups.size() + worker_count - 1) / worker_count;
        std::exception_ptr failure;
        std::mutex failure_mutex;
        for (std::size_t w = 0; w < worker_count; ++w) {
            std::size_t begin = w * chunk;
            std::size_t end = std::min(space.groups.size(), begin + chunk);
            workers.emplace_back([&, begin, end] {
                try {
                    score_range(begin, end);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
        for (auto& worker : workers) worker.join();
        if (failure) std::rethrow_exception(failure);
    }
    return edges;
}

}  // namespace erkit
