#include "erkit/clustering.hpp"

#include <algorithm>
#include <map>

namespace erkit {

const char* to_string(ClustererKind kind) {
    switch (kind) {
        case ClustererKind::ConnectedComponents: return "connected_components";
        case ClustererKind::UniqueMapping: return "unique_mapping";
    }
    return "connected_components";
}

ClustererKind clusterer_kind_from_string(const std::string& s) {
    if (s == "connected_components") return ClustererKind::ConnectedComponents;
    if (s == "unique_mapping") return ClustererKind::UniqueMapping;
    throw InvalidArgumentError("unknown clusterer kind '" + s + "'");
}

void UnionFind::add(const std::string& ref_id) {
    if (index_.count(ref_id) != 0) return;
    index_.emplace(ref_id, ids_.size());
    ids_.push_back(ref_id);
    parent_.push_back(parent_.size());
    component_size_.push_back(1);
}

bool UnionFind::contains(const std::string& ref_id) const { return index_.count(ref_id) != 0; }

std::size_t UnionFind::index_of(const std::string& ref_id) const {
    auto it = index_.find(ref_id);
    if (it == index_.end()) {
        throw InvalidArgumentError("unknown ref '" + ref_id + "' in clustering state");
    }
    return it->second;
}

std::size_t UnionFind::find(std::size_t node) const {
    std::size_t root = node;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[node] != root) {
        std::size_t next = parent_[node];
        parent_[node] = root;
        node = next;
    }
    return root;
}

void UnionFind::merge(const std::string& a, const std::string& b) {
    std::size_t ra = find(index_of(a));
    std::size_t rb = find(index_of(b));
    if (ra == rb) return;
    if (component_size_[ra] < component_size_[rb]) std::swap(ra, rb);
    parent_[rb] = ra;
    component_size_[ra] += component_size_[rb];
}

void UnionFind::merge_edges(const std::vector<MatchEdge>& edges) {
    for (const auto& edge : edges) {
        if (edge.label != MatchLabel::Match) continue;
        merge(edge.a, edge.b);
    }
}

std::vector<std::string> UnionFind::component_of(const std::string& ref_id) const {
    std::size_t root = find(index_of(ref_id));
    std::vector<std::string> out;
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        if (find(i) == root) out.push_back(ids_[i]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

ClusterPartition UnionFind::partition() const {
    std::map<std::size_t, std::vector<std::string>> by_root;
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        by_root[find(i)].push_back(ids_[i]);
    }
    ClusterPartition out;
    for (auto& [root, members] : by_root) {
        std::sort(members.begin(), members.end());
        out.universe.insert(members.begin(), members.end());
        out.clusters.push_back(std::move(members));
    }
    std::sort(out.clusters.begin(), out.clusters.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return out;
}

ClusterPartition connected_components(const std::vector<EntityReference>& refs,
                                      const std::vector<MatchEdge>& edges) {
    UnionFind uf;
    for (const auto& ref : refs) uf.add(ref.ref_id);
    uf.merge_edges(edges);
    return uf.partition();
}

ClusterPartition unique_mapping(const std::vector<EntityReference>& refs,
                                const std::vector<MatchEdge>& edges) {
    std::unordered_map<std::string, const std::string*> source_of;
    source_of.reserve(refs.size());
    for (const auto& ref : refs) source_of[ref.ref_id] = &ref.source_id;

    std::vector<const MatchEdge*> candidates;
    for (const auto& edge : edges) {
        if (edge.label != MatchLabel::Match) continue;
        auto ia = source_of.find(edge.a);
        auto ib = source_of.find(edge.b);
        if (ia == source_of.end() || ib == source_of.end()) {
            throw InvalidArgumentError("edge references unknown ref '" +
                                       (ia == source_of.end() ? edge.a : edge.b) + "'");
        }
        if (*ia->second == *ib->second) {
            throw ConfigError("unique_mapping requires cross-source edges; '" + edge.a +
                              "' and '" + edge.b + "' share source '" + *ia->second + "'");
        }
        candidates.push_back(&edge);
    }
    std::sort(candidates.begin(), candidates.end(), [](const MatchEdge* x, const MatchEdge* y) {
        if (x->score != y->score) return x->score > y->score;
        if (x->a != y->a) return x->a < y->a;
        return x->b < y->b;
    });

    std::set<std::string> taken;
    std::vector<std::vector<std::string>> pairs;
    for (const MatchEdge* edge : candidates) {
        if (taken.count(edge->a) != 0 || taken.count(edge->b) != 0) continue;
        taken.insert(edge->a);
        taken.insert(edge->b);
        pairs.push_back({edge->a, edge->b});
    }

    ClusterPartition out;
    for (auto& pair : pairs) {
        std::sort(pair.begin(), pair.end());
        out.universe.insert(pair.begin(), pair.end());
        out.clusters.push_back(std::move(pair));
    }
    for (const auto& ref : refs) {
        if (out.universe.insert(ref.ref_id).second) {
            out.clusters.push_back({ref.ref_id});
        }
    }
    std::sort(out.clusters.begin(), out.clusters.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return out;
}

ClusterPartition incremental_merge(UnionFind& state, const std::vector<MatchEdge>& new_edges) {
    state.merge_edges(new_edges);
    return state.partition();
}

}  // namespace erkit
