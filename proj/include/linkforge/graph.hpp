#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <vector>

#include "classifier.hpp"
#include "core.hpp"

namespace linkforge {

/// Cut-off in the open interval (0, 1).
class Cutoff {
public:
    explicit Cutoff(double theta) : theta_(theta) {
        if (!(theta > 0 && theta < 1)) throw ParameterError("cutoff must lie strictly between 0 and 1");
    }
    double value() const noexcept { return theta_; }

private:
    double theta_;
};

/// A connected set of entities with the tentative links inside it.
struct Component {
    std::vector<EntityId> entities;  // sorted
    Linkset edges;

    std::size_t size() const noexcept { return entities.size(); }
};

/// Pairs scoring strictly above theta, plus every expert-labeled duplicate.
inline Linkset tentative_linkset(const PairScores& scored, const std::vector<EntityPair>& labeled_dups, Cutoff theta) {
    Linkset out;
    for (const auto& [pair, p] : scored)
        if (p > theta.value()) out.insert(pair);
    for (const auto& pair : labeled_dups) out.insert(pair);
    return out;
}

inline std::vector<EntityPair> labeled_duplicates(const std::vector<LabeledPair>& labeled) {
    std::vector<EntityPair> out;
    for (const auto& lp : labeled)
        if (lp.label == Label::duplicate) out.push_back(lp.pair);
    return out;
}

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::size_t x, std::size_t y) {
        x = find(x);
        y = find(y);
        if (x == y) return;
        if (rank_[x] < rank_[y]) std::swap(x, y);
        parent_[y] = x;
        if (rank_[x] == rank_[y]) ++rank_[x];
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<unsigned> rank_;
};

/// Connected components of the link graph, ordered by smallest member.
/// Entities without links do not appear.
inline std::vector<Component> connected_components(const Linkset& ls) {
    std::map<EntityId, std::size_t> index;
    for (const auto& p : ls) {
        index.emplace(p.a(), 0);
        index.emplace(p.b(), 0);
    }
    std::vector<EntityId> ids;
    ids.reserve(index.size());
    for (auto& [id, i] : index) {
        i = ids.size();
        ids.push_back(id);
    }
    DisjointSets ds(ids.size());
    for (const auto& p : ls) ds.unite(index[p.a()], index[p.b()]);

    // ids are sorted, so first appearance of a root is its smallest member
    std::vector<std::size_t> slot(ids.size(), SIZE_MAX);
    std::vector<Component> out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const std::size_t r = ds.find(i);
        if (slot[r] == SIZE_MAX) {
            slot[r] = out.size();
            out.emplace_back();
        }
        out[slot[r]].entities.push_back(ids[i]);
    }
    for (const auto& p : ls) out[slot[ds.find(index[p.a()])]].edges.insert(p);
    return out;
}

struct FilteredComponents {
    std::vector<Component> kept;
    std::vector<Component> discarded;
};

/// Components with more than `max_size` entities are discarded.
inline FilteredComponents filter_components(std::vector<Component> comps, std::size_t max_size) {
    if (max_size < 2) throw ParameterError("component size cap must be at least 2");
    FilteredComponents out;
    for (auto& c : comps) (c.size() > max_size ? out.discarded : out.kept).push_back(std::move(c));
    return out;
}

/// Closure of each connected component is its complete graph.
inline Linkset transitive_closure(const std::vector<Component>& comps) {
    Linkset out;
    for (const auto& c : comps) out.merge(intra_cluster_links({c.entities}));
    return out;
}

inline Linkset transitive_closure(const Linkset& ls) { return transitive_closure(connected_components(ls)); }

/// True when (a,b) and (b,c) in `ls` always imply (a,c) in `ls`.
inline bool is_transitively_closed(const Linkset& ls) { return transitive_closure(ls) == ls; }

}  // namespace linkforge
