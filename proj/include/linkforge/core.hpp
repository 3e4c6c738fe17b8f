#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace linkforge {

// ─── Errors ──────────────────────────────────────────────────────────────────

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SelfLinkError : public Error {
public:
    explicit SelfLinkError(const std::string& id)
        : Error("self-link is not a valid pair: " + id) {}
};

class LookupError : public Error {
public:
    explicit LookupError(const std::string& id)
        : Error("unknown entity: " + id) {}
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class PartitionError : public Error {
public:
    using Error::Error;
};

// ─── Identifiers and pairs ───────────────────────────────────────────────────

/// Opaque entity identifier. Ordered byte-wise, independent of locale.
class EntityId {
public:
    EntityId() = default;
    explicit EntityId(std::string id) : id_(std::move(id)) {}

    const std::string& str() const noexcept { return id_; }
    bool empty() const noexcept { return id_.empty(); }

    friend bool operator==(const EntityId&, const EntityId&) = default;
    friend std::strong_ordering operator<=>(const EntityId& a, const EntityId& b) noexcept {
        // std::string::compare is char_traits<char>::compare, i.e. memcmp-like
        const int c = a.id_.compare(b.id_);
        return c < 0 ? std::strong_ordering::less
             : c > 0 ? std::strong_ordering::greater
                     : std::strong_ordering::equal;
    }

private:
    std::string id_;
};

/// Unordered pair stored as (a, b) with a < b.
class EntityPair {
public:
    const EntityId& a() const noexcept { return a_; }
    const EntityId& b() const noexcept { return b_; }

    friend bool operator==(const EntityPair&, const EntityPair&) = default;
    friend auto operator<=>(const EntityPair&, const EntityPair&) = default;

    friend EntityPair canonical_pair(EntityId x, EntityId y);

private:
    EntityPair(EntityId a, EntityId b) : a_(std::move(a)), b_(std::move(b)) {}
    EntityId a_;
    EntityId b_;
};

inline EntityPair canonical_pair(EntityId x, EntityId y) {
    if (x == y) throw SelfLinkError(x.str());
    if (y < x) std::swap(x, y);
    return EntityPair(std::move(x), std::move(y));
}

inline EntityPair canonical_pair(std::string_view x, std::string_view y) {
    return canonical_pair(EntityId(std::string(x)), EntityId(std::string(y)));
}

enum class Label { duplicate, distinct };

struct LabeledPair {
    EntityPair pair;
    Label label;

    friend bool operator==(const LabeledPair&, const LabeledPair&) = default;
};

struct ScoredPair {
    EntityPair pair;
    double p;
};

struct WeightedPair {
    EntityPair pair;
    double w;
};

// ─── Linkset ─────────────────────────────────────────────────────────────────

/// Set of same-as assertions. Self-pairs are unrepresentable and order is canonical.
class Linkset {
public:
    Linkset() = default;
    template <class It>
    Linkset(It first, It last) : links_(first, last) {}
    Linkset(std::initializer_list<EntityPair> init) : links_(init) {}

    bool insert(EntityPair p) { return links_.insert(std::move(p)).second; }
    bool contains(const EntityPair& p) const { return links_.count(p) != 0; }
    std::size_t size() const noexcept { return links_.size(); }
    bool empty() const noexcept { return links_.empty(); }

    void merge(const Linkset& other) { links_.insert(other.links_.begin(), other.links_.end()); }

    auto begin() const { return links_.begin(); }
    auto end() const { return links_.end(); }

    const std::set<EntityPair>& pairs() const noexcept { return links_; }

    friend bool operator==(const Linkset&, const Linkset&) = default;

private:
    std::set<EntityPair> links_;
};

inline std::size_t intersection_size(const Linkset& x, const Linkset& y) {
    const Linkset& small = x.size() <= y.size() ? x : y;
    const Linkset& large = x.size() <= y.size() ? y : x;
    std::size_t n = 0;
    for (const auto& p : small)
        if (large.contains(p)) ++n;
    return n;
}

// ─── Partitions ──────────────────────────────────────────────────────────────

using Cluster = std::vector<EntityId>;

/// Disjoint non-empty clusters covering a universe. Each cluster is kept sorted
/// and clusters are ordered by their smallest member.
class ClusterPartition {
public:
    ClusterPartition() = default;

    explicit ClusterPartition(std::vector<Cluster> clusters) : clusters_(std::move(clusters)) {
        std::set<EntityId> seen;
        for (auto& c : clusters_) {
            if (c.empty()) throw PartitionError("empty cluster");
            std::sort(c.begin(), c.end());
            for (const auto& e : c) {
                if (e.empty()) throw PartitionError("empty entity id");
                if (!seen.insert(e).second)
                    throw PartitionError("entity in more than one cluster: " + e.str());
            }
        }
        std::sort(clusters_.begin(), clusters_.end(),
                  [](const Cluster& x, const Cluster& y) { return x.front() < y.front(); });
        universe_size_ = seen.size();
    }

    /// Also checks that the clusters cover exactly `universe`.
    ClusterPartition(std::vector<Cluster> clusters, const std::vector<EntityId>& universe)
        : ClusterPartition(std::move(clusters)) {
        std::set<EntityId> u(universe.begin(), universe.end());
        if (u.size() != universe_size_)
            throw PartitionError("partition does not cover the universe");
        for (const auto& c : clusters_)
            for (const auto& e : c)
                if (!u.count(e)) throw PartitionError("entity outside universe: " + e.str());
    }

    const std::vector<Cluster>& clusters() const noexcept { return clusters_; }
    std::size_t size() const noexcept { return clusters_.size(); }
    std::size_t universe_size() const noexcept { return universe_size_; }

    std::vector<EntityId> universe() const {
        std::vector<EntityId> out;
        out.reserve(universe_size_);
        for (const auto& c : clusters_) out.insert(out.end(), c.begin(), c.end());
        std::sort(out.begin(), out.end());
        return out;
    }

    friend bool operator==(const ClusterPartition&, const ClusterPartition&) = default;

private:
    std::vector<Cluster> clusters_;
    std::size_t universe_size_ = 0;
};

/// All intra-cluster pairs. The result is transitively closed.
inline Linkset intra_cluster_links(const std::vector<Cluster>& clusters) {
    Linkset out;
    for (const auto& c : clusters)
        for (std::size_t i = 0; i < c.size(); ++i)
            for (std::size_t j = i + 1; j < c.size(); ++j) out.insert(canonical_pair(c[i], c[j]));
    return out;
}

struct GroundTruth {
    ClusterPartition clusters;
};

inline Linkset gold_linkset(const GroundTruth& gt) { return intra_cluster_links(gt.clusters.clusters()); }

// ─── Embeddings ──────────────────────────────────────────────────────────────

/// Entity vectors of a fixed dimension. Rows are stored contiguously and sorted
/// by id, so a row index order is the lexicographic id order.
class EmbeddingTable {
public:
    EmbeddingTable() = default;

    explicit EmbeddingTable(std::size_t dim) : dim_(dim) {
        if (dim == 0) throw ParameterError("embedding dimension must be positive");
    }

    EmbeddingTable(std::size_t dim, std::vector<std::pair<EntityId, std::vector<double>>> rows)
        : EmbeddingTable(dim) {
        std::sort(rows.begin(), rows.end(),
                  [](const auto& x, const auto& y) { return x.first < y.first; });
        ids_.reserve(rows.size());
        data_.reserve(rows.size() * dim);
        for (auto& [id, v] : rows) {
            if (id.empty()) throw ParameterError("empty entity id");
            if (!ids_.empty() && ids_.back() == id) throw ParameterError("duplicate entity id: " + id.str());
            if (v.size() != dim)
                throw ParameterError("vector for " + id.str() + " has " + std::to_string(v.size()) +
                                     " components, expected " + std::to_string(dim));
            for (double x : v)
                if (!std::isfinite(x)) throw ParameterError("non-finite component for " + id.str());
            index_.emplace(id.str(), ids_.size());
            ids_.push_back(std::move(id));
            data_.insert(data_.end(), v.begin(), v.end());
        }
    }

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return ids_.size(); }

    const std::vector<EntityId>& ids() const noexcept { return ids_; }
    const EntityId& id(std::size_t row) const { return ids_[row]; }

    std::size_t row_of(const EntityId& id) const {
        auto it = index_.find(id.str());
        if (it == index_.end()) throw LookupError(id.str());
        return it->second;
    }
    bool contains(const EntityId& id) const { return index_.count(id.str()) != 0; }

    const double* row(std::size_t r) const noexcept { return data_.data() + r * dim_; }
    const double* vector(const EntityId& id) const { return row(row_of(id)); }

private:
    std::size_t dim_ = 0;
    std::vector<EntityId> ids_;
    std::vector<double> data_;
    std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace linkforge

template <>
struct std::hash<linkforge::EntityId> {
    std::size_t operator()(const linkforge::EntityId& id) const noexcept {
        return std::hash<std::string>{}(id.str());
    }
};
