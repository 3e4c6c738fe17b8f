#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "core.hpp"
#include "util.hpp"

namespace linkforge {

/// Neighbor lists by row index; list i holds the k nearest other rows of row i,
/// ascending by (squared distance, row index). Row order is id order, so the
/// index tie-break is the lexicographic id tie-break.
using NeighborLists = std::vector<std::vector<std::size_t>>;

inline double squared_distance(const double* x, const double* y, std::size_t dim) noexcept {
    double s = 0;
    for (std::size_t i = 0; i < dim; ++i) {
        const double d = x[i] - y[i];
        s += d * d;
    }
    return s;
}

namespace detail {

struct Neighbor {
    double dist2;
    std::size_t index;
    friend bool operator<(const Neighbor& x, const Neighbor& y) noexcept {
        return x.dist2 < y.dist2 || (x.dist2 == y.dist2 && x.index < y.index);
    }
};

/// Bounded candidate list kept as a max-heap on (dist2, index).
class KBest {
public:
    explicit KBest(std::size_t k) : k_(k) { heap_.reserve(k + 1); }

    bool full() const noexcept { return heap_.size() == k_; }
    const Neighbor& worst() const noexcept { return heap_.front(); }

    void offer(Neighbor n) {
        if (!full()) {
            heap_.push_back(n);
            std::push_heap(heap_.begin(), heap_.end());
        } else if (n < heap_.front()) {
            std::pop_heap(heap_.begin(), heap_.end());
            heap_.back() = n;
            std::push_heap(heap_.begin(), heap_.end());
        }
    }

    std::vector<std::size_t> sorted_indices() {
        std::sort_heap(heap_.begin(), heap_.end());
        std::vector<std::size_t> out;
        out.reserve(heap_.size());
        for (const auto& n : heap_) out.push_back(n.index);
        return out;
    }

private:
    std::size_t k_;
    std::vector<Neighbor> heap_;
};

inline void check_k(const EmbeddingTable& table, std::size_t k) {
    if (k == 0) throw ParameterError("k must be positive");
    if (k >= table.size())
        throw ParameterError("k = " + std::to_string(k) + " must be smaller than the number of entities (" +
                             std::to_string(table.size()) + ")");
}

}  // namespace detail

/// Exhaustive O(n^2) scan. Kept as the reference the index is checked against.
inline NeighborLists knn_brute_force(const EmbeddingTable& table, std::size_t k) {
    detail::check_k(table, k);
    const std::size_t n = table.size(), dim = table.dim();
    NeighborLists out(n);
    for (std::size_t i = 0; i < n; ++i) {
        detail::KBest best(k);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) best.offer({squared_distance(table.row(i), table.row(j), dim), j});
        out[i] = best.sorted_indices();
    }
    return out;
}

/// Static kd-tree over the rows of an EmbeddingTable (which must outlive it).
/// Splits on the widest dimension at the median; leaves hold small buckets.
class KdTree {
public:
    explicit KdTree(const EmbeddingTable& table, std::size_t leaf_size = 16)
        : table_(&table), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
        order_.resize(table.size());
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        if (!order_.empty()) build(0, order_.size());
    }

    /// The k nearest rows other than `self`, ascending by (squared distance, index).
    std::vector<std::size_t> query(std::size_t self, std::size_t k) const {
        detail::KBest best(k);
        if (!nodes_.empty()) search(0, table_->row(self), self, best);
        return best.sorted_indices();
    }

private:
    struct Node {
        std::size_t begin, end;          // range in order_
        std::size_t left = 0, right = 0;  // children; 0 means leaf (root is never a child)
        std::size_t split_dim = 0;
        double split = 0;
        std::vector<double> lo, hi;  // bounding box
    };

    std::size_t build(std::size_t begin, std::size_t end) {
        const std::size_t dim = table_->dim();
        const std::size_t id = nodes_.size();
        nodes_.push_back(Node{begin, end, 0, 0, 0, 0, std::vector<double>(dim, std::numeric_limits<double>::infinity()),
                              std::vector<double>(dim, -std::numeric_limits<double>::infinity())});
        {
            Node& node = nodes_[id];
            for (std::size_t i = begin; i < end; ++i) {
                const double* r = table_->row(order_[i]);
                for (std::size_t d = 0; d < dim; ++d) {
                    node.lo[d] = std::min(node.lo[d], r[d]);
                    node.hi[d] = std::max(node.hi[d], r[d]);
                }
            }
        }
        if (end - begin <= leaf_size_) return id;

        std::size_t best_dim = 0;
        double best_extent = -1;
        for (std::size_t d = 0; d < dim; ++d) {
            const double extent = nodes_[id].hi[d] - nodes_[id].lo[d];
            if (extent > best_extent) {
                best_extent = extent;
                best_dim = d;
            }
        }
        if (best_extent <= 0) return id;  // all points coincide

        const std::size_t mid = begin + (end - begin) / 2;
        std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                         order_.begin() + static_cast<std::ptrdiff_t>(mid),
                         order_.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t x, std::size_t y) {
                             return table_->row(x)[best_dim] < table_->row(y)[best_dim];
                         });
        const double split = table_->row(order_[mid])[best_dim];
        const std::size_t left = build(begin, mid);
        const std::size_t right = build(mid, end);
        Node& node = nodes_[id];
        node.left = left;
        node.right = right;
        node.split_dim = best_dim;
        node.split = split;
        return id;
    }

    double box_distance2(const Node& node, const double* q) const noexcept {
        double s = 0;
        for (std::size_t d = 0; d < node.lo.size(); ++d) {
            double diff = 0;
            if (q[d] < node.lo[d])
                diff = node.lo[d] - q[d];
            else if (q[d] > node.hi[d])
                diff = q[d] - node.hi[d];
            s += diff * diff;
        }
        return s;
    }

    void search(std::size_t id, const double* q, std::size_t self, detail::KBest& best) const {
        const Node& node = nodes_[id];
        // Equal bound is not pruned: the box may hold a tie with a smaller index.
        if (best.full() && box_distance2(node, q) > best.worst().dist2) return;
        if (node.left == 0) {
            const std::size_t dim = table_->dim();
            for (std::size_t i = node.begin; i < node.end; ++i) {
                const std::size_t r = order_[i];
                if (r != self) best.offer({squared_distance(q, table_->row(r), dim), r});
            }
            return;
        }
        const bool go_left = q[node.split_dim] < node.split;
        search(go_left ? node.left : node.right, q, self, best);
        search(go_left ? node.right : node.left, q, self, best);
    }

    const EmbeddingTable* table_;
    std::size_t leaf_size_;
    std::vector<std::size_t> order_;
    std::vector<Node> nodes_;
};

/// Index-backed exact kNN. Queries are independent and read-only against the
/// tree, so the result is identical for every `jobs` value.
inline NeighborLists knn_indices(const EmbeddingTable& table, std::size_t k, unsigned jobs = 1) {
    detail::check_k(table, k);
    const KdTree tree(table);
    NeighborLists out(table.size());
    parallel_for(table.size(), jobs, [&](std::size_t i) { out[i] = tree.query(i, k); });
    return out;
}

inline std::map<EntityId, std::vector<EntityId>> knn(const EmbeddingTable& table, std::size_t k,
                                                     unsigned jobs = 1) {
    const NeighborLists lists = knn_indices(table, k, jobs);
    std::map<EntityId, std::vector<EntityId>> out;
    for (std::size_t i = 0; i < lists.size(); ++i) {
        auto& v = out[table.id(i)];
        for (std::size_t j : lists[i]) v.push_back(table.id(j));
    }
    return out;
}

struct CandidateSet {
    Linkset pairs;
    std::size_t k = 0;
};

inline CandidateSet candidate_pairs_from(const EmbeddingTable& table, const NeighborLists& lists, std::size_t k) {
    CandidateSet out{{}, k};
    for (std::size_t i = 0; i < lists.size(); ++i)
        for (std::size_t j : lists[i]) out.pairs.insert(canonical_pair(table.id(i), table.id(j)));
    return out;
}

/// Union over entities of (entity, neighbor) pairs, canonicalized and deduplicated.
inline CandidateSet candidate_pairs(const EmbeddingTable& table, std::size_t k, unsigned jobs = 1) {
    return candidate_pairs_from(table, knn_indices(table, k, jobs), k);
}

}  // namespace linkforge
