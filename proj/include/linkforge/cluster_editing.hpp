#pragma once

#include <algorithm>
#include <chrono>
#include <cfloat>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "classifier.hpp"
#include "core.hpp"
#include "graph.hpp"
#include "util.hpp"

namespace linkforge {

class DomainError : public Error {
public:
    using Error::Error;
};

class BudgetExceededError : public Error {
public:
    BudgetExceededError(std::uint64_t nodes, double best_objective, double upper_bound)
        : Error("node budget of " + std::to_string(nodes) + " exceeded"),
          nodes_(nodes),
          best_objective_(best_objective),
          upper_bound_(upper_bound) {}

    std::uint64_t nodes() const noexcept { return nodes_; }
    /// Objective of the best partition found before the budget ran out.
    double best_objective() const noexcept { return best_objective_; }
    /// Root upper bound on the optimum.
    double upper_bound() const noexcept { return upper_bound_; }

private:
    std::uint64_t nodes_;
    double best_objective_;
    double upper_bound_;
};

inline constexpr double kObjectiveTolerance = 1e-9;
inline constexpr std::uint64_t kDefaultNodeBudget = 10'000'000;

// ─── Weights ─────────────────────────────────────────────────────────────────

inline double logit(double p) noexcept { return std::log(p / (1 - p)); }

/// Log-odds difference logit(p) - logit(theta). Positive iff p > theta.
/// `p` must already be clamped to [1e-12, 1 - 1e-12].
inline double pair_weight(double p, Cutoff theta) {
    if (!(p >= kProbabilityFloor && p <= 1 - kProbabilityFloor))
        throw DomainError("probability " + std::to_string(p) + " is outside the clamped range");
    if (p == theta.value()) return 0.0;
    const double w = std::log(p / theta.value()) + std::log1p(-theta.value()) - std::log1p(-p);
    // rounding must not flip the sign when p is within an ulp or two of theta
    if ((p > theta.value()) != (w > 0)) return p > theta.value() ? DBL_MIN : -DBL_MIN;
    return w;
}

// ─── Instances and solutions ─────────────────────────────────────────────────

/// Symmetric pair weights over an ordered entity list; the diagonal is unused.
class EditingInstance {
public:
    EditingInstance() = default;

    EditingInstance(std::vector<EntityId> entities, std::vector<double> weights)
        : entities_(std::move(entities)), w_(std::move(weights)) {
        const std::size_t n = entities_.size();
        if (w_.size() != n * n) throw ParameterError("weight matrix must be n x n");
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!std::isfinite(w_[i * n + j])) throw ParameterError("non-finite pair weight");
                if (w_[i * n + j] != w_[j * n + i]) throw ParameterError("weight matrix is not symmetric");
            }
    }

    /// Weights from a function of index pairs (called once per i < j).
    static EditingInstance from_function(std::vector<EntityId> entities,
                                         const std::function<double(std::size_t, std::size_t)>& w) {
        const std::size_t n = entities.size();
        std::vector<double> m(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) m[i * n + j] = m[j * n + i] = w(i, j);
        return EditingInstance(std::move(entities), std::move(m));
    }

    std::size_t size() const noexcept { return entities_.size(); }
    const std::vector<EntityId>& entities() const noexcept { return entities_; }
    double weight(std::size_t i, std::size_t j) const noexcept { return w_[i * entities_.size() + j]; }
    const std::vector<double>& matrix() const noexcept { return w_; }

private:
    std::vector<EntityId> entities_;
    std::vector<double> w_;
};

/// Cluster index per entity, as a restricted growth string: labels appear in
/// first-use order, so equal partitions have equal encodings.
using Assignment = std::vector<std::size_t>;

inline Assignment canonical_assignment(const Assignment& labels) {
    Assignment out(labels.size());
    std::vector<std::size_t> seen;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto it = std::find(seen.begin(), seen.end(), labels[i]);
        if (it == seen.end()) {
            out[i] = seen.size();
            seen.push_back(labels[i]);
        } else {
            out[i] = static_cast<std::size_t>(it - seen.begin());
        }
    }
    return out;
}

inline std::size_t cluster_count(const Assignment& a) {
    return a.empty() ? 0 : *std::max_element(a.begin(), a.end()) + 1;
}

/// Eq.-6 style objective: sum of weights of co-clustered pairs.
inline double partition_objective(const EditingInstance& inst, const Assignment& a) {
    double s = 0;
    for (std::size_t i = 0; i < inst.size(); ++i)
        for (std::size_t j = i + 1; j < inst.size(); ++j)
            if (a[i] == a[j]) s += inst.weight(i, j);
    return s;
}

/// Edit-cost form: deleted positive weight plus inserted negative weight,
/// i.e. sum_{w>0} w - partition_objective.
inline double editing_cost(const EditingInstance& inst, const Assignment& a) {
    double s = 0;
    for (std::size_t i = 0; i < inst.size(); ++i)
        for (std::size_t j = i + 1; j < inst.size(); ++j) {
            const double w = inst.weight(i, j);
            if (a[i] == a[j] && w < 0) s -= w;
            if (a[i] != a[j] && w > 0) s += w;
        }
    return s;
}

/// Deterministic preference among optimal partitions: higher objective (up to
/// the tolerance), then fewer clusters, then the smaller canonical encoding.
inline bool better_solution(double obj, const Assignment& a, double best_obj, const Assignment& best) {
    if (obj > best_obj + kObjectiveTolerance) return true;
    if (obj < best_obj - kObjectiveTolerance) return false;
    const std::size_t ca = cluster_count(a), cb = cluster_count(best);
    if (ca != cb) return ca < cb;
    return a < best;
}

struct EditingSolution {
    ClusterPartition partition;
    Assignment assignment;  ///< canonical, indexed like the instance's entities
    double objective = 0;
    std::uint64_t nodes = 0;
};

inline EditingSolution make_solution(const EditingInstance& inst, Assignment a, std::uint64_t nodes = 0) {
    a = canonical_assignment(a);
    std::vector<Cluster> clusters(cluster_count(a));
    for (std::size_t i = 0; i < a.size(); ++i) clusters[a[i]].push_back(inst.entities()[i]);
    const double obj = partition_objective(inst, a);
    return EditingSolution{ClusterPartition(std::move(clusters)), std::move(a), obj, nodes};
}

// ─── Brute force ─────────────────────────────────────────────────────────────

inline constexpr std::size_t kBruteForceLimit = 10;

/// Exhaustive enumeration of all set partitions (Bell(n) of them).
inline EditingSolution brute_force_oracle(const EditingInstance& inst) {
    const std::size_t n = inst.size();
    if (n == 0) throw ParameterError("empty instance");
    if (n > kBruteForceLimit) throw ParameterError("brute force is limited to 10 entities");

    Assignment a(n, 0), best(n, 0);
    double best_obj = -std::numeric_limits<double>::infinity();
    std::uint64_t visited = 0;
    // partial[i] = objective of the first i entities
    std::vector<double> partial(n + 1, 0.0);

    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t used) {
        if (i == n) {
            ++visited;
            if (better_solution(partial[n], a, best_obj, best)) {
                best_obj = partial[n];
                best = a;
            }
            return;
        }
        for (std::size_t c = 0; c <= used && c < n; ++c) {
            if (i == 0 && c > 0) break;
            a[i] = c;
            double g = 0;
            for (std::size_t j = 0; j < i; ++j)
                if (a[j] == c) g += inst.weight(i, j);
            partial[i + 1] = partial[i] + g;
            rec(i + 1, std::max(used, c + 1));
        }
    };
    rec(0, 0);
    return make_solution(inst, best, visited);
}

// ─── Branch and bound ────────────────────────────────────────────────────────

struct SolverOptions {
    std::uint64_t node_budget = kDefaultNodeBudget;
};

namespace detail {

/// Search state over super-nodes (contracted groups of original entities).
/// Forbidden super-node pairs may never share a cluster.
struct BnbState {
    std::size_t m = 0;
    std::vector<double> w;       // m x m summed weights
    std::vector<char> forbidden;  // m x m
    std::vector<std::vector<std::size_t>> members;
    double fixed = 0;  // weight already collected inside super-nodes

    double weight(std::size_t i, std::size_t j) const noexcept { return w[i * m + j]; }
    bool is_forbidden(std::size_t i, std::size_t j) const noexcept { return forbidden[i * m + j] != 0; }
    bool positive(std::size_t i, std::size_t j) const noexcept { return !is_forbidden(i, j) && weight(i, j) > 0; }
};

inline BnbState contract(const BnbState& s, std::size_t u, std::size_t v) {
    if (u > v) std::swap(u, v);
    BnbState t;
    t.m = s.m - 1;
    t.w.assign(t.m * t.m, 0.0);
    t.forbidden.assign(t.m * t.m, 0);
    t.fixed = s.fixed + s.weight(u, v);
    std::vector<std::size_t> old;  // new index -> old index (v removed, u becomes the merge)
    old.reserve(t.m);
    for (std::size_t i = 0; i < s.m; ++i)
        if (i != v) old.push_back(i);
    t.members.reserve(t.m);
    for (std::size_t i : old) t.members.push_back(s.members[i]);
    const std::size_t nu = u;  // u < v keeps its index
    t.members[nu].insert(t.members[nu].end(), s.members[v].begin(), s.members[v].end());
    for (std::size_t a = 0; a < t.m; ++a)
        for (std::size_t b = a + 1; b < t.m; ++b) {
            const std::size_t oa = old[a], ob = old[b];
            double ww = s.weight(oa, ob);
            bool f = s.is_forbidden(oa, ob);
            if (a == nu) {
                ww += s.weight(v, ob);
                f = f || s.is_forbidden(v, ob);
            } else if (b == nu) {
                ww += s.weight(oa, v);
                f = f || s.is_forbidden(oa, v);
            }
            t.w[a * t.m + b] = t.w[b * t.m + a] = ww;
            t.forbidden[a * t.m + b] = t.forbidden[b * t.m + a] = f;
        }
    return t;
}

struct BoundInfo {
    double upper = 0;          // bound on the best objective reachable from the state
    bool leaf = false;         // no conflict triple: positive pairs already form cliques
    std::size_t bu = 0, bv = 0;  // branching pair when not a leaf
};

/// Upper bound = fixed + all usable positive weight - a packing of conflict
/// triples. A conflict triple (u,v,w) has uv, vw positive and uw non-positive
/// or forbidden; every partition pays at least the smallest of the three
/// residual capacities, and capacities are shared out so the sum stays valid.
inline BoundInfo bound(const BnbState& s, std::vector<double>& cap) {
    const std::size_t m = s.m;
    const double inf = std::numeric_limits<double>::infinity();
    BoundInfo info;
    double pos = 0;
    cap.assign(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            const double c = s.is_forbidden(i, j) ? inf : std::abs(s.weight(i, j));
            cap[i * m + j] = cap[j * m + i] = c;
            if (s.positive(i, j)) pos += s.weight(i, j);
        }

    double packed = 0;
    bool conflict = false;
    double best_score = -1;
    for (std::size_t v = 0; v < m; ++v)
        for (std::size_t u = 0; u < m; ++u) {
            if (u == v || !s.positive(u, v)) continue;
            for (std::size_t x = u + 1; x < m; ++x) {
                if (x == v || !s.positive(v, x) || s.positive(u, x)) continue;
                conflict = true;
                double& c1 = cap[u * m + v];
                double& c2 = cap[v * m + x];
                double& c3 = cap[u * m + x];
                const double c = std::min({c1, c2, c3});
                // branch on the heavier positive edge of the most costly conflict
                const double score = std::min(s.weight(u, v), s.weight(v, x)) + std::min(c3, 1e300);
                if (score > best_score) {
                    best_score = score;
                    if (s.weight(u, v) >= s.weight(v, x)) {
                        info.bu = u;
                        info.bv = v;
                    } else {
                        info.bu = v;
                        info.bv = x;
                    }
                }
                if (c > 0 && c < inf) {
                    packed += c;
                    c1 -= c;
                    c2 -= c;
                    if (c3 < inf) c3 -= c;
                    cap[v * m + u] = c1;
                    cap[x * m + v] = c2;
                    cap[x * m + u] = c3;
                }
            }
        }
    info.leaf = !conflict;
    info.upper = s.fixed + pos - packed;
    return info;
}

class BranchAndBound {
public:
    BranchAndBound(const EditingInstance& inst, const SolverOptions& opts) : inst_(inst), opts_(opts) {
        const std::size_t n = inst.size();
        best_.assign(n, 0);
        std::iota(best_.begin(), best_.end(), std::size_t{0});  // all singletons
        best_obj_ = 0;
    }

    EditingSolution run() {
        const std::size_t n = inst_.size();
        BnbState root;
        root.m = n;
        root.w = inst_.matrix();
        root.forbidden.assign(n * n, 0);
        root.members.resize(n);
        for (std::size_t i = 0; i < n; ++i) root.members[i] = {i};
        std::vector<double> cap;
        const BoundInfo info = bound(root, cap);
        root_upper_ = info.upper;
        search(root, info);
        return make_solution(inst_, best_, nodes_);
    }

private:
    void leaf(const BnbState& s) {
        // positive pairs form disjoint cliques; read them off by reachability
        std::vector<std::size_t> label(s.m, SIZE_MAX);
        std::size_t k = 0;
        for (std::size_t i = 0; i < s.m; ++i) {
            if (label[i] != SIZE_MAX) continue;
            label[i] = k;
            for (std::size_t j = i + 1; j < s.m; ++j)
                if (s.positive(i, j)) label[j] = k;
            ++k;
        }

        // Cliques joined only by zero weights merge at no cost, and ties go to
        // fewer clusters, so every such coarsening is a candidate.
        std::vector<std::vector<std::size_t>> nodes(k);
        for (std::size_t i = 0; i < s.m; ++i) nodes[label[i]].push_back(i);
        std::vector<char> zero(k * k, 0);
        for (std::size_t x = 0; x < k; ++x)
            for (std::size_t y = x + 1; y < k; ++y) {
                bool ok = true;
                for (std::size_t i : nodes[x])
                    for (std::size_t j : nodes[y])
                        ok = ok && !s.is_forbidden(i, j) && std::abs(s.weight(i, j)) <= kObjectiveTolerance;
                zero[x * k + y] = zero[y * k + x] = ok;
            }

        std::vector<std::size_t> group(k);
        std::vector<std::vector<std::size_t>> groups;
        std::size_t candidates = 0;
        std::function<void(std::size_t)> rec = [&](std::size_t c) {
            if (c == k) {
                if (++candidates > 1 && ++nodes_ > opts_.node_budget)
                    throw BudgetExceededError(opts_.node_budget, best_obj_, root_upper_);
                Assignment a(inst_.size(), 0);
                for (std::size_t i = 0; i < s.m; ++i)
                    for (std::size_t e : s.members[i]) a[e] = group[label[i]];
                offer(canonical_assignment(a));
                return;
            }
            for (std::size_t g = 0; g < groups.size(); ++g) {
                bool ok = true;
                for (std::size_t x : groups[g]) ok = ok && zero[x * k + c];
                if (!ok) continue;
                groups[g].push_back(c);
                group[c] = g;
                rec(c + 1);
                groups[g].pop_back();
            }
            groups.push_back({c});
            group[c] = groups.size() - 1;
            rec(c + 1);
            groups.pop_back();
        };
        rec(0);
    }

    void offer(Assignment a) {
        const double obj = partition_objective(inst_, a);
        if (better_solution(obj, a, best_obj_, best_)) {
            best_obj_ = obj;
            best_ = std::move(a);
        }
    }

    void search(BnbState& s, const BoundInfo& info) {
        if (++nodes_ > opts_.node_budget) throw BudgetExceededError(opts_.node_budget, best_obj_, root_upper_);
        if (info.upper < best_obj_ - kObjectiveTolerance) return;
        if (info.leaf) {
            leaf(s);
            return;
        }
        const std::size_t u = info.bu, v = info.bv;

        BnbState merged = contract(s, u, v);
        std::vector<double> cap;
        const BoundInfo merged_info = bound(merged, cap);

        const std::size_t m = s.m;
        s.forbidden[u * m + v] = s.forbidden[v * m + u] = 1;
        const BoundInfo forbid_info = bound(s, cap);

        if (merged_info.upper >= forbid_info.upper) {
            search(merged, merged_info);
            if (forbid_info.upper >= best_obj_ - kObjectiveTolerance) search(s, forbid_info);
        } else {
            search(s, forbid_info);
            if (merged_info.upper >= best_obj_ - kObjectiveTolerance) search(merged, merged_info);
        }
        s.forbidden[u * m + v] = s.forbidden[v * m + u] = 0;
    }

    const EditingInstance& inst_;
    SolverOptions opts_;
    Assignment best_;
    double best_obj_ = 0;
    double root_upper_ = 0;
    std::uint64_t nodes_ = 0;
};

}  // namespace detail

/// Exact weighted cluster editing: the partition maximizing the summed weight
/// of co-clustered pairs, by branch and bound over merge/forbid decisions.
/// Throws BudgetExceededError once more than `node_budget` nodes are expanded.
inline EditingSolution solve_exact(const EditingInstance& inst, const SolverOptions& opts = {}) {
    if (inst.size() == 0) throw ParameterError("empty instance");
    return detail::BranchAndBound(inst, opts).run();
}

// ─── Kernelization ───────────────────────────────────────────────────────────

struct ForcedDecision {
    enum class Kind { merge, forbid } kind;
    std::size_t i, j;  ///< indices into the instance's entities (group representatives)
};

struct Kernel {
    EditingInstance reduced;
    /// Original entity indices behind each reduced entity.
    std::vector<std::vector<std::size_t>> groups;
    /// Weight collected inside merged groups; reduced objective + offset = original objective.
    double offset = 0;
    std::vector<ForcedDecision> decisions;
};

/// Two reduction rules, each of which keeps at least one optimal partition:
///  - merge u,v when w(u,v) > 0 and w(u,v) >= 1/2 sum_k (|w(u,k)| + |w(v,k)|):
///    of "move v to u's cluster" and "move u to v's cluster" one never loses.
///  - forbid u,v when w(u,v) < 0 and -w(u,v) >= 1/2 sum_k max(0, w(u,k) + w(v,k)):
///    of "isolate u" and "isolate v" one never loses.
/// Rules are reapplied to the reduced instance until neither fires. Forbidden
/// pairs are encoded as a weight below minus the total absolute weight, which
/// no optimal partition can afford.
inline Kernel kernelize(const EditingInstance& inst) {
    const std::size_t n = inst.size();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<std::size_t>> groups(n);
    for (std::size_t i = 0; i < n; ++i) groups[i] = {i};
    std::vector<double> w = inst.matrix();
    std::vector<char> forb(n * n, 0);
    std::size_t m = n;
    double offset = 0;
    std::vector<ForcedDecision> decisions;

    auto eff = [&](std::size_t i, std::size_t j) { return forb[i * m + j] ? -inf : w[i * m + j]; };

    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t u = 0; u < m && !changed; ++u)
            for (std::size_t v = u + 1; v < m && !changed; ++v) {
                if (forb[u * m + v]) continue;
                const double wuv = w[u * m + v];
                if (wuv > 0) {
                    double need = 0;
                    for (std::size_t k = 0; k < m && need <= 2 * wuv; ++k)
                        if (k != u && k != v) need += std::abs(eff(u, k)) + std::abs(eff(v, k));
                    if (wuv >= need / 2) {
                        decisions.push_back({ForcedDecision::Kind::merge, groups[u].front(), groups[v].front()});
                        offset += wuv;
                        // contract v into u
                        std::vector<std::size_t> old;
                        for (std::size_t i = 0; i < m; ++i)
                            if (i != v) old.push_back(i);
                        const std::size_t nm = m - 1;
                        std::vector<double> nw(nm * nm, 0.0);
                        std::vector<char> nf(nm * nm, 0);
                        for (std::size_t a = 0; a < nm; ++a)
                            for (std::size_t b = 0; b < nm; ++b) {
                                if (a == b) continue;
                                const std::size_t oa = old[a], ob = old[b];
                                double x = w[oa * m + ob];
                                char f = forb[oa * m + ob];
                                if (oa == u) {
                                    x += w[v * m + ob];
                                    f = f || forb[v * m + ob];
                                } else if (ob == u) {
                                    x += w[oa * m + v];
                                    f = f || forb[oa * m + v];
                                }
                                nw[a * nm + b] = x;
                                nf[a * nm + b] = f;
                            }
                        groups[u].insert(groups[u].end(), groups[v].begin(), groups[v].end());
                        std::sort(groups[u].begin(), groups[u].end());
                        groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(v));
                        w = std::move(nw);
                        forb = std::move(nf);
                        m = nm;
                        changed = true;
                    }
                } else if (wuv < 0) {
                    double gain = 0;
                    for (std::size_t k = 0; k < m; ++k)
                        if (k != u && k != v) gain += std::max(0.0, eff(u, k) + eff(v, k));
                    if (-wuv >= gain / 2) {
                        decisions.push_back({ForcedDecision::Kind::forbid, groups[u].front(), groups[v].front()});
                        forb[u * m + v] = forb[v * m + u] = 1;
                        changed = true;
                    }
                }
            }
    }

    double total = 0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
            if (!forb[i * m + j]) total += std::abs(w[i * m + j]);
    const double forbidden_weight = -(total + 1.0);

    std::vector<EntityId> ids;
    ids.reserve(m);
    for (const auto& g : groups) ids.push_back(inst.entities()[g.front()]);
    auto reduced = EditingInstance::from_function(std::move(ids), [&](std::size_t i, std::size_t j) {
        return forb[i * m + j] ? forbidden_weight : w[i * m + j];
    });
    return Kernel{std::move(reduced), std::move(groups), offset, std::move(decisions)};
}

/// True when no rule fired.
inline bool is_identity(const Kernel& k) { return k.decisions.empty(); }

/// Maps a solution of the reduced instance back onto the original one.
inline EditingSolution expand(const EditingInstance& original, const Kernel& k, const EditingSolution& reduced) {
    Assignment a(original.size(), 0);
    for (std::size_t r = 0; r < k.groups.size(); ++r)
        for (std::size_t e : k.groups[r]) a[e] = reduced.assignment[r];
    return make_solution(original, a, reduced.nodes);
}

/// Kernelize, solve the reduced instance exactly, expand.
inline EditingSolution solve_with_kernel(const EditingInstance& inst, const SolverOptions& opts = {}) {
    const Kernel k = kernelize(inst);
    return expand(inst, k, solve_exact(k.reduced, opts));
}

// ─── Repair ──────────────────────────────────────────────────────────────────

/// Every pair inside the component is scored (labels override the model) and
/// weighted against the cut-off, whether or not it was a candidate pair.
inline EditingInstance build_instance(const Component& comp, const PairScorer& scorer, Cutoff theta) {
    return EditingInstance::from_function(comp.entities, [&](std::size_t i, std::size_t j) {
        return pair_weight(clamp_probability(scorer(canonical_pair(comp.entities[i], comp.entities[j]))), theta);
    });
}

enum class ComponentStatus { optimal, budget_exceeded, discarded };

inline std::string to_string(ComponentStatus s) {
    switch (s) {
        case ComponentStatus::optimal: return "optimal";
        case ComponentStatus::budget_exceeded: return "budget_exceeded";
        case ComponentStatus::discarded: return "discarded";
    }
    return "unknown";
}

struct ComponentReport {
    std::size_t index = 0;  ///< position in the component list
    std::size_t size = 0;
    double objective = 0;
    double seconds = 0;
    std::uint64_t nodes = 0;
    ComponentStatus status = ComponentStatus::optimal;
    std::size_t clusters = 0;
    std::size_t links = 0;
    std::size_t labeled_duplicates_dropped = 0;
};

struct RepairOptions {
    SolverOptions solver;
    bool use_kernel = true;
    unsigned jobs = 1;
};

struct RepairResult {
    Linkset links;
    std::vector<ComponentReport> reports;
    std::vector<ClusterPartition> partitions;  ///< per component; empty for dropped ones
};

/// Solves every component independently and unions the intra-cluster links.
/// Components that exhaust the node budget are dropped with a warning.
inline RepairResult repair(const std::vector<Component>& components, const PairScorer& scorer, Cutoff theta,
                           const RepairOptions& opts = {}) {
    std::vector<ComponentReport> reports(components.size());
    std::vector<ClusterPartition> parts(components.size());
    parallel_for(components.size(), opts.jobs, [&](std::size_t i) {
        const auto start = std::chrono::steady_clock::now();
        ComponentReport& r = reports[i];
        r.index = i;
        r.size = components[i].size();
        const EditingInstance inst = build_instance(components[i], scorer, theta);
        try {
            EditingSolution s = opts.use_kernel ? solve_with_kernel(inst, opts.solver) : solve_exact(inst, opts.solver);
            r.objective = s.objective;
            r.nodes = s.nodes;
            r.clusters = s.partition.size();
            parts[i] = std::move(s.partition);
        } catch (const BudgetExceededError& e) {
            r.status = ComponentStatus::budget_exceeded;
            r.objective = e.best_objective();
            r.nodes = e.nodes();
            log_warning("component " + std::to_string(i) + " (" + std::to_string(r.size) +
                        " entities) dropped: " + e.what());
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    });

    RepairResult out;
    for (std::size_t i = 0; i < components.size(); ++i) {
        if (reports[i].status == ComponentStatus::optimal) {
            const Linkset links = intra_cluster_links(parts[i].clusters());
            reports[i].links = links.size();
            out.links.merge(links);
        }
    }
    out.reports = std::move(reports);
    out.partitions = std::move(parts);
    return out;
}

}  // namespace linkforge
