#pragma once

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"
#include "util.hpp"

namespace linkforge {

struct GeneratorConfig {
    std::size_t n_base = 1000;
    std::size_t n_subgraphs = 4;
    double sample_rate = 0.10;  ///< per-entity, per-subgraph renaming probability
    std::size_t dim = 100;
    double noise_sigma = 0.1;
    double cluster_sep = 1.0;
    std::uint64_t seed = 1;

    void validate() const {
        if (!(sample_rate >= 0.0 && sample_rate <= 1.0)) throw ParameterError("sample rate must be in [0,1]");
        if (n_subgraphs < 2) throw ParameterError("need at least 2 subgraphs");
        if (!(noise_sigma >= 0.0)) throw ParameterError("noise sigma must be non-negative");
        if (!(cluster_sep >= 0.0)) throw ParameterError("cluster separation must be non-negative");
        if (dim == 0) throw ParameterError("dimension must be positive");
    }
};

struct SynthBenchmark {
    EmbeddingTable embeddings;
    GroundTruth truth;
    GeneratorConfig config;
};

inline std::string base_entity_id(std::size_t i) {
    std::ostringstream os;
    os << "ent" << std::setw(6) << std::setfill('0') << i;
    return os.str();
}

/// Duplicate injection: every base entity exists once per subgraph under the same
/// id; each copy is independently renamed to "<id>/<subgraph>" (1-based) with
/// probability q. A base entity's cluster is the set of distinct ids produced.
inline GroundTruth generate_clusters(const GeneratorConfig& cfg) {
    cfg.validate();
    Rng rng(substream_seed(cfg.seed, "generation/clusters"));
    std::vector<Cluster> clusters;
    clusters.reserve(cfg.n_base);
    for (std::size_t i = 0; i < cfg.n_base; ++i) {
        const std::string base = base_entity_id(i);
        Cluster c;
        bool original_kept = false;
        for (std::size_t s = 1; s <= cfg.n_subgraphs; ++s) {
            if (uniform01(rng) < cfg.sample_rate)
                c.emplace_back(base + "/" + std::to_string(s));
            else
                original_kept = true;
        }
        if (original_kept) c.emplace_back(base);
        clusters.push_back(std::move(c));
    }
    return GroundTruth{ClusterPartition(std::move(clusters))};
}

/// Side length of the centered hypercube whose uniform points have an expected
/// pairwise Euclidean distance of at least `sep` in `dim` dimensions.
/// E|X-Y| ~ L sqrt(d/6) (1 - 7/(40 d)); the 0.2/d factor dominates that gap.
inline double center_cube_side(double sep, std::size_t dim) {
    const double d = static_cast<double>(dim);
    return sep * std::sqrt(6.0 / d) / (1.0 - 0.2 / d);
}

/// One center per cluster, uniform in a centered hypercube sized by
/// `cluster_sep`; members are center + N(0, noise_sigma^2) per component.
inline EmbeddingTable generate_embeddings(const GroundTruth& truth, const GeneratorConfig& cfg) {
    cfg.validate();
    Rng rng(substream_seed(cfg.seed, "generation/embeddings"));
    std::normal_distribution<double> noise(0.0, 1.0);
    const double side = center_cube_side(cfg.cluster_sep, cfg.dim);

    std::vector<std::pair<EntityId, std::vector<double>>> rows;
    rows.reserve(truth.clusters.universe_size());
    std::vector<double> center(cfg.dim);
    for (const auto& c : truth.clusters.clusters()) {
        for (auto& x : center) x = (uniform01(rng) - 0.5) * side;
        for (const auto& id : c) {
            std::vector<double> v(center);
            if (cfg.noise_sigma > 0)
                for (auto& x : v) x += cfg.noise_sigma * noise(rng);
            rows.emplace_back(id, std::move(v));
        }
    }
    return EmbeddingTable(cfg.dim, std::move(rows));
}

inline SynthBenchmark generate_benchmark(const GeneratorConfig& cfg) {
    GroundTruth truth = generate_clusters(cfg);
    EmbeddingTable table = generate_embeddings(truth, cfg);
    return SynthBenchmark{std::move(table), std::move(truth), cfg};
}

struct ClassRatio {
    double ratio_all;
    double ratio_candidates;
};

/// Share of duplicate pairs among all pairs and among the candidate pairs.
inline ClassRatio class_ratio(const GroundTruth& truth, const Linkset& candidates) {
    if (candidates.empty()) throw ParameterError("class ratio is undefined for an empty candidate set");
    const Linkset gold = gold_linkset(truth);
    const double n = static_cast<double>(truth.clusters.universe_size());
    const double all_pairs = n * (n - 1) / 2;
    return ClassRatio{
        all_pairs > 0 ? static_cast<double>(gold.size()) / all_pairs : 0.0,
        static_cast<double>(intersection_size(gold, candidates)) / static_cast<double>(candidates.size())};
}

}  // namespace linkforge
