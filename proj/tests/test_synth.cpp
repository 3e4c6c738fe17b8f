#include <gtest/gtest.h>

#include <array>

#include "linkforge/knn.hpp"
#include "linkforge/synth.hpp"

using namespace linkforge;

namespace {
std::array<double, 5> size_frequencies(const GroundTruth& gt) {
    std::array<double, 5> f{};
    for (const auto& c : gt.clusters.clusters()) f[std::min<std::size_t>(c.size(), 4)] += 1;
    for (auto& x : f) x /= static_cast<double>(gt.clusters.size());
    return f;
}
}  // namespace

TEST(Generator, NoSampling) {
    GeneratorConfig cfg;
    cfg.n_base = 200;
    cfg.sample_rate = 0;
    const auto gt = generate_clusters(cfg);
    EXPECT_EQ(gt.clusters.size(), 200u);
    EXPECT_EQ(gt.clusters.universe_size(), 200u);
    EXPECT_TRUE(gold_linkset(gt).empty());
}

TEST(Generator, FullSampling) {
    GeneratorConfig cfg;
    cfg.n_base = 100;
    cfg.sample_rate = 1;
    const auto gt = generate_clusters(cfg);
    ASSERT_EQ(gt.clusters.size(), 100u);
    for (const auto& c : gt.clusters.clusters()) EXPECT_EQ(c.size(), 4u);
    EXPECT_EQ(gt.clusters.clusters()[0].front().str(), base_entity_id(0) + "/1");
}

TEST(Generator, BinomialSizeLaw) {
    GeneratorConfig cfg;
    cfg.n_base = 20000;
    cfg.sample_rate = 0.5;
    cfg.seed = 3;
    const auto f = size_frequencies(generate_clusters(cfg));
    const double expect[] = {0, 1.0 / 16, 4.0 / 16, 6.0 / 16, 5.0 / 16};
    for (int s = 1; s <= 4; ++s) EXPECT_NEAR(f[s], expect[s], 0.015) << "size " << s;
}

TEST(Generator, Deterministic) {
    GeneratorConfig cfg;
    cfg.n_base = 50;
    cfg.dim = 8;
    cfg.sample_rate = 0.3;
    const auto a = generate_benchmark(cfg), b = generate_benchmark(cfg);
    EXPECT_EQ(a.truth.clusters, b.truth.clusters);
    ASSERT_EQ(a.embeddings.ids(), b.embeddings.ids());
    for (std::size_t r = 0; r < a.embeddings.size(); ++r)
        for (std::size_t j = 0; j < cfg.dim; ++j) EXPECT_EQ(a.embeddings.row(r)[j], b.embeddings.row(r)[j]);
    cfg.seed = 2;
    EXPECT_NE(generate_benchmark(cfg).truth.clusters, a.truth.clusters);
}

TEST(Generator, ZeroNoiseGivesIdenticalMembers) {
    GeneratorConfig cfg;
    cfg.n_base = 60;
    cfg.dim = 5;
    cfg.sample_rate = 0.5;
    cfg.noise_sigma = 0;
    const auto b = generate_benchmark(cfg);
    for (const auto& c : b.truth.clusters.clusters())
        for (const auto& e : c)
            for (std::size_t j = 0; j < cfg.dim; ++j)
                EXPECT_EQ(b.embeddings.vector(e)[j], b.embeddings.vector(c.front())[j]);
}

TEST(Generator, SmallNoiseKeepsDuplicatesAdjacent) {
    GeneratorConfig cfg;
    cfg.n_base = 50;
    cfg.dim = 32;
    cfg.sample_rate = 0.5;
    cfg.noise_sigma = 0.01;
    const auto b = generate_benchmark(cfg);
    const auto nn = knn(b.embeddings, 1);
    std::map<EntityId, std::size_t> cluster_of;
    for (std::size_t i = 0; i < b.truth.clusters.size(); ++i)
        for (const auto& e : b.truth.clusters.clusters()[i]) cluster_of[e] = i;
    for (const auto& c : b.truth.clusters.clusters())
        if (c.size() > 1) {
            for (const auto& e : c) EXPECT_EQ(cluster_of[nn.at(e).front()], cluster_of[e]) << e.str();
        }
}

TEST(Generator, RejectsBadConfig) {
    GeneratorConfig cfg;
    cfg.sample_rate = 1.5;
    EXPECT_THROW(generate_clusters(cfg), ParameterError);
}

TEST(ClassRatio, Examples) {
    const EntityId a("a"), b("b");
    GroundTruth pair{ClusterPartition({{a, b}})};
    const auto r = class_ratio(pair, Linkset{canonical_pair(a, b)});
    EXPECT_DOUBLE_EQ(r.ratio_all, 1.0);
    EXPECT_DOUBLE_EQ(r.ratio_candidates, 1.0);

    GroundTruth singles{ClusterPartition({{a}, {b}})};
    EXPECT_DOUBLE_EQ(class_ratio(singles, Linkset{canonical_pair(a, b)}).ratio_all, 0.0);
    EXPECT_THROW(class_ratio(pair, Linkset{}), ParameterError);
}

TEST(ClassRatio, CandidatesAreFarLessSkewed) {
    GeneratorConfig cfg;
    cfg.n_base = 1000;
    cfg.dim = 32;
    cfg.noise_sigma = 0.07;
    const auto b = generate_benchmark(cfg);
    const auto r = class_ratio(b.truth, candidate_pairs(b.embeddings, 3).pairs);
    EXPECT_GT(r.ratio_all, 0);
    EXPECT_GE(r.ratio_candidates, 100 * r.ratio_all);
}
