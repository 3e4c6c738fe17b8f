#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "linkforge/evaluation.hpp"

using namespace linkforge;

namespace {
EntityPair pr(int a, int b) { return canonical_pair("e" + std::to_string(a), "e" + std::to_string(b)); }
}  // namespace

TEST(FBeta, Examples) {
    EXPECT_DOUBLE_EQ(f_half(1, 1), 1.0);
    EXPECT_NEAR(f_half(0.6, 0.3), 0.5, 1e-15);
    EXPECT_EQ(f_half(0, 0.7), 0.0);
    EXPECT_EQ(f_half(0, 0), 0.0);
    EXPECT_NEAR(f_beta(0.5, 1.0, 1.0), 2.0 / 3.0, 1e-15);
}

TEST(PrecisionRecall, Examples) {
    const Linkset gold{pr(1, 2), pr(1, 3), pr(2, 3), pr(4, 5), pr(6, 7), pr(8, 9)};
    auto same = precision_recall(gold, gold);
    EXPECT_EQ(same.precision, 1.0);
    EXPECT_EQ(same.recall, 1.0);
    auto empty = precision_recall(Linkset{}, gold);
    EXPECT_EQ(empty.precision, 1.0);
    EXPECT_EQ(empty.recall, 0.0);
    auto some = precision_recall(Linkset{pr(1, 2), pr(1, 3), pr(4, 5), pr(5, 6)}, gold);
    EXPECT_DOUBLE_EQ(some.precision, 0.75);
    EXPECT_DOUBLE_EQ(some.recall, 0.5);
}

TEST(ThetaGrid, Shape) {
    const auto g = default_theta_grid();
    ASSERT_EQ(g.size(), 100u);
    EXPECT_EQ(g.front(), 0.005);
    EXPECT_EQ(g[1], 0.01);
    EXPECT_EQ(g.back(), 0.99);
    EXPECT_TRUE(std::is_sorted(g.begin(), g.end()));
}

TEST(MetricsCsv, EmptyReportIsHeaderOnly) {
    std::stringstream ss;
    write_metrics_csv(ss, SweepReport{});
    EXPECT_EQ(ss.str(), std::string(kMetricsHeader) + "\n");
}

TEST(MetricsCsv, RoundTrip) {
    const Linkset gold{pr(1, 2), pr(3, 4)};
    SweepReport rep;
    rep.gold_size = gold.size();
    for (double t : {0.25, 0.75}) {
        rep.rows.push_back(make_row(t, Variant::closure, Linkset{pr(1, 2), pr(1, 3), pr(2, 3)}, gold));
        rep.rows.push_back(make_row(t, Variant::edited, Linkset{pr(1, 2)}, gold));
    }
    std::stringstream ss;
    write_metrics_csv(ss, rep);
    const auto back = read_metrics_csv(ss);
    ASSERT_EQ(back.size(), 4u);
    EXPECT_EQ(back, rep.rows);
    EXPECT_DOUBLE_EQ(back[0].relative_size, 1.5);
}

TEST(Summary, MeanAndFirstArgmax) {
    SweepReport rep;
    const Linkset gold{pr(1, 2)};
    rep.rows.push_back(make_row(0.1, Variant::edited, gold, gold));
    rep.rows.push_back(make_row(0.2, Variant::edited, Linkset{}, gold));
    rep.rows.push_back(make_row(0.3, Variant::edited, gold, gold));
    const auto s = rep.summary(Variant::edited);
    EXPECT_DOUBLE_EQ(s.mean_f_half, 2.0 / 3.0);
    EXPECT_EQ(s.max_f_half, 1.0);
    EXPECT_EQ(s.argmax_theta, 0.1);
}

TEST(Sweep, PerfectGeometry) {
    GeneratorConfig cfg;
    cfg.n_base = 300;
    cfg.dim = 16;
    cfg.sample_rate = 0.5;
    cfg.noise_sigma = 0;
    cfg.cluster_sep = 2.0;
    const auto b = generate_benchmark(cfg);
    const auto cands = candidate_pairs(b.embeddings, 3);
    const auto gold = gold_linkset(b.truth);
    const auto labels = sample_labels(cands.pairs, gold, 100, 1);
    const auto model = train(labels, b.embeddings, {FeatureKind::cosine});
    SweepOptions so;
    so.grid = {0.1, 0.5, 0.9};
    const auto rep = sweep(prepare_problem(b.embeddings, cands.pairs, model, labels, gold), so);
    EXPECT_TRUE(rep.failures.empty());
    EXPECT_EQ(rep.rows.size(), 6u);
    EXPECT_EQ(rep.summary(Variant::closure).max_f_half, 1.0);
    EXPECT_EQ(rep.summary(Variant::edited).max_f_half, 1.0);
}

TEST(SampleLabels, DeterministicAndLabeledFromGold) {
    Linkset cands, gold{pr(0, 1), pr(2, 3)};
    for (int i = 0; i < 30; ++i) cands.insert(pr(i, i + 1));
    const auto a = sample_labels(cands, gold, 10, 4);
    EXPECT_EQ(a, sample_labels(cands, gold, 10, 4));
    EXPECT_EQ(a.size(), 10u);
    for (const auto& lp : a) EXPECT_EQ(lp.label == Label::duplicate, gold.contains(lp.pair));
    EXPECT_EQ(sample_labels(cands, gold, 100, 4).size(), cands.size());
}

TEST(Report, EmitsAllFiles) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "linkforge_report_test";
    fs::remove_all(dir);
    SweepReport rep;
    const Linkset gold{pr(1, 2)};
    rep.gold_size = 1;
    rep.rows.push_back(make_row(0.5, Variant::closure, gold, gold));
    rep.rows.push_back(make_row(0.5, Variant::edited, gold, gold));
    emit_report(rep, dir);
    for (const char* f : {"metrics.csv", "fscore.svg", "precision.svg", "recall.svg", "size.svg", "summary.txt"})
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    fs::remove_all(dir);
}
