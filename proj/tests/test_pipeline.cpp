#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "linkforge/pipeline.hpp"

using namespace linkforge;
namespace fs = std::filesystem;

namespace {
fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("linkforge_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(LINKFORGE_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// solve times are wall-clock and differ between runs
std::string without_timings(const std::string& s) {
    return std::regex_replace(s, std::regex("\"seconds\":[^,}]*"), "\"seconds\":0");
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}
}  // namespace

TEST(Cli, MissingEmbeddingsIsAnInputError) {
    const auto dir = scratch("missing");
    EXPECT_EQ(run_cli("pipeline --embeddings " + (dir / "nope.tsv").string() + " --labels x.csv --theta 0.5 --out-dir " +
                      (dir / "out").string()),
              static_cast<int>(Stage::input));
}

TEST(Cli, UsageErrorsExitOne) {
    EXPECT_EQ(run_cli("candidates --k 3"), 1);
    EXPECT_EQ(run_cli("no-such-command"), 1);
}

TEST(Pipeline, IdenticalPairWithDuplicateLabel) {
    const auto dir = scratch("identical");
    io::write_embeddings(dir / "e.tsv", EmbeddingTable(3, {{EntityId("x"), {1, 2, 3}}, {EntityId("y"), {1, 2, 3}}}));
    io::write_labels(dir / "l.csv", {{canonical_pair("x", "y"), Label::duplicate}});
    for (double theta : {0.01, 0.5, 0.99}) {
        PipelineConfig cfg;
        cfg.embeddings = dir / "e.tsv";
        cfg.labels = dir / "l.csv";
        cfg.out_dir = dir / "out";
        cfg.k = 1;
        cfg.theta = theta;
        const auto res = run_pipeline(cfg);
        ASSERT_TRUE(res.edited);
        EXPECT_EQ(*res.edited, Linkset{canonical_pair("x", "y")}) << "theta " << theta;
    }
}

TEST(Pipeline, SyntheticRunEmitsEverythingAndIsReproducible) {
    const auto dir = scratch("synthetic");
    ASSERT_EQ(run_cli("generate --n-base 500 --rate 0.5 --dim 32 --noise 0.07 --seed 3 --out-dir " +
                      (dir / "bench").string()),
              0);
    const std::string common = "pipeline --embeddings " + (dir / "bench" / "embeddings.tsv").string() + " --truth " +
                               (dir / "bench" / "truth.txt").string() + " --theta 0.5 --sweep";
    ASSERT_EQ(run_cli(common + " --out-dir " + (dir / "a").string()), 0);
    ASSERT_EQ(run_cli(common + " --jobs 2 --out-dir " + (dir / "b").string()), 0);

    for (const char* f : {"candidates.csv", "labels.csv", "model.txt", "scores.csv", "tentative.csv", "closure.csv",
                          "edited.csv", "edited.nt", "repair_report.jsonl", "metrics_theta.csv", "metrics.csv",
                          "fscore.svg", "precision.svg", "recall.svg", "size.svg", "summary.txt",
                          "pipeline_config.txt"}) {
        EXPECT_TRUE(fs::exists(dir / "a" / f)) << f;
        if (std::string(f) != "pipeline_config.txt" && std::string(f) != "repair_report.jsonl") {
            EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
        }
    }
    EXPECT_EQ(without_timings(slurp(dir / "a" / "repair_report.jsonl")),
              without_timings(slurp(dir / "b" / "repair_report.jsonl")));
    const auto edited = io::read_pairs(dir / "a" / "edited.csv");
    EXPECT_FALSE(edited.empty());
    EXPECT_TRUE(is_transitively_closed(edited));
    EXPECT_EQ([&] { std::ifstream f(dir / "a" / "metrics.csv"); return read_metrics_csv(f); }().size(), 200u);
}

TEST(Cli, StagewiseCommandsAgreeWithPipeline) {
    const auto dir = scratch("stages");
    ASSERT_EQ(run_cli("generate --n-base 200 --rate 0.5 --dim 32 --noise 0.07 --out-dir " + (dir / "bench").string()), 0);
    const std::string emb = (dir / "bench" / "embeddings.tsv").string();
    ASSERT_EQ(run_cli("candidates --embeddings " + emb + " --k 3 --out " + (dir / "c.csv").string()), 0);
    ASSERT_EQ(run_cli("label --pairs " + (dir / "c.csv").string() + " --truth " + (dir / "bench" / "truth.txt").string() +
                      " --count 100 --out " + (dir / "l.csv").string()),
              0);
    ASSERT_EQ(run_cli("train --embeddings " + emb + " --labels " + (dir / "l.csv").string() + " --model-out " +
                      (dir / "m.txt").string()),
              0);
    ASSERT_EQ(run_cli("classify --model " + (dir / "m.txt").string() + " --embeddings " + emb + " --pairs " +
                      (dir / "c.csv").string() + " --labels " + (dir / "l.csv").string() + " --out " +
                      (dir / "s.csv").string()),
              0);
    ASSERT_EQ(run_cli("closure --scores " + (dir / "s.csv").string() + " --labels " + (dir / "l.csv").string() +
                      " --theta 0.5 --out " + (dir / "closure.csv").string()),
              0);
    ASSERT_EQ(run_cli("repair --model " + (dir / "m.txt").string() + " --embeddings " + emb + " --scores " +
                      (dir / "s.csv").string() + " --labels " + (dir / "l.csv").string() + " --theta 0.5 --out " +
                      (dir / "edited.csv").string()),
              0);
    ASSERT_EQ(run_cli("pipeline --embeddings " + emb + " --labels " + (dir / "l.csv").string() +
                      " --theta 0.5 --out-dir " + (dir / "p").string()),
              0);
    EXPECT_EQ(slurp(dir / "closure.csv"), slurp(dir / "p" / "closure.csv"));
    EXPECT_EQ(slurp(dir / "edited.csv"), slurp(dir / "p" / "edited.csv"));
    EXPECT_EQ(slurp(dir / "s.csv"), slurp(dir / "p" / "scores.csv"));
}

TEST(Pipeline, ConfigRejectsUnknownKeys) {
    PipelineConfig cfg;
    EXPECT_THROW(cfg.apply({{"colour", "red"}}), ParameterError);
    cfg.apply({{"k", "5"}, {"theta", "0.3"}});
    EXPECT_EQ(cfg.k, 5u);
    EXPECT_EQ(cfg.theta, 0.3);
}
