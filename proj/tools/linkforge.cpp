// linkforge: duplicate detection and transitive linkset repair from embeddings.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "linkforge/classifier.hpp"
#include "linkforge/cluster_editing.hpp"
#include "linkforge/evaluation.hpp"
#include "linkforge/graph.hpp"
#include "linkforge/io.hpp"
#include "linkforge/knn.hpp"
#include "linkforge/pipeline.hpp"
#include "linkforge/synth.hpp"

namespace fs = std::filesystem;
using namespace linkforge;

namespace {

std::vector<LabeledPair> maybe_labels(const std::string& path) {
    return path.empty() ? std::vector<LabeledPair>{} : io::read_labels(fs::path(path));
}

LrModel load_model(const std::string& path) {
    auto f = io::detail::open_in(path);
    return read_model(f);
}

/// Scores for pairs missing from a scores file: assumed distinct.
PairScorer scores_only_scorer(const PairScores& scores, double epsilon) {
    return [&scores, epsilon](const EntityPair& p) {
        auto it = scores.find(p);
        return it != scores.end() ? it->second : epsilon;
    };
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entity matching with transitivity repair by exact weighted cluster editing"};
    app.require_subcommand(1);
    unsigned jobs = default_jobs();
    app.fallthrough();
    auto* o_jobs = app.add_option("--jobs", jobs, "Worker threads (default: LINKFORGE_JOBS or 1)")->check(CLI::PositiveNumber);

    // generate
    GeneratorConfig gen;
    std::string gen_out = "benchmark";
    auto* c_gen = app.add_subcommand("generate", "Generate a semi-synthetic benchmark");
    c_gen->add_option("--n-base", gen.n_base, "Base entities")->capture_default_str();
    c_gen->add_option("--subgraphs", gen.n_subgraphs, "Subgraphs each entity is copied into")->capture_default_str();
    c_gen->add_option("--rate", gen.sample_rate, "Per-copy renaming probability")->capture_default_str();
    c_gen->add_option("--dim", gen.dim, "Embedding dimension")->capture_default_str();
    c_gen->add_option("--noise", gen.noise_sigma, "Per-duplicate Gaussian noise scale")->capture_default_str();
    c_gen->add_option("--sep", gen.cluster_sep, "Expected separation of cluster centers")->capture_default_str();
    c_gen->add_option("--seed", gen.seed, "RNG seed")->capture_default_str();
    c_gen->add_option("--out-dir", gen_out, "Output directory")->capture_default_str();

    // candidates
    std::string emb_path, out_path, labels_path, model_path, pairs_path, scores_path, report_path, truth_path;
    std::size_t k = 3;
    auto* c_cand = app.add_subcommand("candidates", "Exact kNN candidate pairs");
    c_cand->add_option("--embeddings", emb_path, "Embeddings TSV")->required();
    c_cand->add_option("--k", k, "Neighbors per entity")->capture_default_str();
    c_cand->add_option("--out", out_path, "Pairs CSV")->required();

    // label (simulated expert)
    std::size_t label_count = 100;
    std::uint64_t seed = 1;
    auto* c_label = app.add_subcommand("label", "Sample candidate pairs and label them from a truth file");
    c_label->add_option("--pairs", pairs_path, "Candidate pairs CSV")->required();
    c_label->add_option("--truth", truth_path, "Truth clusters file")->required();
    c_label->add_option("--count", label_count, "Pairs to label")->capture_default_str();
    c_label->add_option("--seed", seed, "RNG seed")->capture_default_str();
    c_label->add_option("--out", out_path, "Labels CSV")->required();

    // train
    std::string feature = "cosine";
    auto* c_train = app.add_subcommand("train", "Fit the elastic-net logistic regression");
    c_train->add_option("--embeddings", emb_path, "Embeddings TSV")->required();
    c_train->add_option("--labels", labels_path, "Labels CSV")->required();
    c_train->add_option("--feature", feature, "cosine or hadamard")
        ->check(CLI::IsMember({"cosine", "hadamard"}))
        ->capture_default_str();
    c_train->add_option("--seed", seed, "RNG seed")->capture_default_str();
    c_train->add_option("--model-out", model_path, "Model file")->required();

    // classify
    double epsilon = kDefaultEpsilon;
    auto* c_cls = app.add_subcommand("classify", "Score pairs with a trained model");
    c_cls->add_option("--model", model_path, "Model file")->required();
    c_cls->add_option("--embeddings", emb_path, "Embeddings TSV")->required();
    c_cls->add_option("--pairs", pairs_path, "Pairs CSV")->required();
    c_cls->add_option("--labels", labels_path, "Labels CSV; labeled pairs get 1-eps / eps");
    c_cls->add_option("--epsilon", epsilon, "Label override epsilon")->capture_default_str();
    c_cls->add_option("--out", out_path, "Scores CSV")->required();

    // closure
    double theta = 0.5;
    std::size_t max_component = 50;
    auto* c_clo = app.add_subcommand("closure", "Transitive-closure baseline at a cut-off");
    c_clo->add_option("--scores", scores_path, "Scores CSV")->required();
    c_clo->add_option("--labels", labels_path, "Labels CSV");
    c_clo->add_option("--theta", theta, "Cut-off in (0,1)")->required();
    c_clo->add_option("--max-component", max_component, "Largest component kept")->capture_default_str();
    c_clo->add_option("--epsilon", epsilon, "Label override epsilon")->capture_default_str();
    c_clo->add_option("--out", out_path, "Linkset CSV")->required();

    // repair
    std::uint64_t node_budget = kDefaultNodeBudget;
    std::string triples_path;
    auto* c_rep = app.add_subcommand("repair", "Repair the tentative linkset by exact cluster editing");
    c_rep->add_option("--scores", scores_path, "Scores CSV for the candidate pairs");
    c_rep->add_option("--model", model_path, "Model file (scores every intra-component pair)");
    c_rep->add_option("--embeddings", emb_path, "Embeddings TSV (with --model)");
    c_rep->add_option("--k", k, "Neighbors per entity when --scores is absent")->capture_default_str();
    c_rep->add_option("--labels", labels_path, "Labels CSV");
    c_rep->add_option("--theta", theta, "Cut-off in (0,1)")->required();
    c_rep->add_option("--max-component", max_component, "Largest component solved")->capture_default_str();
    c_rep->add_option("--node-budget", node_budget, "Branch-and-bound nodes per component")->capture_default_str();
    c_rep->add_option("--epsilon", epsilon, "Label override epsilon")->capture_default_str();
    c_rep->add_option("--out", out_path, "Linkset CSV")->required();
    c_rep->add_option("--triples", triples_path, "Also write owl:sameAs triples");
    c_rep->add_option("--report", report_path, "Per-component JSON lines");

    // sweep
    std::string bench_dir, out_dir = "sweep-out";
    auto* c_sw = app.add_subcommand("sweep", "Closure vs edited over the cut-off grid");
    c_sw->add_option("--benchmark-dir", bench_dir, "Directory with embeddings.tsv and truth.txt")->required();
    c_sw->add_option("--model", model_path, "Model file")->required();
    c_sw->add_option("--feature", feature, "Feature kind the model uses")
        ->check(CLI::IsMember({"cosine", "hadamard"}));
    c_sw->add_option("--labels", labels_path, "Labels CSV")->required();
    c_sw->add_option("--k", k, "Neighbors per entity")->capture_default_str();
    c_sw->add_option("--max-component", max_component, "Largest component kept")->capture_default_str();
    c_sw->add_option("--node-budget", node_budget, "Branch-and-bound nodes per component")->capture_default_str();
    c_sw->add_option("--epsilon", epsilon, "Label override epsilon")->capture_default_str();
    c_sw->add_option("--out-dir", out_dir, "Report directory")->capture_default_str();

    // pipeline
    std::string config_path;
    PipelineConfig pc;
    std::string p_emb, p_labels, p_truth, p_out, p_feature;
    std::optional<double> p_theta;
    std::size_t p_k = 0, p_max = 0, p_train = 0;
    double p_eps = 0;
    std::uint64_t p_seed = 0, p_budget = 0;
    bool p_sweep = false;
    auto* c_pipe = app.add_subcommand("pipeline", "Run every stage end to end");
    c_pipe->add_option("--config", config_path, "key=value config file (flags take precedence)");
    auto* o_emb = c_pipe->add_option("--embeddings", p_emb, "Embeddings TSV");
    auto* o_labels = c_pipe->add_option("--labels", p_labels, "Labels CSV");
    auto* o_truth = c_pipe->add_option("--truth", p_truth, "Truth clusters (enables evaluation)");
    auto* o_out = c_pipe->add_option("--out-dir", p_out, "Artifact directory");
    auto* o_k = c_pipe->add_option("--k", p_k, "Neighbors per entity [3]");
    auto* o_feat = c_pipe->add_option("--feature", p_feature, "cosine or hadamard [cosine]")
                       ->check(CLI::IsMember({"cosine", "hadamard"}));
    auto* o_theta = c_pipe->add_option("--theta", p_theta, "Single cut-off to repair at");
    auto* o_sweep = c_pipe->add_flag("--sweep", p_sweep, "Sweep the cut-off grid (needs --truth)");
    auto* o_max = c_pipe->add_option("--max-component", p_max, "Largest component kept [50]");
    auto* o_eps = c_pipe->add_option("--epsilon", p_eps, "Label override epsilon [1e-6]");
    auto* o_seed = c_pipe->add_option("--seed", p_seed, "Seed for label sampling and folds [1]");
    auto* o_train = c_pipe->add_option("--train-size", p_train, "Simulated labels [100 cosine / 300 hadamard]");
    auto* o_budget = c_pipe->add_option("--node-budget", p_budget, "Branch-and-bound nodes per component");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help and --version exit 0; every usage error exits 1
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    Stage stage = Stage::input;
    try {
        if (*c_gen) {
            stage = Stage::input;
            const SynthBenchmark b = generate_benchmark(gen);
            stage = Stage::output;
            io::write_benchmark(gen_out, b);
            std::cout << "entities=" << b.embeddings.size() << " clusters=" << b.truth.clusters.size()
                      << " gold_pairs=" << gold_linkset(b.truth).size() << '\n';
        } else if (*c_cand) {
            const EmbeddingTable t = io::read_embeddings(fs::path(emb_path));
            stage = Stage::candidates;
            const CandidateSet c = candidate_pairs(t, k, jobs);
            stage = Stage::output;
            io::write_pairs(fs::path(out_path), c.pairs);
        } else if (*c_label) {
            const Linkset pairs = io::read_pairs(fs::path(pairs_path));
            const GroundTruth gt = io::read_clusters(fs::path(truth_path));
            const auto labels = sample_labels(pairs, gold_linkset(gt), label_count, seed);
            stage = Stage::output;
            io::write_labels(fs::path(out_path), labels);
        } else if (*c_train) {
            const EmbeddingTable t = io::read_embeddings(fs::path(emb_path));
            const auto labels = io::read_labels(fs::path(labels_path));
            stage = Stage::train;
            TrainOptions opts;
            opts.seed = seed;
            const LrModel m = train(labels, t, FeatureSpec{parse_feature_kind(feature)}, opts);
            stage = Stage::output;
            auto f = io::detail::open_out(model_path);
            write_model(f, m);
        } else if (*c_cls) {
            const LrModel m = load_model(model_path);
            const EmbeddingTable t = io::read_embeddings(fs::path(emb_path));
            const Linkset pairs = io::read_pairs(fs::path(pairs_path));
            const auto labels = maybe_labels(labels_path);
            stage = Stage::classify;
            const PairScores s = apply_label_override(score(m, pairs, t), labels, epsilon);
            stage = Stage::output;
            io::write_scores(fs::path(out_path), s);
        } else if (*c_clo) {
            const auto labels = maybe_labels(labels_path);
            const PairScores s = apply_label_override(io::read_scores(fs::path(scores_path)), labels, epsilon);
            stage = Stage::graph;
            const Linkset tent = tentative_linkset(s, labeled_duplicates(labels), Cutoff(theta));
            const auto comps = filter_components(connected_components(tent), max_component);
            const Linkset closed = transitive_closure(comps.kept);
            stage = Stage::output;
            io::write_pairs(fs::path(out_path), closed);
        } else if (*c_rep) {
            const auto labels = maybe_labels(labels_path);
            std::optional<LrModel> model;
            std::optional<EmbeddingTable> table;
            if (!model_path.empty()) {
                if (emb_path.empty()) throw ParameterError("--model needs --embeddings");
                model = load_model(model_path);
                table = io::read_embeddings(fs::path(emb_path));
            }
            if (scores_path.empty() && !model) throw ParameterError("give --scores or --model with --embeddings");
            PairScores scores;
            if (!scores_path.empty()) {
                scores = io::read_scores(fs::path(scores_path));
            } else {
                stage = Stage::candidates;
                scores = score(*model, candidate_pairs(*table, k, jobs).pairs, *table);
            }
            stage = Stage::classify;
            scores = apply_label_override(std::move(scores), labels, epsilon);
            PairScorer scorer = model ? with_label_override(make_scorer(*model, *table), labels, epsilon)
                                      : scores_only_scorer(scores, epsilon);
            stage = Stage::graph;
            const Cutoff cut(theta);
            const auto dups = labeled_duplicates(labels);
            const auto comps = filter_components(connected_components(tentative_linkset(scores, dups, cut)),
                                                 max_component);
            stage = Stage::repair;
            RepairOptions ropts;
            ropts.solver.node_budget = node_budget;
            ropts.jobs = jobs;
            const RepairResult r = repair(comps.kept, scorer, cut, ropts);
            stage = Stage::output;
            io::write_pairs(fs::path(out_path), r.links);
            if (!triples_path.empty()) io::write_triples(fs::path(triples_path), r.links);
            if (!report_path.empty()) {
                auto f = io::detail::open_out(report_path);
                write_repair_report(f, r, comps.discarded, dups);
            }
        } else if (*c_sw) {
            const fs::path dir(bench_dir);
            const EmbeddingTable t = io::read_embeddings(dir / io::kEmbeddingsFile);
            const GroundTruth gt = io::read_clusters(dir / io::kTruthFile);
            const LrModel m = load_model(model_path);
            if (!feature.empty() && c_sw->count("--feature") && parse_feature_kind(feature) != m.spec.kind)
                throw ParameterError("--feature does not match the model's feature kind");
            const auto labels = io::read_labels(fs::path(labels_path));
            stage = Stage::candidates;
            const CandidateSet c = candidate_pairs(t, k, jobs);
            stage = Stage::classify;
            const ScoredProblem prob = prepare_problem(t, c.pairs, m, labels, gold_linkset(gt), epsilon);
            stage = Stage::evaluate;
            SweepOptions so;
            so.max_component = max_component;
            so.repair.solver.node_budget = node_budget;
            so.jobs = jobs;
            const SweepReport rep = sweep(prob, so);
            stage = Stage::output;
            emit_report(rep, out_dir);
            write_summary(std::cout, rep);
        } else if (*c_pipe) {
            io::KeyValues kv;
            if (!config_path.empty()) kv = io::read_key_values(fs::path(config_path));
            pc.apply(kv);
            if (*o_jobs || !kv.count("jobs")) pc.jobs = jobs;
            if (*o_emb) pc.embeddings = p_emb;
            if (*o_labels) pc.labels = p_labels;
            if (*o_truth) pc.truth = p_truth;
            if (*o_out) pc.out_dir = p_out;
            if (*o_k) pc.k = p_k;
            if (*o_feat) pc.feature.kind = parse_feature_kind(p_feature);
            if (*o_theta) pc.theta = p_theta;
            if (*o_sweep) pc.sweep = p_sweep;
            if (*o_max) pc.max_component = p_max;
            if (*o_eps) pc.epsilon = p_eps;
            if (*o_seed) pc.seed = p_seed;
            if (*o_train) pc.train_size = p_train;
            if (*o_budget) pc.node_budget = p_budget;
            if (!pc.theta && !pc.sweep) throw ParameterError("give --theta, --sweep, or both");
            const PipelineResult r = run_pipeline(pc);
            if (r.sweep) write_summary(std::cout, *r.sweep);
            if (r.edited) std::cout << "edited_links=" << r.edited->size() << '\n';
        }
    } catch (const StageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << stage_name(stage) << ": " << e.what() << '\n';
        return static_cast<int>(stage);
    }
    return 0;
}
