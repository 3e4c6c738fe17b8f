#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "classifier.hpp"
#include "cluster_editing.hpp"
#include "core.hpp"
#include "evaluation.hpp"
#include "graph.hpp"
#include "io.hpp"
#include "knn.hpp"

namespace linkforge {

enum class Stage { input = 2, candidates, train, classify, graph, repair, evaluate, output };

inline const char* stage_name(Stage s) {
    switch (s) {
        case Stage::input: return "input";
        case Stage::candidates: return "candidates";
        case Stage::train: return "train";
        case Stage::classify: return "classify";
        case Stage::graph: return "graph";
        case Stage::repair: return "repair";
        case Stage::evaluate: return "evaluate";
        case Stage::output: return "output";
    }
    return "unknown";
}

/// A failure attributed to one pipeline stage; the stage doubles as exit code.
class StageError : public Error {
public:
    StageError(Stage stage, const std::string& msg)
        : Error(std::string(stage_name(stage)) + ": " + msg), stage_(stage) {}
    Stage stage() const noexcept { return stage_; }
    int exit_code() const noexcept { return static_cast<int>(stage_); }

private:
    Stage stage_;
};

template <class F>
auto run_stage(Stage stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

inline std::size_t default_train_size(FeatureSpec spec) { return spec.kind == FeatureKind::cosine ? 100 : 300; }

struct PipelineConfig {
    std::filesystem::path embeddings;
    std::filesystem::path labels;  ///< optional when a truth file is given
    std::filesystem::path truth;   ///< optional; enables evaluation
    std::filesystem::path out_dir = "linkforge-out";
    std::size_t k = 3;
    FeatureSpec feature;
    std::optional<double> theta;
    bool sweep = false;
    std::size_t max_component = 50;
    double epsilon = kDefaultEpsilon;
    std::uint64_t seed = 1;
    std::size_t train_size = 0;  ///< labels sampled from the truth; 0 = 100 (cosine) / 300 (hadamard)
    std::uint64_t node_budget = kDefaultNodeBudget;
    unsigned jobs = 1;

    /// Applies keys present in `kv`; unknown keys are rejected.
    void apply(const io::KeyValues& kv) {
        for (const auto& [key, v] : kv) {
            if (key == "embeddings") embeddings = v;
            else if (key == "labels") labels = v;
            else if (key == "truth") truth = v;
            else if (key == "out_dir") out_dir = v;
            else if (key == "k") k = std::stoul(v);
            else if (key == "feature") feature.kind = parse_feature_kind(v);
            else if (key == "theta") theta = std::stod(v);
            else if (key == "sweep") sweep = v == "1" || v == "true";
            else if (key == "max_component") max_component = std::stoul(v);
            else if (key == "epsilon") epsilon = std::stod(v);
            else if (key == "seed") seed = std::stoull(v);
            else if (key == "train_size") train_size = std::stoul(v);
            else if (key == "node_budget") node_budget = std::stoull(v);
            else if (key == "jobs") jobs = static_cast<unsigned>(std::stoul(v));
            else throw ParameterError("unknown config key: " + key);
        }
    }

    io::KeyValues to_key_values() const {
        io::KeyValues kv{{"embeddings", embeddings.string()},
                         {"labels", labels.string()},
                         {"truth", truth.string()},
                         {"out_dir", out_dir.string()},
                         {"k", std::to_string(k)},
                         {"feature", to_string(feature.kind)},
                         {"sweep", sweep ? "1" : "0"},
                         {"max_component", std::to_string(max_component)},
                         {"epsilon", io::format_double(epsilon)},
                         {"seed", std::to_string(seed)},
                         {"train_size", std::to_string(train_size ? train_size : default_train_size(feature))},
                         {"node_budget", std::to_string(node_budget)},
                         {"jobs", std::to_string(jobs)}};
        if (theta) kv["theta"] = io::format_double(*theta);
        return kv;
    }
};

/// One JSON object per component: index, size, objective, seconds, nodes, status, ...
inline void write_repair_report(std::ostream& os, const RepairResult& res, const std::vector<Component>& discarded,
                                const std::vector<EntityPair>& labeled_dups) {
    for (const auto& r : res.reports) {
        nlohmann::ordered_json j;
        j["index"] = r.index;
        j["size"] = r.size;
        j["objective"] = r.objective;
        j["seconds"] = r.seconds;
        j["nodes"] = r.nodes;
        j["status"] = to_string(r.status);
        j["clusters"] = r.clusters;
        j["links"] = r.links;
        os << j.dump() << '\n';
    }
    for (std::size_t i = 0; i < discarded.size(); ++i) {
        const auto& c = discarded[i];
        const std::set<EntityId> members(c.entities.begin(), c.entities.end());
        std::size_t dropped = 0;
        for (const auto& p : labeled_dups)
            if (members.count(p.a())) ++dropped;
        nlohmann::ordered_json j;
        j["index"] = res.reports.size() + i;
        j["size"] = c.size();
        j["status"] = to_string(ComponentStatus::discarded);
        j["labeled_duplicates_dropped"] = dropped;
        os << j.dump() << '\n';
    }
}

/// Constant model at the clamped share of duplicates among the labels.
inline LrModel prior_model(const std::vector<LabeledPair>& labeled, const EmbeddingTable& table, FeatureSpec spec,
                           double epsilon) {
    if (labeled.empty()) throw TrainingError("no labeled pairs");
    const auto dups = std::count_if(labeled.begin(), labeled.end(),
                                    [](const LabeledPair& lp) { return lp.label == Label::duplicate; });
    const double prior =
        std::clamp(static_cast<double>(dups) / static_cast<double>(labeled.size()), epsilon, 1 - epsilon);
    LrModel m;
    m.spec = spec;
    m.dim = table.dim();
    m.weights.assign(spec.size(table.dim()), 0.0);
    m.intercept = std::log(prior / (1 - prior));
    return m;
}

struct PipelineResult {
    std::vector<std::filesystem::path> artifacts;
    std::optional<SweepReport> sweep;
    std::optional<Linkset> edited;
};

/// candidates -> train -> score -> override -> tentative -> components -> cap ->
/// {closure, repair} -> evaluate. Every intermediate artifact lands in out_dir.
inline PipelineResult run_pipeline(const PipelineConfig& cfg) {
    namespace fs = std::filesystem;
    PipelineResult out;
    const fs::path dir = cfg.out_dir;
    auto artifact = [&](const char* name) {
        out.artifacts.push_back(dir / name);
        return dir / name;
    };

    const EmbeddingTable table = run_stage(Stage::input, [&] {
        if (cfg.embeddings.empty()) throw ParameterError("no embeddings file given");
        auto t = io::read_embeddings(cfg.embeddings);
        if (t.size() < 2) throw ParameterError("at least 2 entities are required");
        return t;
    });
    const std::optional<GroundTruth> truth = run_stage(Stage::input, [&]() -> std::optional<GroundTruth> {
        if (cfg.truth.empty()) return std::nullopt;
        return io::read_clusters(cfg.truth);
    });
    std::vector<LabeledPair> labeled = run_stage(Stage::input, [&] {
        return cfg.labels.empty() ? std::vector<LabeledPair>{} : io::read_labels(cfg.labels);
    });
    const Linkset gold = truth ? gold_linkset(*truth) : Linkset{};

    run_stage(Stage::output, [&] { fs::create_directories(dir); });

    const CandidateSet cands = run_stage(Stage::candidates, [&] {
        const std::size_t k = std::min(cfg.k, table.size() - 1);
        auto c = candidate_pairs(table, k, cfg.jobs);
        io::write_pairs(artifact("candidates.csv"), c.pairs);
        return c;
    });

    const LrModel model = run_stage(Stage::train, [&] {
        if (labeled.empty()) {
            if (!truth) throw ParameterError("no labels file and no truth file to simulate labels from");
            const std::size_t n = cfg.train_size ? cfg.train_size : default_train_size(cfg.feature);
            labeled = sample_labels(cands.pairs, gold, n, cfg.seed);
            io::write_labels(artifact("labels.csv"), labeled);
        }
        for (const auto& lp : labeled)
            if (!table.contains(lp.pair.a()) || !table.contains(lp.pair.b()))
                throw LookupError(lp.pair.a().str() + "," + lp.pair.b().str());
        TrainOptions topts;
        topts.seed = cfg.seed;
        const auto dups = static_cast<std::size_t>(std::count_if(
            labeled.begin(), labeled.end(), [](const LabeledPair& lp) { return lp.label == Label::duplicate; }));
        LrModel m;
        if (dups == 0 || dups == labeled.size()) {
            log_warning("labels contain a single class; scoring falls back to the label prior");
            m = prior_model(labeled, table, cfg.feature, cfg.epsilon);
        } else {
            m = train(labeled, table, cfg.feature, topts);
        }
        auto f = io::detail::open_out(artifact("model.txt"));
        write_model(f, m);
        return m;
    });

    const ScoredProblem prob = run_stage(Stage::classify, [&] {
        auto p = prepare_problem(table, cands.pairs, model, labeled, gold, cfg.epsilon);
        io::write_scores(artifact("scores.csv"), p.candidate_scores);
        return p;
    });

    RepairOptions ropts;
    ropts.solver.node_budget = cfg.node_budget;
    ropts.jobs = cfg.jobs;

    if (cfg.theta) {
        const Cutoff theta = run_stage(Stage::graph, [&] { return Cutoff(*cfg.theta); });
        const FilteredComponents comps = run_stage(Stage::graph, [&] {
            const Linkset tentative = tentative_linkset(prob.candidate_scores, prob.labeled_dups, theta);
            io::write_pairs(artifact("tentative.csv"), tentative);
            auto fc = filter_components(connected_components(tentative), cfg.max_component);
            io::write_pairs(artifact("closure.csv"), transitive_closure(fc.kept));
            return fc;
        });
        const RepairResult rep = run_stage(Stage::repair, [&] {
            auto r = repair(comps.kept, prob.scorer, theta, ropts);
            io::write_pairs(artifact("edited.csv"), r.links);
            io::write_triples(artifact("edited.nt"), r.links);
            auto f = io::detail::open_out(artifact("repair_report.jsonl"));
            write_repair_report(f, r, comps.discarded, prob.labeled_dups);
            return r;
        });
        out.edited = rep.links;
        if (truth) {
            run_stage(Stage::evaluate, [&] {
                SweepReport single;
                single.gold_size = gold.size();
                single.rows.push_back(make_row(*cfg.theta, Variant::closure, transitive_closure(comps.kept), gold));
                single.rows.push_back(make_row(*cfg.theta, Variant::edited, rep.links, gold));
                auto f = io::detail::open_out(artifact("metrics_theta.csv"));
                write_metrics_csv(f, single);
            });
        }
    }

    if (cfg.sweep) {
        if (!truth) throw StageError(Stage::evaluate, "a sweep needs a truth file");
        out.sweep = run_stage(Stage::evaluate, [&] {
            SweepOptions sopts;
            sopts.max_component = cfg.max_component;
            sopts.repair = ropts;
            sopts.jobs = cfg.jobs;
            return sweep(prob, sopts);
        });
        run_stage(Stage::output, [&] {
            emit_report(*out.sweep, dir);
            for (const char* f : {"metrics.csv", "fscore.svg", "precision.svg", "recall.svg", "size.svg", "summary.txt"})
                out.artifacts.push_back(dir / f);
        });
    }

    run_stage(Stage::output, [&] {
        io::KeyValues echo = cfg.to_key_values();
        out.artifacts.push_back(dir / "pipeline_config.txt");
        std::string list;
        for (const auto& a : out.artifacts) list += (list.empty() ? "" : " ") + a.filename().string();
        echo["artifacts"] = list;
        io::write_key_values(dir / "pipeline_config.txt", echo);
    });
    return out;
}

}  // namespace linkforge
