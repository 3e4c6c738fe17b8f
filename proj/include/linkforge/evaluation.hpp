#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "classifier.hpp"
#include "cluster_editing.hpp"
#include "core.hpp"
#include "graph.hpp"
#include "knn.hpp"
#include "synth.hpp"
#include "util.hpp"

namespace linkforge {

class IoError : public Error {
public:
    using Error::Error;
};

// ─── Metrics ─────────────────────────────────────────────────────────────────

struct PrecisionRecall {
    double precision;
    double recall;
};

/// Empty prediction has precision 1; empty gold has recall 1.
inline PrecisionRecall precision_recall(const Linkset& pred, const Linkset& gold) {
    const double hit = static_cast<double>(intersection_size(pred, gold));
    return {pred.empty() ? 1.0 : hit / static_cast<double>(pred.size()),
            gold.empty() ? 1.0 : hit / static_cast<double>(gold.size())};
}

inline double f_beta(double precision, double recall, double beta) {
    const double b2 = beta * beta;
    const double denom = b2 * precision + recall;
    if (denom == 0) return 0.0;
    return (1 + b2) * precision * recall / denom;
}

inline double f_half(double precision, double recall) { return f_beta(precision, recall, 0.5); }

// ─── Sweep ───────────────────────────────────────────────────────────────────

enum class Variant { closure, edited };

inline std::string to_string(Variant v) { return v == Variant::closure ? "closure" : "edited"; }

inline Variant parse_variant(const std::string& s) {
    if (s == "closure") return Variant::closure;
    if (s == "edited") return Variant::edited;
    throw ParameterError("unknown variant: " + s);
}

struct MetricRow {
    double theta = 0;
    Variant variant = Variant::closure;
    double precision = 0;
    double recall = 0;
    double f_half = 0;
    std::size_t linkset_size = 0;
    double relative_size = 0;  ///< linkset size / gold size

    friend bool operator==(const MetricRow&, const MetricRow&) = default;
};

struct SweepFailure {
    double theta;
    std::string message;
};

struct VariantSummary {
    double mean_f_half = 0;
    double max_f_half = 0;
    double argmax_theta = 0;
};

struct SweepReport {
    std::vector<MetricRow> rows;  ///< ordered by theta, closure before edited
    std::vector<SweepFailure> failures;
    std::size_t gold_size = 0;

    std::vector<MetricRow> rows_for(Variant v) const {
        std::vector<MetricRow> out;
        for (const auto& r : rows)
            if (r.variant == v) out.push_back(r);
        return out;
    }

    /// Mean over grid points with equal weight; max with the first maximizing theta.
    VariantSummary summary(Variant v) const {
        VariantSummary s;
        std::size_t n = 0;
        bool first = true;
        for (const auto& r : rows) {
            if (r.variant != v) continue;
            s.mean_f_half += r.f_half;
            ++n;
            if (first || r.f_half > s.max_f_half) {
                s.max_f_half = r.f_half;
                s.argmax_theta = r.theta;
                first = false;
            }
        }
        if (n) s.mean_f_half /= static_cast<double>(n);
        return s;
    }
};

/// 0.005 followed by 0.01, 0.02, ..., 0.99: one hundred cut-offs in (0, 1).
inline std::vector<double> default_theta_grid() {
    std::vector<double> g{0.005};
    for (int i = 1; i <= 99; ++i) g.push_back(i / 100.0);
    return g;
}

inline MetricRow make_row(double theta, Variant v, const Linkset& pred, const Linkset& gold) {
    const auto pr = precision_recall(pred, gold);
    MetricRow r;
    r.theta = theta;
    r.variant = v;
    r.precision = pr.precision;
    r.recall = pr.recall;
    r.f_half = f_half(pr.precision, pr.recall);
    r.linkset_size = pred.size();
    r.relative_size = gold.empty() ? 0.0 : static_cast<double>(pred.size()) / static_cast<double>(gold.size());
    return r;
}

/// Everything a sweep needs once the candidates have been scored.
struct ScoredProblem {
    PairScores candidate_scores;          ///< labels already applied
    std::vector<EntityPair> labeled_dups;  ///< always part of the tentative linkset
    PairScorer scorer;                     ///< any pair, labels applied
    Linkset gold;
};

struct SweepOptions {
    std::vector<double> grid = default_theta_grid();
    std::size_t max_component = 50;
    RepairOptions repair;
    unsigned jobs = 1;  ///< parallelism over theta values
};

struct ThetaResult {
    Linkset closure;
    Linkset edited;
    RepairResult repair;
    FilteredComponents components;
};

/// One cut-off: tentative links, components, cap, then both repairs.
inline ThetaResult evaluate_theta(const ScoredProblem& prob, Cutoff theta, std::size_t max_component,
                                  const RepairOptions& opts) {
    ThetaResult out;
    const Linkset tentative = tentative_linkset(prob.candidate_scores, prob.labeled_dups, theta);
    out.components = filter_components(connected_components(tentative), max_component);
    out.closure = transitive_closure(out.components.kept);
    out.repair = repair(out.components.kept, prob.scorer, theta, opts);
    out.edited = out.repair.links;
    return out;
}

inline SweepReport sweep(const ScoredProblem& prob, const SweepOptions& opts) {
    std::vector<std::vector<MetricRow>> rows(opts.grid.size());
    std::vector<std::string> errors(opts.grid.size());
    RepairOptions inner = opts.repair;
    if (opts.jobs > 1) inner.jobs = 1;
    parallel_for(opts.grid.size(), opts.jobs, [&](std::size_t i) {
        const double t = opts.grid[i];
        try {
            const ThetaResult r = evaluate_theta(prob, Cutoff(t), opts.max_component, inner);
            rows[i].push_back(make_row(t, Variant::closure, r.closure, prob.gold));
            rows[i].push_back(make_row(t, Variant::edited, r.edited, prob.gold));
        } catch (const std::exception& e) {
            errors[i] = e.what();
            if (errors[i].empty()) errors[i] = "unknown failure";
        }
    });
    SweepReport rep;
    rep.gold_size = prob.gold.size();
    for (std::size_t i = 0; i < opts.grid.size(); ++i) {
        if (!errors[i].empty()) rep.failures.push_back({opts.grid[i], errors[i]});
        rep.rows.insert(rep.rows.end(), rows[i].begin(), rows[i].end());
    }
    return rep;
}

/// Candidates, scoring and label override for a benchmark with a trained model.
inline ScoredProblem prepare_problem(const EmbeddingTable& table, const Linkset& candidates, const LrModel& model,
                                     const std::vector<LabeledPair>& labeled, const Linkset& gold,
                                     double epsilon = kDefaultEpsilon) {
    ScoredProblem prob;
    PairScorer base = make_scorer(model, table);
    prob.candidate_scores = apply_label_override(score(base, candidates), labeled, epsilon);
    prob.labeled_dups = labeled_duplicates(labeled);
    prob.scorer = with_label_override(std::move(base), labeled, epsilon);
    prob.gold = gold;
    return prob;
}

inline SweepReport sweep(const SynthBenchmark& bench, const LrModel& model, const std::vector<LabeledPair>& labeled,
                         std::size_t k, const SweepOptions& opts, double epsilon = kDefaultEpsilon) {
    const CandidateSet cands = candidate_pairs(bench.embeddings, k, opts.jobs);
    return sweep(prepare_problem(bench.embeddings, cands.pairs, model, labeled, gold_linkset(bench.truth), epsilon),
                 opts);
}

// ─── Labels for synthetic runs ───────────────────────────────────────────────

/// Uniform sample (without replacement) of candidate pairs, labeled from the truth.
inline std::vector<LabeledPair> sample_labels(const Linkset& candidates, const Linkset& gold, std::size_t count,
                                              std::uint64_t seed) {
    std::vector<EntityPair> pool(candidates.begin(), candidates.end());
    Rng rng(substream_seed(seed, "sampling/labels"));
    count = std::min(count, pool.size());
    for (std::size_t i = 0; i < count; ++i) std::swap(pool[i], pool[i + uniform_index(rng, pool.size() - i)]);
    std::vector<LabeledPair> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        out.push_back({pool[i], gold.contains(pool[i]) ? Label::duplicate : Label::distinct});
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.pair < y.pair; });
    return out;
}

// ─── Report files ────────────────────────────────────────────────────────────

inline constexpr const char* kMetricsHeader = "theta,variant,precision,recall,f_half,linkset_size,relative_size";

inline void write_metrics_csv(std::ostream& os, const SweepReport& rep) {
    os << kMetricsHeader << '\n' << std::setprecision(17);
    for (const auto& r : rep.rows)
        os << r.theta << ',' << to_string(r.variant) << ',' << r.precision << ',' << r.recall << ',' << r.f_half << ','
           << r.linkset_size << ',' << r.relative_size << '\n';
}

inline std::vector<MetricRow> read_metrics_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kMetricsHeader) throw IoError("metrics CSV has an unexpected header");
    std::vector<MetricRow> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        if (f.size() != 7) throw IoError("malformed metrics row: " + line);
        MetricRow r;
        r.theta = std::stod(f[0]);
        r.variant = parse_variant(f[1]);
        r.precision = std::stod(f[2]);
        r.recall = std::stod(f[3]);
        r.f_half = std::stod(f[4]);
        r.linkset_size = std::stoul(f[5]);
        r.relative_size = std::stod(f[6]);
        out.push_back(r);
    }
    return out;
}

/// Static line chart of one metric against theta, one series per variant.
inline std::string render_svg_chart(const SweepReport& rep, const std::string& title,
                                    double (*metric)(const MetricRow&)) {
    constexpr double width = 640, height = 400, left = 60, right = 20, top = 40, bottom = 50;
    const double pw = width - left - right, ph = height - top - bottom;
    double ymax = 1.0;
    for (const auto& r : rep.rows) ymax = std::max(ymax, metric(r));
    auto sx = [&](double t) { return left + t * pw; };
    auto sy = [&](double v) { return top + ph - v / ymax * ph; };

    std::ostringstream os;
    os << std::fixed << std::setprecision(2);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"16\">"
       << title << "</text>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
       << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 10; ++i) {
        const double t = i / 10.0;
        os << "<text x=\"" << sx(t) << "\" y=\"" << top + ph + 18
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << std::setprecision(1) << t
           << std::setprecision(2) << "</text>\n";
        const double v = ymax * t;
        os << "<text x=\"" << left - 6 << "\" y=\"" << sy(v) + 4
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << v << "</text>\n";
    }
    os << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 10
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">theta</text>\n";
    const struct {
        Variant v;
        const char* color;
    } series[] = {{Variant::closure, "#d62728"}, {Variant::edited, "#1f77b4"}};
    for (const auto& s : series) {
        os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (const auto& r : rep.rows) {
            if (r.variant != s.v) continue;
            os << (first ? "" : " ") << sx(r.theta) << ',' << sy(metric(r));
            first = false;
        }
        os << "\"/>\n";
    }
    os << "<text x=\"" << left + pw - 80 << "\" y=\"" << top + 14
       << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#d62728\">closure</text>\n";
    os << "<text x=\"" << left + pw - 80 << "\" y=\"" << top + 30
       << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#1f77b4\">edited</text>\n";
    os << "</svg>\n";
    return os.str();
}

inline void write_summary(std::ostream& os, const SweepReport& rep) {
    os << std::setprecision(6);
    for (Variant v : {Variant::closure, Variant::edited}) {
        const VariantSummary s = rep.summary(v);
        os << to_string(v) << ".mean_f_half=" << s.mean_f_half << '\n';
        os << to_string(v) << ".max_f_half=" << s.max_f_half << '\n';
        os << to_string(v) << ".argmax_theta=" << s.argmax_theta << '\n';
    }
    os << "gold_size=" << rep.gold_size << '\n';
    os << "failed_thetas=" << rep.failures.size() << '\n';
    for (const auto& f : rep.failures) os << "failure theta=" << f.theta << ": " << f.message << '\n';
}

/// Writes metrics.csv, fscore.svg, precision.svg, recall.svg, size.svg and summary.txt.
inline void emit_report(const SweepReport& rep, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    auto open = [&](const char* name) {
        std::ofstream f(out_dir / name);
        if (!f) throw IoError("cannot write " + (out_dir / name).string());
        return f;
    };
    {
        auto f = open("metrics.csv");
        write_metrics_csv(f, rep);
    }
    const struct {
        const char* file;
        const char* title;
        double (*metric)(const MetricRow&);
    } charts[] = {
        {"fscore.svg", "F0.5 vs theta", [](const MetricRow& r) { return r.f_half; }},
        {"precision.svg", "Precision vs theta", [](const MetricRow& r) { return r.precision; }},
        {"recall.svg", "Recall vs theta", [](const MetricRow& r) { return r.recall; }},
        {"size.svg", "Relative linkset size vs theta", [](const MetricRow& r) { return r.relative_size; }},
    };
    for (const auto& c : charts) {
        auto f = open(c.file);
        f << render_svg_chart(rep, c.title, c.metric);
    }
    auto f = open("summary.txt");
    write_summary(f, rep);
    if (!f) throw IoError("failed writing report files in " + out_dir.string());
}

}  // namespace linkforge
