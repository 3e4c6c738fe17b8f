// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "linkforge/classifier.hpp"
#include "linkforge/cluster_editing.hpp"
#include "linkforge/evaluation.hpp"
#include "linkforge/knn.hpp"
#include "linkforge/synth.hpp"

using namespace linkforge;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int n, bool ok, const std::string& what, const std::string& detail) {
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << n << ": " << what << " [" << detail << "]" << std::endl;
    if (!ok) ++failures;
}

std::string fmt(double x, int prec = 4) {
    std::ostringstream os;
    os.precision(prec);
    os << x;
    return os.str();
}

std::vector<EntityId> letters(std::size_t n) {
    std::vector<EntityId> out;
    for (std::size_t i = 0; i < n; ++i) out.emplace_back("v" + std::to_string(i));
    return out;
}

// ─── benchmark runs shared by criteria 2 to 6 ────────────────────────────────

struct BenchmarkRun {
    double rate = 0;
    SweepReport report;
    std::size_t edited_linksets = 0;
    std::size_t intransitive = 0;
    double seconds = 0;
};

BenchmarkRun run_benchmark(const GeneratorConfig& cfg, std::size_t n_labels) {
    const auto t0 = Clock::now();
    BenchmarkRun run;
    run.rate = cfg.sample_rate;
    const SynthBenchmark b = generate_benchmark(cfg);
    const CandidateSet cands = candidate_pairs(b.embeddings, 3);
    const Linkset gold = gold_linkset(b.truth);
    const auto labels = sample_labels(cands.pairs, gold, n_labels, cfg.seed);
    const LrModel model = train(labels, b.embeddings, {FeatureKind::cosine});
    const ScoredProblem prob = prepare_problem(b.embeddings, cands.pairs, model, labels, gold);

    run.report.gold_size = gold.size();
    for (double t : default_theta_grid()) {
        const ThetaResult r = evaluate_theta(prob, Cutoff(t), 50, RepairOptions{});
        run.report.rows.push_back(make_row(t, Variant::closure, r.closure, gold));
        run.report.rows.push_back(make_row(t, Variant::edited, r.edited, gold));
        ++run.edited_linksets;
        if (!is_transitively_closed(r.edited)) ++run.intransitive;
    }
    run.seconds = seconds_since(t0);
    return run;
}

GeneratorConfig table2_config(double rate) {
    GeneratorConfig cfg;
    cfg.n_base = 1000;
    cfg.n_subgraphs = 4;
    cfg.sample_rate = rate;
    cfg.dim = 32;
    cfg.noise_sigma = 0.07;
    cfg.cluster_sep = 1.0;
    cfg.seed = 1;
    return cfg;
}

// ─── criteria ────────────────────────────────────────────────────────────────

void solver_exactness() {
    const auto t0 = Clock::now();
    Rng rng(substream_seed(1, "acceptance/solver"));
    std::size_t mismatches = 0, instances = 250;
    double worst = 0;
    for (std::size_t i = 0; i < instances; ++i) {
        const std::size_t n = 2 + uniform_index(rng, 7);
        const auto inst = EditingInstance::from_function(
            letters(n), [&](std::size_t, std::size_t) { return -2 + 4 * uniform01(rng); });
        const double diff = std::abs(solve_exact(inst).objective - brute_force_oracle(inst).objective);
        worst = std::max(worst, diff);
        if (diff > 1e-9) ++mismatches;
    }
    const double secs = seconds_since(t0);
    report(1, mismatches == 0 && secs < 60, "exact solver matches brute force",
           std::to_string(instances) + " instances, " + std::to_string(mismatches) + " mismatches, max diff " +
               fmt(worst) + ", " + fmt(secs, 3) + " s");
}

void transitivity(const std::vector<BenchmarkRun>& runs) {
    std::size_t linksets = 0, bad = 0;
    for (const auto& r : runs) linksets += r.edited_linksets, bad += r.intransitive;
    report(2, bad == 0 && linksets > 0, "repaired linksets are transitively closed",
           std::to_string(linksets) + " linksets, " + std::to_string(bad) + " violations");
}

void table2_direction(const std::vector<BenchmarkRun>& runs) {
    bool all_ge = true, slow = false;
    int big = 0;
    std::string detail;
    for (const auto& r : runs) {
        const double c = r.report.summary(Variant::closure).mean_f_half;
        const double e = r.report.summary(Variant::edited).mean_f_half;
        all_ge = all_ge && e >= c;
        if (e - c >= 0.02) ++big;
        slow = slow || r.seconds >= 600;
        detail += "q=" + fmt(r.rate, 2) + " closure " + fmt(c) + " edited " + fmt(e) + " (" + fmt(r.seconds, 3) + " s); ";
    }
    report(3, all_ge && big >= 2 && !slow, "mean F-half of edited beats closure", detail);
}

void recall_parity(const std::vector<BenchmarkRun>& runs) {
    bool ok = true;
    std::string detail;
    for (const auto& r : runs) {
        const auto c = r.report.rows_for(Variant::closure), e = r.report.rows_for(Variant::edited);
        double sum = 0;
        for (std::size_t i = 0; i < c.size(); ++i) sum += std::abs(c[i].recall - e[i].recall);
        const double mean = sum / static_cast<double>(c.size());
        ok = ok && mean <= 0.05;
        detail += "q=" + fmt(r.rate, 2) + " " + fmt(mean) + "; ";
    }
    report(4, ok, "mean recall gap between variants at most 0.05", detail);
}

void size_claim(const std::vector<BenchmarkRun>& runs) {
    bool ok = true;
    std::string detail;
    for (const auto& r : runs) {
        const auto c = r.report.rows_for(Variant::closure), e = r.report.rows_for(Variant::edited);
        double sc = 0, se = 0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (c[i].theta > 0.5 || c[i].linkset_size == 0) continue;
            sc += c[i].relative_size;
            se += e[i].relative_size;
            ++n;
        }
        sc /= static_cast<double>(n);
        se /= static_cast<double>(n);
        // the argmax and its grid neighbours
        const double best = r.report.summary(Variant::edited).argmax_theta;
        std::size_t at = 0;
        while (e[at].theta != best) ++at;
        double lo = 1e300, hi = 0;
        for (std::size_t i = at == 0 ? 0 : at - 1; i <= std::min(at + 1, e.size() - 1); ++i) {
            lo = std::min(lo, e[i].relative_size);
            hi = std::max(hi, e[i].relative_size);
        }
        ok = ok && n > 0 && sc >= se && lo >= 0.5 && hi <= 1.5;
        detail += "q=" + fmt(r.rate, 2) + " closure " + fmt(sc) + " edited " + fmt(se) + ", near argmax " +
                  fmt(best, 2) + " in [" + fmt(lo) + ", " + fmt(hi) + "]; ";
    }
    report(5, ok, "closure linksets outgrow gold, edited stays near gold size", detail);
}

void perfect_geometry(const BenchmarkRun& run) {
    const double c = run.report.summary(Variant::closure).max_f_half;
    const double e = run.report.summary(Variant::edited).max_f_half;
    report(6, c == 1.0 && e == 1.0 && run.intransitive == 0, "zero noise gives perfect F-half for both variants",
           "closure max " + fmt(c, 17) + ", edited max " + fmt(e, 17));
}

void classifier_correctness() {
    Rng rng(substream_seed(1, "acceptance/gradient"));
    std::normal_distribution<double> g(0, 1);
    double worst = 0;
    for (int point = 0; point < 100; ++point) {
        Dataset data;
        const std::size_t d = 1 + uniform_index(rng, 8);
        for (int i = 0; i < 40; ++i) {
            FeatureVector x(d);
            for (auto& v : x) v = g(rng);
            data.x.push_back(x);
            data.y.push_back(static_cast<int>(uniform_index(rng, 2)));
        }
        Params w(d + 1);
        for (auto& v : w) v = (uniform01(rng) < 0.5 ? -1 : 1) * (0.05 + 2 * uniform01(rng));
        const Hyperparameters h{std::pow(10.0, -4 + 4 * uniform01(rng)), uniform01(rng)};
        const Params grad = penalized_gradient(data, w, h);
        for (std::size_t j = 0; j <= d; ++j) {
            const double step = 1e-6;
            Params lo = w, hi = w;
            lo[j] -= step;
            hi[j] += step;
            const double fd = (penalized_loss(data, hi, h) - penalized_loss(data, lo, h)) / (2 * step);
            worst = std::max(worst, std::abs(fd - grad[j]) / std::max(1.0, std::abs(grad[j])));
        }
    }

    // cosine 0.99 for duplicates, 0.10 for distincts
    std::vector<std::pair<EntityId, std::vector<double>>> rows;
    std::vector<LabeledPair> labels;
    for (int i = 0; i < 40; ++i) {
        const double c = i % 2 ? 0.99 : 0.10;
        const std::string u = "u" + std::to_string(i), v = "v" + std::to_string(i);
        rows.push_back({EntityId(u), {1, 0}});
        rows.push_back({EntityId(v), {c, std::sqrt(1 - c * c)}});
        labels.push_back({canonical_pair(u, v), i % 2 ? Label::duplicate : Label::distinct});
    }
    const EmbeddingTable table(2, rows);
    const LrModel m = train(labels, table, {FeatureKind::cosine});
    std::size_t correct = 0;
    for (const auto& lp : labels)
        if ((m.probability(featurize(table, lp.pair, m.spec)) > 0.5) == (lp.label == Label::duplicate)) ++correct;
    const double acc = static_cast<double>(correct) / static_cast<double>(labels.size());
    report(7, worst <= 1e-5 && acc == 1.0, "gradient matches finite differences, separable data fit exactly",
           "max relative gradient error " + fmt(worst) + " over 100 points, training accuracy " + fmt(acc));
}

void knn_exactness() {
    Rng rng(substream_seed(1, "acceptance/knn"));
    std::size_t mismatches = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + uniform_index(rng, 1999);
        const std::size_t dim = 1 + uniform_index(rng, 100);
        const bool lattice = trial % 3 == 0;
        std::vector<std::pair<EntityId, std::vector<double>>> rows;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> v(dim);
            for (auto& x : v) x = lattice ? static_cast<double>(uniform_index(rng, 3)) : uniform01(rng);
            rows.push_back({EntityId("p" + std::to_string(i)), v});
        }
        const EmbeddingTable t(dim, rows);
        const std::size_t k = 1 + uniform_index(rng, std::min<std::size_t>(n - 1, 10));
        if (knn_indices(t, k) != knn_brute_force(t, k)) ++mismatches;
    }
    report(8, mismatches == 0, "kd-tree kNN equals brute force", "50 instances, " + std::to_string(mismatches) + " mismatches");
}

void weight_formula() {
    // p spans the whole clamped range on a logit scale, theta the unit interval
    double worst = 0;
    std::size_t sign_errors = 0, points = 0;
    for (int i = 0; i < 100; ++i) {
        const double z = -27.6 + 55.2 * i / 99.0;
        const double p = clamp_probability(1 / (1 + std::exp(-z)));
        for (int j = 1; j <= 100; ++j) {
            const double t = j / 101.0;
            const double w = pair_weight(p, Cutoff(t));
            const long double lp = p, lt = t;
            const long double oracle = std::log(lp / (1 - lp)) - std::log(lt / (1 - lt));
            worst = std::max(worst, static_cast<double>(std::abs(static_cast<long double>(w) - oracle)));
            const int sw = (w > 0) - (w < 0), sd = (p > t) - (p < t);
            if (sw != sd) ++sign_errors;
            ++points;
        }
    }
    report(9, worst <= 1e-12 && sign_errors == 0 && points == 10000, "pair weight equals the logit difference",
           std::to_string(points) + " points, max abs error " + fmt(worst) + ", " + std::to_string(sign_errors) +
               " sign errors");
}

void generator_law() {
    GeneratorConfig cfg;
    cfg.n_base = 10000;
    cfg.sample_rate = 0.5;
    cfg.n_subgraphs = 4;
    const GroundTruth gt = generate_clusters(cfg);
    double freq[5] = {0, 0, 0, 0, 0};
    for (const auto& c : gt.clusters.clusters()) freq[c.size()] += 1;
    const double expect[5] = {0, 1.0 / 16, 4.0 / 16, 6.0 / 16, 5.0 / 16};
    bool ok = gt.clusters.size() == cfg.n_base;
    std::string detail;
    for (int s = 1; s <= 4; ++s) {
        freq[s] /= static_cast<double>(gt.clusters.size());
        ok = ok && std::abs(freq[s] - expect[s]) <= 0.01;
        detail += "size " + std::to_string(s) + ": " + fmt(freq[s]) + " vs " + fmt(expect[s]) + "; ";
    }
    report(10, ok, "cluster sizes follow the binomial law", detail);
}

}  // namespace

int main() {
    std::vector<BenchmarkRun> table2;
    for (double q : {0.10, 0.25, 0.50}) table2.push_back(run_benchmark(table2_config(q), 100));

    GeneratorConfig clean = table2_config(0.25);
    clean.noise_sigma = 0;
    clean.cluster_sep = 2.0;
    const BenchmarkRun perfect = run_benchmark(clean, 100);

    std::vector<BenchmarkRun> all = table2;
    all.push_back(perfect);

    solver_exactness();
    transitivity(all);
    table2_direction(table2);
    recall_parity(table2);
    size_claim(table2);
    perfect_geometry(perfect);
    classifier_correctness();
    knn_exactness();
    weight_formula();
    generator_law();

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
