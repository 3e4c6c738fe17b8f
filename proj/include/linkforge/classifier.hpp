#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"
#include "util.hpp"

namespace linkforge {

class DegenerateFeatureError : public Error {
public:
    using Error::Error;
};

class TrainingError : public Error {
public:
    using Error::Error;
};

// ─── Features ────────────────────────────────────────────────────────────────

enum class FeatureKind { cosine, hadamard };

struct FeatureSpec {
    FeatureKind kind = FeatureKind::cosine;

    std::size_t size(std::size_t dim) const noexcept { return kind == FeatureKind::cosine ? 1 : dim; }
    friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

inline std::string to_string(FeatureKind k) { return k == FeatureKind::cosine ? "cosine" : "hadamard"; }

inline FeatureKind parse_feature_kind(const std::string& s) {
    if (s == "cosine") return FeatureKind::cosine;
    if (s == "hadamard") return FeatureKind::hadamard;
    throw ParameterError("unknown feature kind: " + s);
}

using FeatureVector = std::vector<double>;

/// Both features are symmetric in their arguments, so the pair order does not matter.
inline FeatureVector featurize(const double* u, const double* v, std::size_t dim, FeatureSpec spec) {
    if (spec.kind == FeatureKind::hadamard) {
        FeatureVector out(dim);
        for (std::size_t i = 0; i < dim; ++i) out[i] = u[i] * v[i];
        return out;
    }
    double dot = 0, nu = 0, nv = 0;
    for (std::size_t i = 0; i < dim; ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0 || nv == 0) throw DegenerateFeatureError("cosine similarity of a zero-norm vector");
    return {dot / (std::sqrt(nu) * std::sqrt(nv))};
}

inline FeatureVector featurize(const EmbeddingTable& table, const EntityPair& pair, FeatureSpec spec) {
    return featurize(table.vector(pair.a()), table.vector(pair.b()), table.dim(), spec);
}

// ─── Probabilities ───────────────────────────────────────────────────────────

inline constexpr double kProbabilityFloor = 1e-12;
inline constexpr double kDefaultEpsilon = 1e-6;

inline double clamp_probability(double p) noexcept {
    return std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor);
}

inline double sigmoid(double z) noexcept {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

/// log(1 + exp(z)) without overflow.
inline double softplus(double z) noexcept { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

// ─── Elastic-net logistic regression ─────────────────────────────────────────

struct Hyperparameters {
    double lambda = 0;  ///< overall penalty strength
    double alpha = 0;   ///< 1 = lasso, 0 = ridge
    friend bool operator==(const Hyperparameters&, const Hyperparameters&) = default;
};

/// lambda in {1e-4, 1e-3, 1e-2, 1e-1, 1} x alpha in {0, 0.5, 1}.
inline std::vector<Hyperparameters> default_grid() {
    std::vector<Hyperparameters> grid;
    for (double lambda : {1e-4, 1e-3, 1e-2, 1e-1, 1.0})
        for (double alpha : {0.0, 0.5, 1.0}) grid.push_back({lambda, alpha});
    return grid;
}

/// Dense training data: one row per example.
struct Dataset {
    std::vector<FeatureVector> x;
    std::vector<int> y;  // 1 duplicate, 0 distinct

    std::size_t size() const noexcept { return y.size(); }
    std::size_t features() const noexcept { return x.empty() ? 0 : x.front().size(); }
};

/// Parameters laid out as [w_0 .. w_{d-1}, intercept].
using Params = std::vector<double>;

/// Penalized mean logistic loss:
///   (1/N) sum softplus(z) - y z  +  lambda ((1-alpha)/2 |w|^2 + alpha |w|_1),  z = w.x + b.
/// The intercept is not penalized.
inline double penalized_loss(const Dataset& data, std::span<const double> params, Hyperparameters h) {
    const std::size_t d = params.size() - 1;
    double loss = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        double z = params[d];
        for (std::size_t j = 0; j < d; ++j) z += params[j] * data.x[i][j];
        loss += softplus(z) - data.y[i] * z;
    }
    loss /= static_cast<double>(data.size());
    double l1 = 0, l2 = 0;
    for (std::size_t j = 0; j < d; ++j) {
        l1 += std::abs(params[j]);
        l2 += params[j] * params[j];
    }
    return loss + h.lambda * ((1 - h.alpha) / 2 * l2 + h.alpha * l1);
}

/// Gradient of the mean logistic loss only (no penalty); returns the loss value.
inline double smooth_gradient(const Dataset& data, std::span<const double> params, std::span<double> grad) {
    const std::size_t d = params.size() - 1;
    std::fill(grad.begin(), grad.end(), 0.0);
    double loss = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        double z = params[d];
        for (std::size_t j = 0; j < d; ++j) z += params[j] * data.x[i][j];
        loss += softplus(z) - data.y[i] * z;
        const double r = sigmoid(z) - data.y[i];
        for (std::size_t j = 0; j < d; ++j) grad[j] += r * data.x[i][j];
        grad[d] += r;
    }
    const double n = static_cast<double>(data.size());
    for (auto& g : grad) g /= n;
    return loss / n;
}

/// Gradient of penalized_loss wherever it is differentiable (all weights non-zero).
inline Params penalized_gradient(const Dataset& data, std::span<const double> params, Hyperparameters h) {
    Params grad(params.size());
    smooth_gradient(data, params, grad);
    for (std::size_t j = 0; j + 1 < params.size(); ++j) {
        const double w = params[j];
        grad[j] += h.lambda * ((1 - h.alpha) * w + h.alpha * (w > 0 ? 1.0 : w < 0 ? -1.0 : 0.0));
    }
    return grad;
}

struct FitOptions {
    double tolerance = 1e-8;  ///< on the norm of the proximal gradient mapping
    std::size_t max_iterations = 50000;
};

struct FitResult {
    Params params;
    bool converged = false;
    double gradient_norm = 0;
    std::size_t iterations = 0;
};

namespace detail {

/// prox of t * lambda (alpha |w|_1 + (1-alpha)/2 |w|^2) on the weights; intercept untouched.
inline void elastic_net_prox(std::span<double> v, double t, Hyperparameters h) {
    const double thresh = t * h.lambda * h.alpha;
    const double shrink = 1.0 / (1.0 + t * h.lambda * (1 - h.alpha));
    for (std::size_t j = 0; j + 1 < v.size(); ++j) {
        const double a = std::abs(v[j]) - thresh;
        v[j] = a > 0 ? std::copysign(a * shrink, v[j]) : 0.0;
    }
}

inline double norm2(std::span<const double> v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace detail

/// Accelerated proximal gradient (FISTA with backtracking and gradient-based
/// momentum restart). Stops when the gradient mapping at the iterate is below
/// the tolerance; otherwise reports the final norm with converged = false.
inline FitResult fit_elastic_net(const Dataset& data, Hyperparameters h, const FitOptions& opts = {}) {
    const std::size_t np = data.features() + 1;
    Params x(np, 0.0), x_prev(np, 0.0), y(np, 0.0), grad(np), cand(np), gx(np), step(np);
    double lipschitz = 1.0;
    double momentum = 1.0;

    auto mapping_norm = [&](const Params& at) {
        smooth_gradient(data, at, gx);
        const double t = 1.0 / lipschitz;
        for (std::size_t j = 0; j < np; ++j) step[j] = at[j] - t * gx[j];
        detail::elastic_net_prox(step, t, h);
        for (std::size_t j = 0; j < np; ++j) step[j] = (at[j] - step[j]) / t;
        return detail::norm2(step);
    };

    FitResult res;
    for (std::size_t it = 0; it < opts.max_iterations; ++it) {
        const double fy = smooth_gradient(data, y, grad);
        for (;;) {
            const double t = 1.0 / lipschitz;
            for (std::size_t j = 0; j < np; ++j) cand[j] = y[j] - t * grad[j];
            detail::elastic_net_prox(cand, t, h);
            double lin = 0, quad = 0;
            for (std::size_t j = 0; j < np; ++j) {
                const double d = cand[j] - y[j];
                lin += grad[j] * d;
                quad += d * d;
            }
            const double fc = penalized_loss(data, cand, {0, 0});
            if (fc <= fy + lin + lipschitz / 2 * quad + 1e-15 * std::abs(fy) || lipschitz > 1e15) break;
            lipschitz *= 2;
        }
        x_prev.swap(x);
        x = cand;

        res.iterations = it + 1;
        res.gradient_norm = mapping_norm(x);
        if (res.gradient_norm <= opts.tolerance) {
            res.converged = true;
            break;
        }

        // restart when the momentum direction opposes the step
        double dotp = 0;
        for (std::size_t j = 0; j < np; ++j) dotp += (y[j] - x[j]) * (x[j] - x_prev[j]);
        if (dotp > 0) momentum = 1.0;
        const double next = (1 + std::sqrt(1 + 4 * momentum * momentum)) / 2;
        const double beta = (momentum - 1) / next;
        momentum = next;
        for (std::size_t j = 0; j < np; ++j) y[j] = x[j] + beta * (x[j] - x_prev[j]);
    }
    res.params = std::move(x);
    return res;
}

/// Mean log-loss with probabilities clamped away from 0 and 1.
inline double log_loss(const Dataset& data, std::span<const double> params) {
    const std::size_t d = params.size() - 1;
    double s = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        double z = params[d];
        for (std::size_t j = 0; j < d; ++j) z += params[j] * data.x[i][j];
        const double p = clamp_probability(sigmoid(z));
        s -= data.y[i] ? std::log(p) : std::log(1 - p);
    }
    return s / static_cast<double>(data.size());
}

// ─── Model ───────────────────────────────────────────────────────────────────

struct LrModel {
    FeatureSpec spec;
    std::size_t dim = 0;  ///< embedding dimension the model was trained on
    std::vector<double> weights;
    double intercept = 0;
    Hyperparameters hyper;
    bool converged = true;
    double gradient_norm = 0;

    double decision(std::span<const double> x) const {
        double z = intercept;
        for (std::size_t j = 0; j < weights.size(); ++j) z += weights[j] * x[j];
        return z;
    }
    /// Clamped to [1e-12, 1 - 1e-12].
    double probability(std::span<const double> x) const { return clamp_probability(sigmoid(decision(x))); }
};

struct TrainOptions {
    std::vector<Hyperparameters> grid = default_grid();
    std::size_t folds = 5;
    std::uint64_t seed = 1;
    FitOptions fit;
};

namespace detail {

struct Standardizer {
    std::vector<double> mean, scale;

    explicit Standardizer(const Dataset& data) : mean(data.features(), 0.0), scale(data.features(), 1.0) {
        const double n = static_cast<double>(data.size());
        for (const auto& row : data.x)
            for (std::size_t j = 0; j < row.size(); ++j) mean[j] += row[j] / n;
        std::vector<double> var(data.features(), 0.0);
        for (const auto& row : data.x)
            for (std::size_t j = 0; j < row.size(); ++j) var[j] += (row[j] - mean[j]) * (row[j] - mean[j]) / n;
        // rounding leaves a constant column with a variance of ~1e-33, not 0
        for (std::size_t j = 0; j < var.size(); ++j) {
            const double floor = 1e-12 * std::max(1.0, std::abs(mean[j]));
            scale[j] = var[j] > floor * floor ? std::sqrt(var[j]) : 1.0;
        }
    }

    Dataset apply(const Dataset& data) const {
        Dataset out{data.x, data.y};
        for (auto& row : out.x)
            for (std::size_t j = 0; j < row.size(); ++j) row[j] = (row[j] - mean[j]) / scale[j];
        return out;
    }

    /// Maps standardized-space parameters back to raw feature space.
    Params unapply(const Params& p) const {
        Params out(p.size());
        const std::size_t d = p.size() - 1;
        out[d] = p[d];
        for (std::size_t j = 0; j < d; ++j) {
            out[j] = p[j] / scale[j];
            out[d] -= p[j] * mean[j] / scale[j];
        }
        return out;
    }
};

/// Penalty acts on standardized features; the returned parameters are raw-space.
inline FitResult fit_standardized(const Dataset& data, Hyperparameters h, const FitOptions& opts) {
    const Standardizer st(data);
    FitResult r = fit_elastic_net(st.apply(data), h, opts);
    r.params = st.unapply(r.params);
    return r;
}

/// Stratified fold assignment, shuffled with the given seed.
inline std::vector<std::size_t> stratified_folds(const std::vector<int>& y, std::size_t folds, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::size_t> fold(y.size());
    for (int cls : {0, 1}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (y[i] == cls) idx.push_back(i);
        for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[uniform_index(rng, i)]);
        for (std::size_t i = 0; i < idx.size(); ++i) fold[idx[i]] = i % folds;
    }
    return fold;
}

}  // namespace detail

/// Mean held-out log-loss of `h` over the given fold assignment.
inline double cross_validated_loss(const Dataset& data, const std::vector<std::size_t>& fold, std::size_t folds,
                                   Hyperparameters h, const FitOptions& opts) {
    double total = 0;
    std::size_t count = 0;
    for (std::size_t f = 0; f < folds; ++f) {
        Dataset train, test;
        for (std::size_t i = 0; i < data.size(); ++i) {
            Dataset& dst = fold[i] == f ? test : train;
            dst.x.push_back(data.x[i]);
            dst.y.push_back(data.y[i]);
        }
        if (test.size() == 0) continue;
        const FitResult r = detail::fit_standardized(train, h, opts);
        total += log_loss(test, r.params) * static_cast<double>(test.size());
        count += test.size();
    }
    return total / static_cast<double>(count);
}

inline Dataset build_dataset(const std::vector<LabeledPair>& labeled, const EmbeddingTable& table, FeatureSpec spec) {
    Dataset data;
    for (const auto& lp : labeled) {
        data.x.push_back(featurize(table, lp.pair, spec));
        data.y.push_back(lp.label == Label::duplicate ? 1 : 0);
    }
    return data;
}

/// Selects hyperparameters by k-fold cross-validated log-loss (first grid entry
/// wins ties), then refits on all labeled pairs. Deterministic in `opts.seed`.
inline LrModel train(const std::vector<LabeledPair>& labeled, const EmbeddingTable& table, FeatureSpec spec,
                     const TrainOptions& opts = {}) {
    if (opts.grid.empty()) throw ParameterError("empty hyperparameter grid");
    const Dataset data = build_dataset(labeled, table, spec);
    const auto positives = static_cast<std::size_t>(std::count(data.y.begin(), data.y.end(), 1));
    const std::size_t negatives = data.size() - positives;
    if (positives == 0 || negatives == 0)
        throw TrainingError("training set must contain both duplicate and distinct pairs");

    Hyperparameters chosen = opts.grid.front();
    const std::size_t folds = std::min({opts.folds, positives, negatives});
    if (folds >= 2 && opts.grid.size() > 1) {
        const auto fold = detail::stratified_folds(data.y, folds, substream_seed(opts.seed, "training/folds"));
        double best = std::numeric_limits<double>::infinity();
        for (const auto& h : opts.grid) {
            const double loss = cross_validated_loss(data, fold, folds, h, opts.fit);
            if (loss < best) {
                best = loss;
                chosen = h;
            }
        }
    } else if (opts.grid.size() > 1) {
        log_warning("too few examples per class for cross-validation; using the first grid entry");
    }

    const FitResult r = detail::fit_standardized(data, chosen, opts.fit);
    if (!r.converged) {
        std::ostringstream os;
        os << "logistic regression did not converge after " << r.iterations
           << " iterations; final gradient-mapping norm " << r.gradient_norm;
        log_warning(os.str());
    }
    LrModel m;
    m.spec = spec;
    m.dim = table.dim();
    m.weights.assign(r.params.begin(), r.params.end() - 1);
    m.intercept = r.params.back();
    m.hyper = chosen;
    m.converged = r.converged;
    m.gradient_norm = r.gradient_norm;
    return m;
}

// ─── Scoring ─────────────────────────────────────────────────────────────────

using PairScores = std::map<EntityPair, double>;

/// Probability of any pair; lets other classifiers stand in for the LR model.
using PairScorer = std::function<double(const EntityPair&)>;

inline PairScorer make_scorer(const LrModel& model, const EmbeddingTable& table) {
    if (model.dim != table.dim())
        throw ParameterError("model expects dimension " + std::to_string(model.dim) + ", embeddings have " +
                             std::to_string(table.dim()));
    return [&model, &table](const EntityPair& p) { return model.probability(featurize(table, p, model.spec)); };
}

inline PairScores score(const PairScorer& scorer, const Linkset& pairs) {
    PairScores out;
    for (const auto& p : pairs) out.emplace_hint(out.end(), p, scorer(p));
    return out;
}

inline PairScores score(const LrModel& model, const Linkset& pairs, const EmbeddingTable& table) {
    return score(make_scorer(model, table), pairs);
}

/// Expert labels override model scores: duplicates get 1 - eps, distincts eps.
/// Labeled pairs missing from `scored` are added.
inline PairScores apply_label_override(PairScores scored, const std::vector<LabeledPair>& labeled,
                                       double epsilon = kDefaultEpsilon) {
    if (!(epsilon > 0 && epsilon < 0.5)) throw ParameterError("epsilon must be in (0, 0.5)");
    for (const auto& lp : labeled) scored[lp.pair] = lp.label == Label::duplicate ? 1 - epsilon : epsilon;
    return scored;
}

/// Scorer that consults expert labels first.
inline PairScorer with_label_override(PairScorer base, const std::vector<LabeledPair>& labeled,
                                      double epsilon = kDefaultEpsilon) {
    if (!(epsilon > 0 && epsilon < 0.5)) throw ParameterError("epsilon must be in (0, 0.5)");
    auto known = std::make_shared<std::map<EntityPair, double>>();
    for (const auto& lp : labeled) (*known)[lp.pair] = lp.label == Label::duplicate ? 1 - epsilon : epsilon;
    return [base = std::move(base), known](const EntityPair& p) {
        auto it = known->find(p);
        return it != known->end() ? it->second : base(p);
    };
}

// ─── Model file ──────────────────────────────────────────────────────────────

inline void write_model(std::ostream& os, const LrModel& m) {
    os << std::setprecision(17);
    os << "feature=" << to_string(m.spec.kind) << '\n';
    os << "dim=" << m.dim << '\n';
    os << "lambda=" << m.hyper.lambda << '\n';
    os << "alpha=" << m.hyper.alpha << '\n';
    os << "intercept=" << m.intercept << '\n';
    os << "weights=";
    for (std::size_t j = 0; j < m.weights.size(); ++j) os << (j ? " " : "") << m.weights[j];
    os << '\n';
    os << "converged=" << (m.converged ? 1 : 0) << '\n';
    os << "gradient_norm=" << m.gradient_norm << '\n';
}

inline LrModel read_model(std::istream& is) {
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParameterError("malformed model line: " + line);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto need = [&](const char* key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw ParameterError(std::string("model file is missing '") + key + "'");
        return it->second;
    };
    LrModel m;
    m.spec.kind = parse_feature_kind(need("feature"));
    m.dim = std::stoul(need("dim"));
    m.hyper.lambda = std::stod(need("lambda"));
    m.hyper.alpha = std::stod(need("alpha"));
    m.intercept = std::stod(need("intercept"));
    std::istringstream ws(need("weights"));
    for (double w; ws >> w;) m.weights.push_back(w);
    if (m.weights.size() != m.spec.size(m.dim)) throw ParameterError("model weight count does not match feature kind");
    if (kv.count("converged")) m.converged = kv["converged"] == "1";
    if (kv.count("gradient_norm")) m.gradient_norm = std::stod(kv["gradient_norm"]);
    return m;
}

}  // namespace linkforge
