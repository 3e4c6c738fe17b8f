#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "classifier.hpp"
#include "core.hpp"
#include "evaluation.hpp"
#include "synth.hpp"

// File formats:
//   embeddings  TSV, header "id\tdim=<D>", then "<id>\t<v1>\t...\t<vD>"
//   labels      CSV "id_a,id_b,label", label in {dup, distinct}
//   pairs       CSV "id_a,id_b" in canonical order (linksets, candidates)
//   scores      CSV "id_a,id_b,p"
//   triples     "<id_a> owl:sameAs <id_b> ."
//   clusters    one cluster per line, ids separated by spaces
//   key=value   flat text, '#' starts a comment line

namespace linkforge::io {

namespace detail {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::string_view trim_cr(std::string_view s) {
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    return s;
}

inline double parse_double(std::string_view s, const std::string& where) {
    // from_chars for double is available in libstdc++ 11
    double v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw IoError(where + ": not a number: '" + std::string(s) + "'");
    return v;
}

inline std::ifstream open_in(const std::filesystem::path& p) {
    std::ifstream f(p);
    if (!f) throw IoError("cannot open " + p.string());
    return f;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
    }
    std::ofstream f(p);
    if (!f) throw IoError("cannot write " + p.string());
    return f;
}

inline void check_id(std::string_view id, const std::string& where) {
    if (id.empty()) throw IoError(where + ": empty entity id");
    for (char c : id)
        if (c == '\t' || c == ',' || c == ' ' || c == '\n')
            throw IoError(where + ": entity id contains a separator: '" + std::string(id) + "'");
}

}  // namespace detail

// ─── Embeddings ──────────────────────────────────────────────────────────────

inline EmbeddingTable read_embeddings(std::istream& is, const std::string& name = "embeddings") {
    std::string line;
    if (!std::getline(is, line)) throw IoError(name + ": empty file");
    const auto header = detail::split(detail::trim_cr(line), '\t');
    if (header.size() != 2 || header[0] != "id" || header[1].substr(0, 4) != "dim=")
        throw IoError(name + ": header must be 'id<TAB>dim=<D>'");
    const double dimd = detail::parse_double(header[1].substr(4), name + " header");
    if (dimd < 1 || dimd != static_cast<double>(static_cast<std::size_t>(dimd)))
        throw IoError(name + ": dimension must be a positive integer");
    const auto dim = static_cast<std::size_t>(dimd);

    std::vector<std::pair<EntityId, std::vector<double>>> rows;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        const auto sv = detail::trim_cr(line);
        if (sv.empty()) continue;
        const auto cells = detail::split(sv, '\t');
        const std::string where = name + ":" + std::to_string(lineno);
        if (cells.size() != dim + 1)
            throw IoError(where + ": expected " + std::to_string(dim + 1) + " fields, got " +
                          std::to_string(cells.size()));
        detail::check_id(cells[0], where);
        std::vector<double> v(dim);
        for (std::size_t i = 0; i < dim; ++i) v[i] = detail::parse_double(cells[i + 1], where);
        rows.emplace_back(EntityId(std::string(cells[0])), std::move(v));
    }
    try {
        return EmbeddingTable(dim, std::move(rows));
    } catch (const ParameterError& e) {
        throw IoError(name + ": " + e.what());
    }
}

inline EmbeddingTable read_embeddings(const std::filesystem::path& p) {
    auto f = detail::open_in(p);
    return read_embeddings(f, p.string());
}

inline void write_embeddings(std::ostream& os, const EmbeddingTable& t) {
    os << "id\tdim=" << t.dim() << '\n' << std::setprecision(17);
    for (std::size_t r = 0; r < t.size(); ++r) {
        os << t.id(r).str();
        const double* v = t.row(r);
        for (std::size_t i = 0; i < t.dim(); ++i) os << '\t' << v[i];
        os << '\n';
    }
}

inline void write_embeddings(const std::filesystem::path& p, const EmbeddingTable& t) {
    auto f = detail::open_out(p);
    write_embeddings(f, t);
}

// ─── Labels ──────────────────────────────────────────────────────────────────

inline std::vector<LabeledPair> read_labels(std::istream& is, const std::string& name = "labels") {
    std::map<EntityPair, Label> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto sv = detail::trim_cr(line);
        if (sv.empty()) continue;
        const auto cells = detail::split(sv, ',');
        const std::string where = name + ":" + std::to_string(lineno);
        if (cells.size() != 3) throw IoError(where + ": expected id_a,id_b,label");
        if (lineno == 1 && cells[0] == "id_a") continue;
        Label label;
        if (cells[2] == "dup")
            label = Label::duplicate;
        else if (cells[2] == "distinct")
            label = Label::distinct;
        else
            throw IoError(where + ": label must be 'dup' or 'distinct'");
        detail::check_id(cells[0], where);
        detail::check_id(cells[1], where);
        EntityPair pair = canonical_pair(cells[0], cells[1]);
        auto [it, fresh] = seen.emplace(pair, label);
        if (!fresh && it->second != label) throw IoError(where + ": conflicting labels for one pair");
    }
    std::vector<LabeledPair> out;
    for (const auto& [pair, label] : seen) out.push_back({pair, label});
    return out;
}

inline std::vector<LabeledPair> read_labels(const std::filesystem::path& p) {
    auto f = detail::open_in(p);
    return read_labels(f, p.string());
}

inline void write_labels(std::ostream& os, const std::vector<LabeledPair>& labels) {
    os << "id_a,id_b,label\n";
    for (const auto& lp : labels)
        os << lp.pair.a().str() << ',' << lp.pair.b().str() << ','
           << (lp.label == Label::duplicate ? "dup" : "distinct") << '\n';
}

inline void write_labels(const std::filesystem::path& p, const std::vector<LabeledPair>& labels) {
    auto f = detail::open_out(p);
    write_labels(f, labels);
}

// ─── Pairs / linksets ────────────────────────────────────────────────────────

inline Linkset read_pairs(std::istream& is, const std::string& name = "pairs") {
    Linkset out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto sv = detail::trim_cr(line);
        if (sv.empty()) continue;
        const auto cells = detail::split(sv, ',');
        const std::string where = name + ":" + std::to_string(lineno);
        if (cells.size() != 2) throw IoError(where + ": expected id_a,id_b");
        if (lineno == 1 && cells[0] == "id_a") continue;
        detail::check_id(cells[0], where);
        detail::check_id(cells[1], where);
        out.insert(canonical_pair(cells[0], cells[1]));
    }
    return out;
}

inline Linkset read_pairs(const std::filesystem::path& p) {
    auto f = detail::open_in(p);
    return read_pairs(f, p.string());
}

inline void write_pairs(std::ostream& os, const Linkset& ls) {
    os << "id_a,id_b\n";
    for (const auto& p : ls) os << p.a().str() << ',' << p.b().str() << '\n';
}

inline void write_pairs(const std::filesystem::path& p, const Linkset& ls) {
    auto f = detail::open_out(p);
    write_pairs(f, ls);
}

inline void write_triples(std::ostream& os, const Linkset& ls) {
    for (const auto& p : ls) os << '<' << p.a().str() << "> owl:sameAs <" << p.b().str() << "> .\n";
}

inline void write_triples(const std::filesystem::path& p, const Linkset& ls) {
    auto f = detail::open_out(p);
    write_triples(f, ls);
}

// ─── Scores ──────────────────────────────────────────────────────────────────

inline PairScores read_scores(std::istream& is, const std::string& name = "scores") {
    PairScores out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto sv = detail::trim_cr(line);
        if (sv.empty()) continue;
        const auto cells = detail::split(sv, ',');
        const std::string where = name + ":" + std::to_string(lineno);
        if (cells.size() != 3) throw IoError(where + ": expected id_a,id_b,p");
        if (lineno == 1 && cells[0] == "id_a") continue;
        detail::check_id(cells[0], where);
        detail::check_id(cells[1], where);
        const double p = detail::parse_double(cells[2], where);
        if (!(p >= 0 && p <= 1)) throw IoError(where + ": probability outside [0,1]");
        out[canonical_pair(cells[0], cells[1])] = clamp_probability(p);
    }
    return out;
}

inline PairScores read_scores(const std::filesystem::path& p) {
    auto f = detail::open_in(p);
    return read_scores(f, p.string());
}

inline void write_scores(std::ostream& os, const PairScores& scores) {
    os << "id_a,id_b,p\n" << std::setprecision(17);
    for (const auto& [pair, p] : scores) os << pair.a().str() << ',' << pair.b().str() << ',' << p << '\n';
}

inline void write_scores(const std::filesystem::path& p, const PairScores& scores) {
    auto f = detail::open_out(p);
    write_scores(f, scores);
}

// ─── Clusters ────────────────────────────────────────────────────────────────

inline GroundTruth read_clusters(std::istream& is, const std::string& name = "clusters") {
    std::vector<Cluster> clusters;
    std::string line;
    while (std::getline(is, line)) {
        const auto sv = detail::trim_cr(line);
        if (sv.empty()) continue;
        Cluster c;
        for (auto id : detail::split(sv, ' '))
            if (!id.empty()) c.emplace_back(std::string(id));
        clusters.push_back(std::move(c));
    }
    try {
        return GroundTruth{ClusterPartition(std::move(clusters))};
    } catch (const PartitionError& e) {
        throw IoError(name + ": " + e.what());
    }
}

inline GroundTruth read_clusters(const std::filesystem::path& p) {
    auto f = detail::open_in(p);
    return read_clusters(f, p.string());
}

inline void write_clusters(std::ostream& os, const ClusterPartition& part) {
    for (const auto& c : part.clusters()) {
        for (std::size_t i = 0; i < c.size(); ++i) os << (i ? " " : "") << c[i].str();
        os << '\n';
    }
}

inline void write_clusters(const std::filesystem::path& p, const ClusterPartition& part) {
    auto f = detail::open_out(p);
    write_clusters(f, part);
}

// ─── key=value ───────────────────────────────────────────────────────────────

using KeyValues = std::map<std::string, std::string>;

inline KeyValues read_key_values(std::istream& is, const std::string& name = "config") {
    KeyValues kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto sv = detail::trim_cr(line);
        while (!sv.empty() && (sv.front() == ' ' || sv.front() == '\t')) sv.remove_prefix(1);
        if (sv.empty() || sv.front() == '#') continue;
        const auto eq = sv.find('=');
        if (eq == std::string_view::npos || eq == 0)
            throw IoError(name + ":" + std::to_string(lineno) + ": expected key=value");
        kv[std::string(sv.substr(0, eq))] = std::string(sv.substr(eq + 1));
    }
    return kv;
}

inline KeyValues read_key_values(const std::filesystem::path& p) {
    auto f = detail::open_in(p);
    return read_key_values(f, p.string());
}

inline void write_key_values(std::ostream& os, const KeyValues& kv) {
    for (const auto& [k, v] : kv) os << k << '=' << v << '\n';
}

inline void write_key_values(const std::filesystem::path& p, const KeyValues& kv) {
    auto f = detail::open_out(p);
    write_key_values(f, kv);
}

inline std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline KeyValues to_key_values(const GeneratorConfig& cfg) {
    return {{"n_base", std::to_string(cfg.n_base)},
            {"n_subgraphs", std::to_string(cfg.n_subgraphs)},
            {"sample_rate", format_double(cfg.sample_rate)},
            {"dim", std::to_string(cfg.dim)},
            {"noise_sigma", format_double(cfg.noise_sigma)},
            {"cluster_sep", format_double(cfg.cluster_sep)},
            {"seed", std::to_string(cfg.seed)}};
}

// ─── Benchmark directories ───────────────────────────────────────────────────

inline constexpr const char* kEmbeddingsFile = "embeddings.tsv";
inline constexpr const char* kTruthFile = "truth.txt";
inline constexpr const char* kGeneratorConfigFile = "config.txt";

inline void write_benchmark(const std::filesystem::path& dir, const SynthBenchmark& b) {
    write_embeddings(dir / kEmbeddingsFile, b.embeddings);
    write_clusters(dir / kTruthFile, b.truth.clusters);
    write_key_values(dir / kGeneratorConfigFile, to_key_values(b.config));
}

}  // namespace linkforge::io
