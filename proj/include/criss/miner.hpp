#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "criss/corpus.hpp"
#include "criss/margin.hpp"

namespace criss {

struct ScoredPair {
    std::uint32_t src = 0;
    std::uint32_t tgt = 0;
    double score = 0.0;  // margin score
    double cos = 0.0;    // raw cosine

    friend bool operator==(const ScoredPair&, const ScoredPair&) = default;
};

// Output of one mining direction: pairs sorted by (score desc, src asc,
// tgt asc), deduped, all at or above tau, truncated to max_pairs.
struct MinedSet {
    std::string src_lang;
    std::string tgt_lang;
    MarginConfig config;
    std::vector<ScoredPair> pairs;
};

namespace detail {

// total order for the final ranking
inline bool pair_order(const ScoredPair& a, const ScoredPair& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.src != b.src) return a.src < b.src;
    return a.tgt < b.tgt;
}

}  // namespace detail

// Ordered mining directions: every pair of distinct languages that touches a
// pivot, both directions. 25 langs with 4 pivots gives 90 unordered pairs,
// 180 directions; all-pivot mode gives the full 300 / 600.
inline std::vector<std::pair<std::string, std::string>> mining_plan(
    const std::vector<std::string>& langs, const std::vector<std::string>& pivots) {
    if (pivots.empty()) throw validation_error("mining plan: pivot list is empty");
    for (const auto& p : pivots) {
        if (std::find(langs.begin(), langs.end(), p) == langs.end())
            throw validation_error("mining plan: pivot '" + p +
                                   "' is not in the language list");
    }
    auto is_pivot = [&](const std::string& l) {
        return std::find(pivots.begin(), pivots.end(), l) != pivots.end();
    };
    std::vector<std::pair<std::string, std::string>> plan;
    for (const auto& a : langs) {
        for (const auto& b : langs) {
            if (a == b) continue;
            if (is_pivot(a) || is_pivot(b)) plan.emplace_back(a, b);
        }
    }
    return plan;
}

// Algorithm: compute forward neighborhoods of all source rows in the target
// language and backward neighborhoods of all target rows in the source
// language; each row nominates its best-margin partner within its own
// neighborhood; candidates from both directions are combined (union or
// intersection), deduped, thresholded at tau, ranked, and truncated to M.
inline MinedSet mine_pair(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt,
                          const MarginConfig& cfg) {
    cfg.validate();
    detail::check_dims(src.dim(), tgt.dim(), "mine_pair");

    MinedSet mined;
    mined.src_lang = src.lang();
    mined.tgt_lang = tgt.lang();
    mined.config = cfg;
    if (src.rows() == 0 || tgt.rows() == 0) {
        warn("mine_pair: empty corpus (" + std::to_string(src.rows()) + " x " +
             std::to_string(tgt.rows()) + "), nothing to mine");
        return mined;
    }

    const FlatIndex tgt_index = build_flat(tgt);
    const FlatIndex src_index = build_flat(src);
    const std::vector<Neighborhood> forward = search_flat(tgt_index, src, cfg.k);
    const std::vector<Neighborhood> backward = search_flat(src_index, tgt, cfg.k);

    std::vector<double> mass_src(src.rows());
    std::vector<double> mass_tgt(tgt.rows());
    for (std::size_t i = 0; i < src.rows(); ++i)
        mass_src[i] = neighborhood_mass(forward[i], cfg.k);
    for (std::size_t j = 0; j < tgt.rows(); ++j)
        mass_tgt[j] = neighborhood_mass(backward[j], cfg.k);

    // Each side nominates one partner: the best-margin neighbor, ties to the
    // lowest ordinal (consistent with the global tie rule).
    auto nominate = [&](const Neighborhood& hood, bool from_src,
                        std::vector<ScoredPair>& out) {
        const std::uint32_t self = hood.query;
        double best_score = 0.0;
        double best_cos = 0.0;
        std::uint32_t best_partner = 0;
        bool found = false;
        for (const auto& e : hood.neighbors) {
            const double mx = from_src ? mass_src[self] : mass_src[e.ordinal];
            const double my = from_src ? mass_tgt[e.ordinal] : mass_tgt[self];
            const auto s = margin_from_masses(e.cos, mx, my);
            if (!s) continue;  // unscorable pair, skip
            if (!found || *s > best_score ||
                (*s == best_score && e.ordinal < best_partner)) {
                best_score = *s;
                best_cos = e.cos;
                best_partner = e.ordinal;
                found = true;
            }
        }
        if (!found) return;
        if (from_src)
            out.push_back({self, best_partner, best_score, best_cos});
        else
            out.push_back({best_partner, self, best_score, best_cos});
    };

    std::vector<ScoredPair> fwd_candidates;
    fwd_candidates.reserve(src.rows());
    for (const auto& hood : forward) nominate(hood, true, fwd_candidates);

    std::vector<ScoredPair> bwd_candidates;
    bwd_candidates.reserve(tgt.rows());
    for (const auto& hood : backward) nominate(hood, false, bwd_candidates);

    auto coord_order = [](const ScoredPair& a, const ScoredPair& b) {
        if (a.src != b.src) return a.src < b.src;
        return a.tgt < b.tgt;
    };
    auto coord_eq = [](const ScoredPair& a, const ScoredPair& b) {
        return a.src == b.src && a.tgt == b.tgt;
    };

    std::vector<ScoredPair> candidates;
    if (cfg.candidate_rule == CandidateRule::union_rule) {
        candidates = std::move(fwd_candidates);
        candidates.insert(candidates.end(), bwd_candidates.begin(),
                          bwd_candidates.end());
        std::sort(candidates.begin(), candidates.end(), coord_order);
        candidates.erase(std::unique(candidates.begin(), candidates.end(), coord_eq),
                         candidates.end());
    } else {
        std::sort(fwd_candidates.begin(), fwd_candidates.end(), coord_order);
        std::sort(bwd_candidates.begin(), bwd_candidates.end(), coord_order);
        std::set_intersection(fwd_candidates.begin(), fwd_candidates.end(),
                              bwd_candidates.begin(), bwd_candidates.end(),
                              std::back_inserter(candidates), coord_order);
    }

    for (const auto& p : candidates)
        if (p.score >= cfg.tau) mined.pairs.push_back(p);
    std::sort(mined.pairs.begin(), mined.pairs.end(), detail::pair_order);
    if (cfg.max_pairs && mined.pairs.size() > *cfg.max_pairs)
        mined.pairs.resize(*cfg.max_pairs);
    return mined;
}

// ---- mined-set TSV interchange ------------------------------------------
// One pair per line:
//   score \t src_lang \t src_id \t tgt_lang \t tgt_id \t src_text \t tgt_text
// Score carries 6 decimal places. Text is TSV-safe by corpus ingestion.

inline std::string format_score(double score) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", score);
    return buf;
}

inline void write_mined_tsv(const MinedSet& mined, const Corpus& src_corpus,
                            const Corpus& tgt_corpus, const std::string& path) {
    if (!mined.pairs.empty()) {
        if (src_corpus.size() == 0 || tgt_corpus.size() == 0)
            throw validation_error("write_mined_tsv: corpus/pair mismatch");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open for writing: " + path);
    for (const auto& p : mined.pairs) {
        if (p.src >= src_corpus.size() || p.tgt >= tgt_corpus.size())
            throw validation_error("write_mined_tsv: pair ordinal out of range");
        out << format_score(p.score) << '\t' << mined.src_lang << '\t'
            << src_corpus.ids[p.src] << '\t' << mined.tgt_lang << '\t'
            << tgt_corpus.ids[p.tgt] << '\t' << src_corpus.sentences[p.src] << '\t'
            << tgt_corpus.sentences[p.tgt] << '\n';
    }
    if (!out) throw io_error("write failure: " + path);
}

struct MinedTsvRow {
    double score = 0.0;
    std::string src_lang, src_id, tgt_lang, tgt_id, src_text, tgt_text;
};

inline std::vector<MinedTsvRow> read_mined_tsv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open mined TSV: " + path);
    std::vector<MinedTsvRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == '\t') {
                fields.push_back(line.substr(start, i - start));
                start = i + 1;
            }
        }
        if (fields.size() != 7)
            throw format_error(path + ":" + std::to_string(line_no) +
                               ": expected 7 tab-separated fields, got " +
                               std::to_string(fields.size()));
        MinedTsvRow row;
        try {
            row.score = std::stod(fields[0]);
        } catch (const std::exception&) {
            throw format_error(path + ":" + std::to_string(line_no) +
                               ": unparsable score '" + fields[0] + "'");
        }
        row.src_lang = fields[1];
        row.src_id = fields[2];
        row.tgt_lang = fields[3];
        row.tgt_id = fields[4];
        row.src_text = fields[5];
        row.tgt_text = fields[6];
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace criss
