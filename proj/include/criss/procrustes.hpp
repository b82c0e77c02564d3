#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "criss/matrix.hpp"
#include "criss/miner.hpp"

namespace criss {

// Per-language orthogonal maps into the reference (first pivot) space:
// x_lang * W_lang lands next to its translation's reference vector. The
// reference language maps by identity.
struct AlignmentMap {
    std::string reference;
    std::uint32_t dim = 0;
    std::map<std::string, Eigen::MatrixXd> maps;

    const Eigen::MatrixXd& for_lang(const std::string& lang) const {
        auto it = maps.find(lang);
        if (it == maps.end())
            throw validation_error("alignment map: no map fitted for language '" +
                                   lang + "'");
        return it->second;
    }
};

namespace detail {

// Closed-form orthogonal Procrustes: W = argmin ||A W - B||_F over orthogonal
// W, from the SVD of A^T B. Reflections are admissible (plain orthogonal
// group, no determinant correction).
inline Eigen::MatrixXd orthogonal_procrustes(const Eigen::MatrixXd& a,
                                             const Eigen::MatrixXd& b,
                                             const std::string& lang) {
    const Eigen::MatrixXd cross = a.transpose() * b;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross,
                                          Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) <= 0.0 ||
        sv(sv.size() - 1) < 1e-12 * sv(0))
        throw validation_error(
            "procrustes: degenerate (rank-deficient) cross-covariance for language '" +
            lang + "'");
    return svd.matrixU() * svd.matrixV().transpose();
}

struct PairBlock {
    std::vector<std::uint32_t> left;   // ordinals in lang A
    std::vector<std::uint32_t> right;  // ordinals in lang B
};

inline Eigen::MatrixXd rows_to_eigen(const EmbeddingMatrix& m,
                                     const std::vector<std::uint32_t>& ordinals) {
    Eigen::MatrixXd out(ordinals.size(), m.dim());
    for (std::size_t i = 0; i < ordinals.size(); ++i) {
        const auto row = m.row(ordinals[i]);
        for (std::uint32_t j = 0; j < m.dim(); ++j) out(i, j) = row[j];
    }
    return out;
}

}  // namespace detail

// Fits one orthogonal map per language from mined pairs against the
// reference language. A language with fewer than `dim` direct pairs to the
// reference is chained through the pivot it shares the most pairs with.
inline AlignmentMap procrustes_train(
    const std::vector<MinedSet>& mined,
    const std::map<std::string, EmbeddingMatrix>& embeddings,
    const std::vector<std::string>& pivots) {
    if (pivots.empty()) throw validation_error("procrustes: pivot list is empty");
    const std::string reference = pivots.front();
    auto ref_it = embeddings.find(reference);
    if (ref_it == embeddings.end())
        throw validation_error("procrustes: no embeddings for reference language '" +
                               reference + "'");
    const std::uint32_t dim = ref_it->second.dim();

    // Collect unique (lang ordinal, other ordinal) pairs per unordered
    // language pair, folding both mined directions together.
    std::map<std::pair<std::string, std::string>, std::set<std::pair<std::uint32_t, std::uint32_t>>>
        by_pair;
    for (const auto& set : mined) {
        for (const auto& p : set.pairs) {
            if (set.src_lang < set.tgt_lang)
                by_pair[{set.src_lang, set.tgt_lang}].insert({p.src, p.tgt});
            else
                by_pair[{set.tgt_lang, set.src_lang}].insert({p.tgt, p.src});
        }
    }
    auto pairs_between = [&](const std::string& a, const std::string& b)
        -> detail::PairBlock {
        detail::PairBlock block;
        const bool flip = !(a < b);
        auto it = by_pair.find(flip ? std::make_pair(b, a) : std::make_pair(a, b));
        if (it == by_pair.end()) return block;
        for (const auto& [x, y] : it->second) {
            block.left.push_back(flip ? y : x);
            block.right.push_back(flip ? x : y);
        }
        return block;
    };

    AlignmentMap alignment;
    alignment.reference = reference;
    alignment.dim = dim;
    alignment.maps.emplace(reference, Eigen::MatrixXd::Identity(dim, dim));

    auto fit_direct = [&](const std::string& lang, const std::string& anchor,
                          const Eigen::MatrixXd& anchor_map) -> bool {
        const auto block = pairs_between(lang, anchor);
        if (block.left.size() < dim) return false;
        const auto& lang_m = embeddings.at(lang);
        const auto& anchor_m = embeddings.at(anchor);
        const Eigen::MatrixXd a = detail::rows_to_eigen(lang_m, block.left);
        const Eigen::MatrixXd b =
            detail::rows_to_eigen(anchor_m, block.right) * anchor_map;
        alignment.maps.emplace(lang, detail::orthogonal_procrustes(a, b, lang));
        return true;
    };

    // Pivots first (they anchor everyone else), then the rest.
    for (const auto& pivot : pivots) {
        if (pivot == reference) continue;
        if (embeddings.find(pivot) == embeddings.end())
            throw validation_error("procrustes: no embeddings for pivot '" + pivot + "'");
        if (!fit_direct(pivot, reference, alignment.maps.at(reference)))
            throw validation_error("procrustes: insufficient mined pairs (< dim) between pivot '" +
                                   pivot + "' and reference '" + reference + "'");
    }
    for (const auto& [lang, m] : embeddings) {
        if (alignment.maps.count(lang)) continue;
        if (m.dim() != dim)
            throw validation_error("procrustes: dim mismatch for language '" + lang + "'");
        if (fit_direct(lang, reference, alignment.maps.at(reference))) continue;
        // chain through the pivot with the most pairs
        std::string best_pivot;
        std::size_t best_count = 0;
        for (const auto& pivot : pivots) {
            if (pivot == lang || !alignment.maps.count(pivot)) continue;
            const auto block = pairs_between(lang, pivot);
            if (block.left.size() >= dim && block.left.size() > best_count) {
                best_count = block.left.size();
                best_pivot = pivot;
            }
        }
        if (best_pivot.empty())
            throw validation_error("procrustes: insufficient mined pairs (< dim = " +
                                   std::to_string(dim) + ") for language '" + lang +
                                   "' against the reference or any pivot");
        fit_direct(lang, best_pivot, alignment.maps.at(best_pivot));
    }
    return alignment;
}

// Next-iteration embeddings: rows mapped by W then renormalized.
inline EmbeddingMatrix apply_alignment(const EmbeddingMatrix& m,
                                       const AlignmentMap& alignment) {
    const Eigen::MatrixXd& w = alignment.for_lang(m.lang());
    const std::uint32_t dim = m.dim();
    if (w.rows() != dim || w.cols() != dim)
        throw validation_error("alignment map: dim mismatch for language '" +
                               m.lang() + "'");
    std::vector<float> values(m.values().size());
    Eigen::VectorXd x(dim), y(dim);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto row = m.row(i);
        for (std::uint32_t j = 0; j < dim; ++j) x(j) = row[j];
        y = w.transpose() * x;  // row-vector times W
        for (std::uint32_t j = 0; j < dim; ++j)
            values[i * dim + j] = static_cast<float>(y(j));
    }
    return normalize_rows(std::move(values), dim, m.lang(), m.ids());
}

}  // namespace criss
