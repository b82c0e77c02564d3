#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "criss/margin.hpp"
#include "criss/miner.hpp"

namespace criss {

enum class RetrievalCriterion { cosine, margin };

inline const char* to_string(RetrievalCriterion c) {
    return c == RetrievalCriterion::cosine ? "cosine" : "margin";
}

inline RetrievalCriterion retrieval_criterion_from_string(const std::string& s) {
    if (s == "cosine") return RetrievalCriterion::cosine;
    if (s == "margin") return RetrievalCriterion::margin;
    throw validation_error("unknown retrieval criterion '" + s +
                           "' (expected cosine or margin)");
}

struct DirectionAccuracy {
    std::string src_lang;
    std::string tgt_lang;
    std::size_t n = 0;
    std::size_t correct = 0;

    double accuracy() const {
        return n == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n);
    }
};

// Per-direction top-1 accuracy plus the arithmetic mean over directions.
struct RetrievalReport {
    RetrievalCriterion criterion = RetrievalCriterion::cosine;
    std::uint32_t k = 5;
    std::vector<DirectionAccuracy> directions;

    double average() const {
        if (directions.empty()) return 0.0;
        double sum = 0.0;
        for (const auto& d : directions) sum += d.accuracy();
        return sum / static_cast<double>(directions.size());
    }
};

// Chance level for top-1 retrieval over n candidates.
inline double random_guess_baseline(std::size_t n) {
    return n == 0 ? 0.0 : 1.0 / static_cast<double>(n);
}

namespace detail {

inline void check_truth(const std::vector<std::uint32_t>& truth, std::size_t n_src,
                        std::size_t n_tgt) {
    if (truth.size() != n_src)
        throw validation_error("retrieval truth: size " + std::to_string(truth.size()) +
                               " does not match source rows " + std::to_string(n_src));
    std::unordered_set<std::uint32_t> seen;
    for (std::uint32_t t : truth) {
        if (t >= n_tgt)
            throw validation_error("retrieval truth: target ordinal " +
                                   std::to_string(t) + " out of range");
        if (!seen.insert(t).second)
            throw validation_error("retrieval truth: map is not injective (target " +
                                   std::to_string(t) + " repeated)");
    }
}

}  // namespace detail

// Fraction of source rows whose top-1 target equals the ground truth. The
// cosine criterion ranks by raw cosine; the margin criterion ranks by the
// ratio margin over the full target set with k-sized neighborhoods.
inline DirectionAccuracy retrieval_accuracy(const EmbeddingMatrix& src,
                                            const EmbeddingMatrix& tgt,
                                            const std::vector<std::uint32_t>& truth,
                                            RetrievalCriterion criterion,
                                            std::uint32_t k = 5) {
    detail::check_dims(src.dim(), tgt.dim(), "retrieval_accuracy");
    detail::check_truth(truth, src.rows(), tgt.rows());

    DirectionAccuracy result;
    result.src_lang = src.lang();
    result.tgt_lang = tgt.lang();
    result.n = src.rows();
    if (src.rows() == 0) return result;

    const std::uint32_t dim = src.dim();
    const float* src_data = src.values().data();
    const float* tgt_data = tgt.values().data();
    const std::size_t n_tgt = tgt.rows();

    std::vector<double> mass_src, mass_tgt;
    if (criterion == RetrievalCriterion::margin) {
        const FlatIndex tgt_index = build_flat(tgt);
        const FlatIndex src_index = build_flat(src);
        const auto forward = search_flat(tgt_index, src, k);
        const auto backward = search_flat(src_index, tgt, k);
        mass_src.resize(src.rows());
        mass_tgt.resize(tgt.rows());
        for (std::size_t i = 0; i < src.rows(); ++i)
            mass_src[i] = neighborhood_mass(forward[i], k);
        for (std::size_t j = 0; j < tgt.rows(); ++j)
            mass_tgt[j] = neighborhood_mass(backward[j], k);
    }

    std::vector<std::uint8_t> hit(src.rows(), 0);
    parallel_for(src.rows(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const float* q = src_data + i * dim;
            std::size_t best = 0;
            double best_score = 0.0;
            bool found = false;
            for (std::size_t j = 0; j < n_tgt; ++j) {
                const double cos = detail::dot_f32(q, tgt_data + j * dim, dim);
                double score;
                if (criterion == RetrievalCriterion::cosine) {
                    score = cos;
                } else {
                    const auto s = margin_from_masses(cos, mass_src[i], mass_tgt[j]);
                    if (!s) continue;
                    score = *s;
                }
                if (!found || score > best_score) {
                    best = j;
                    best_score = score;
                    found = true;
                }
            }
            hit[i] = found && best == truth[i];
        }
    });
    for (std::uint8_t h : hit) result.correct += h;
    return result;
}

// Accuracy for every ordered pair of distinct languages, truth = row index.
inline RetrievalReport multiway_matrix(
    const std::vector<const EmbeddingMatrix*>& embeddings,
    RetrievalCriterion criterion = RetrievalCriterion::cosine, std::uint32_t k = 5) {
    if (embeddings.size() < 2)
        throw validation_error("multiway matrix: need at least 2 languages");
    const std::size_t n = embeddings.front()->rows();
    for (const auto* m : embeddings) {
        if (m->rows() != n)
            throw validation_error("multiway matrix: unequal row counts (" +
                                   std::to_string(m->rows()) + " vs " +
                                   std::to_string(n) + ")");
    }
    std::vector<std::uint32_t> identity(n);
    for (std::size_t i = 0; i < n; ++i) identity[i] = static_cast<std::uint32_t>(i);

    RetrievalReport report;
    report.criterion = criterion;
    report.k = k;
    for (std::size_t a = 0; a < embeddings.size(); ++a) {
        for (std::size_t b = 0; b < embeddings.size(); ++b) {
            if (a == b) continue;
            report.directions.push_back(retrieval_accuracy(
                *embeddings[a], *embeddings[b], identity, criterion, k));
        }
    }
    return report;
}

// ---- mining statistics ----------------------------------------------------

struct DirectionStats {
    std::string src_lang;
    std::string tgt_lang;
    std::size_t count = 0;
    double threshold = 0.0;
    std::optional<double> min_score;
    std::optional<double> median_score;  // nearest-rank
    std::optional<double> max_score;
};

struct MiningStats {
    std::vector<DirectionStats> directions;
};

// nearest-rank quantile on a descending-sorted mined set
inline double nearest_rank(const std::vector<double>& sorted_ascending, double q) {
    const std::size_t n = sorted_ascending.size();
    std::size_t rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
    if (rank < 1) rank = 1;
    if (rank > n) rank = n;
    return sorted_ascending[rank - 1];
}

inline MiningStats mining_stats(const std::vector<MinedSet>& sets) {
    MiningStats stats;
    for (const auto& mined : sets) {
        DirectionStats d;
        d.src_lang = mined.src_lang;
        d.tgt_lang = mined.tgt_lang;
        d.count = mined.pairs.size();
        d.threshold = mined.config.tau;
        if (!mined.pairs.empty()) {
            std::vector<double> scores;
            scores.reserve(mined.pairs.size());
            for (const auto& p : mined.pairs) scores.push_back(p.score);
            std::sort(scores.begin(), scores.end());
            d.min_score = scores.front();
            d.max_score = scores.back();
            d.median_score = nearest_rank(scores, 0.5);
        }
        stats.directions.push_back(std::move(d));
    }
    return stats;
}

// ---- JSON report ----------------------------------------------------------
// Accuracies are serialized as the exact rational correct/n plus a decimal;
// parse -> serialize -> parse is a fixpoint.

inline nlohmann::json report_to_json(const RetrievalReport& report) {
    nlohmann::json j;
    j["criterion"] = to_string(report.criterion);
    j["k"] = report.k;
    j["directions"] = nlohmann::json::array();
    for (const auto& d : report.directions) {
        j["directions"].push_back({{"src", d.src_lang},
                                   {"tgt", d.tgt_lang},
                                   {"n", d.n},
                                   {"correct", d.correct},
                                   {"accuracy", d.accuracy()}});
    }
    j["average"] = report.average();
    return j;
}

inline RetrievalReport report_from_json(const nlohmann::json& j) {
    RetrievalReport report;
    try {
        report.criterion =
            retrieval_criterion_from_string(j.at("criterion").get<std::string>());
        report.k = j.at("k").get<std::uint32_t>();
        for (const auto& dj : j.at("directions")) {
            DirectionAccuracy d;
            d.src_lang = dj.at("src").get<std::string>();
            d.tgt_lang = dj.at("tgt").get<std::string>();
            d.n = dj.at("n").get<std::size_t>();
            d.correct = dj.at("correct").get<std::size_t>();
            report.directions.push_back(std::move(d));
        }
    } catch (const nlohmann::json::exception& e) {
        throw format_error(std::string("retrieval report: bad JSON: ") + e.what());
    }
    return report;
}

inline nlohmann::json stats_to_json(const MiningStats& stats) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& d : stats.directions) {
        nlohmann::json dj{{"src", d.src_lang},
                          {"tgt", d.tgt_lang},
                          {"count", d.count},
                          {"threshold", d.threshold}};
        if (d.min_score) dj["min_score"] = *d.min_score;
        if (d.median_score) dj["median_score"] = *d.median_score;
        if (d.max_score) dj["max_score"] = *d.max_score;
        j.push_back(std::move(dj));
    }
    return j;
}

}  // namespace criss
