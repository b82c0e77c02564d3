#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "criss/knn.hpp"
#include "criss/matrix.hpp"
#include "criss/rng.hpp"

namespace criss {

// Inverted-file index: rows bucketed by nearest centroid; queries probe only
// the nprobe nearest lists. Opt-in approximate mode; flat search is the
// default elsewhere.
struct IvfIndex {
    const EmbeddingMatrix* target = nullptr;
    std::uint32_t dim = 0;
    std::vector<float> centroids;                    // c x dim, unit rows
    std::vector<std::vector<std::uint32_t>> lists;   // per-centroid row ordinals

    std::size_t centroid_count() const { return lists.size(); }
};

namespace detail {

inline std::uint32_t nearest_centroid(const float* row, const std::vector<float>& centroids,
                                      std::size_t c, std::uint32_t dim) {
    std::uint32_t best = 0;
    double best_cos = -2.0;
    for (std::size_t j = 0; j < c; ++j) {
        const double cos = dot_f32(row, centroids.data() + j * dim, dim);
        if (cos > best_cos) {  // ties keep the lowest centroid index
            best_cos = cos;
            best = static_cast<std::uint32_t>(j);
        }
    }
    return best;
}

}  // namespace detail

// Spherical k-means: cosine assignment, mean-then-normalize update. Empty
// clusters are reseeded from the points farthest from their centroids.
// Deterministic given seed.
inline IvfIndex build_ivf(const EmbeddingMatrix& m, std::size_t c,
                          std::uint32_t iters, std::uint64_t seed) {
    const std::size_t n = m.rows();
    if (c < 1) throw validation_error("build_ivf: centroid count must be >= 1");
    if (c > n)
        throw validation_error("build_ivf: centroid count " + std::to_string(c) +
                               " exceeds row count " + std::to_string(n));
    const std::uint32_t dim = m.dim();
    const float* data = m.values().data();

    IvfIndex idx;
    idx.target = &m;
    idx.dim = dim;

    Rng rng(seed);
    std::vector<std::size_t> init = rng.sample_sorted(n, c);
    idx.centroids.resize(c * dim);
    for (std::size_t j = 0; j < c; ++j)
        std::copy_n(data + init[j] * dim, dim, idx.centroids.data() + j * dim);

    std::vector<std::uint32_t> assign(n, 0);
    std::vector<double> sums(c * dim);
    std::vector<std::size_t> counts(c);

    for (std::uint32_t it = 0; it < iters; ++it) {
        for (std::size_t i = 0; i < n; ++i)
            assign[i] = detail::nearest_centroid(data + i * dim, idx.centroids, c, dim);

        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            double* s = sums.data() + assign[i] * dim;
            const float* r = data + i * dim;
            for (std::uint32_t d = 0; d < dim; ++d) s[d] += r[d];
            ++counts[assign[i]];
        }
        for (std::size_t j = 0; j < c; ++j) {
            if (counts[j] == 0) continue;
            double sq = 0.0;
            const double* s = sums.data() + j * dim;
            for (std::uint32_t d = 0; d < dim; ++d) sq += s[d] * s[d];
            const double inv = sq > 0 ? 1.0 / std::sqrt(sq) : 0.0;
            float* cj = idx.centroids.data() + j * dim;
            for (std::uint32_t d = 0; d < dim; ++d)
                cj[d] = static_cast<float>(s[d] * inv);
        }

        // Reseed empties from the globally farthest points, lowest cluster
        // index first, each donor row used at most once per round.
        std::vector<bool> donated(n, false);
        for (std::size_t j = 0; j < c; ++j) {
            if (counts[j] != 0) continue;
            std::size_t farthest = n;
            double farthest_cos = 2.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (donated[i] || counts[assign[i]] <= 1) continue;
                const double cos = detail::dot_f32(
                    data + i * dim, idx.centroids.data() + assign[i] * dim, dim);
                if (cos < farthest_cos) {
                    farthest_cos = cos;
                    farthest = i;
                }
            }
            if (farthest == n) break;  // nothing left to donate
            donated[farthest] = true;
            --counts[assign[farthest]];
            counts[j] = 1;
            std::copy_n(data + farthest * dim, dim, idx.centroids.data() + j * dim);
        }
    }

    for (std::size_t i = 0; i < n; ++i)
        assign[i] = detail::nearest_centroid(data + i * dim, idx.centroids, c, dim);
    idx.lists.assign(c, {});
    for (std::size_t i = 0; i < n; ++i)
        idx.lists[assign[i]].push_back(static_cast<std::uint32_t>(i));
    return idx;
}

// Exact search restricted to the union of the nprobe nearest lists. With
// nprobe = centroid count the candidate set is every row, which reproduces
// search_flat exactly (same dot kernel, same total order).
inline std::vector<Neighborhood> search_ivf(const IvfIndex& idx,
                                            const EmbeddingMatrix& queries,
                                            std::uint32_t k, std::uint32_t nprobe) {
    detail::check_dims(idx.dim, queries.dim(), "search_ivf");
    const std::size_t c = idx.centroid_count();
    if (nprobe < 1 || nprobe > c)
        throw validation_error("search_ivf: nprobe must be in [1, " +
                               std::to_string(c) + "]");
    if (k < 1) throw validation_error("search_ivf: k must be >= 1");
    const std::uint32_t dim = idx.dim;
    const float* data = idx.target->values().data();
    const std::size_t nq = queries.rows();
    std::vector<Neighborhood> out(nq);

    parallel_for(nq, [&](std::size_t q_begin, std::size_t q_end) {
        std::vector<std::uint32_t> probe_order(c);
        for (std::size_t q = q_begin; q < q_end; ++q) {
            const float* query_row = queries.values().data() + q * dim;

            for (std::size_t j = 0; j < c; ++j)
                probe_order[j] = static_cast<std::uint32_t>(j);
            std::vector<double> centroid_cos(c);
            for (std::size_t j = 0; j < c; ++j)
                centroid_cos[j] =
                    detail::dot_f32(query_row, idx.centroids.data() + j * dim, dim);
            std::sort(probe_order.begin(), probe_order.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                          return detail::better(centroid_cos[a], a, centroid_cos[b], b);
                      });

            // k above the probed pool size simply yields fewer neighbors
            detail::TopK top(k);
            for (std::uint32_t p = 0; p < nprobe; ++p) {
                for (std::uint32_t row : idx.lists[probe_order[p]]) {
                    top.push(row, detail::dot_f32(query_row, data + row * dim, dim));
                }
            }
            out[q].query = static_cast<std::uint32_t>(q);
            out[q].neighbors = top.take();
        }
    });
    return out;
}

}  // namespace criss
