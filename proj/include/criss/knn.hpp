#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "criss/error.hpp"
#include "criss/matrix.hpp"
#include "criss/parallel.hpp"

namespace criss {

struct NeighborEntry {
    std::uint32_t ordinal = 0;
    double cos = 0.0;
};

// Top-k cross-lingual neighbors of one query, cosines non-increasing, ties
// broken by ascending target ordinal. The tie rule makes the ordering total,
// so results cannot depend on thread schedule or heap internals.
struct Neighborhood {
    std::uint32_t query = 0;
    std::vector<NeighborEntry> neighbors;
};

namespace detail {

// candidate a ranks strictly better than b
inline bool better(double cos_a, std::uint32_t ord_a, double cos_b,
                   std::uint32_t ord_b) {
    if (cos_a != cos_b) return cos_a > cos_b;
    return ord_a < ord_b;
}

// Vectors are unit-norm, so cosine is the dot product. Accumulate in double
// with four independent lanes; the combine order is fixed, which keeps the
// result identical across runs and thread counts.
inline double dot_f32(const float* a, const float* b, std::uint32_t dim) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::uint32_t i = 0;
    for (; i + 4 <= dim; i += 4) {
        s0 += static_cast<double>(a[i]) * static_cast<double>(b[i]);
        s1 += static_cast<double>(a[i + 1]) * static_cast<double>(b[i + 1]);
        s2 += static_cast<double>(a[i + 2]) * static_cast<double>(b[i + 2]);
        s3 += static_cast<double>(a[i + 3]) * static_cast<double>(b[i + 3]);
    }
    for (; i < dim; ++i)
        s0 += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return (s0 + s1) + (s2 + s3);
}

// Bounded selection buffer: keeps the best k candidates under the total
// order (cos desc, ordinal asc). The heap front is the worst kept candidate,
// evicted whenever something better arrives.
class TopK {
public:
    explicit TopK(std::uint32_t k) : k_(k) { heap_.reserve(k); }

    void push(std::uint32_t ordinal, double cos) {
        if (heap_.size() < k_) {
            heap_.push_back({ordinal, cos});
            std::push_heap(heap_.begin(), heap_.end(), heap_less);
        } else if (better(cos, ordinal, heap_.front().cos, heap_.front().ordinal)) {
            std::pop_heap(heap_.begin(), heap_.end(), heap_less);
            heap_.back() = {ordinal, cos};
            std::push_heap(heap_.begin(), heap_.end(), heap_less);
        }
    }

    // Sorted best-first.
    std::vector<NeighborEntry> take() {
        std::sort(heap_.begin(), heap_.end(), [](const NeighborEntry& a,
                                                 const NeighborEntry& b) {
            return better(a.cos, a.ordinal, b.cos, b.ordinal);
        });
        return std::move(heap_);
    }

private:
    // "less" = ranks better, so the max-heap keeps the worst at the front
    static bool heap_less(const NeighborEntry& a, const NeighborEntry& b) {
        return better(a.cos, a.ordinal, b.cos, b.ordinal);
    }

    std::uint32_t k_;
    std::vector<NeighborEntry> heap_;
};

}  // namespace detail

// Exact index: just the target matrix plus a contiguous shard partition.
// Non-owning; the caller keeps the matrix alive for the index lifetime.
struct FlatIndex {
    const EmbeddingMatrix* target = nullptr;
    std::vector<std::pair<std::size_t, std::size_t>> shards;  // [begin, end)

    std::size_t rows() const { return target ? target->rows() : 0; }
    std::uint32_t dim() const { return target ? target->dim() : 0; }
};

// Partitions rows into `shards` contiguous near-equal ranges. A shard count
// above the row count is clamped (empty shards would be pointless).
inline FlatIndex build_flat(const EmbeddingMatrix& m, std::size_t shards = 1) {
    if (shards < 1) throw validation_error("build_flat: shards must be >= 1");
    const std::size_t n = m.rows();
    if (shards > n && n > 0) {
        warn("build_flat: shard count " + std::to_string(shards) +
             " clamped to row count " + std::to_string(n));
        shards = n;
    }
    if (n == 0) shards = 1;

    FlatIndex idx;
    idx.target = &m;
    const std::size_t base = n / shards;
    const std::size_t extra = n % shards;
    std::size_t begin = 0;
    for (std::size_t s = 0; s < shards; ++s) {
        const std::size_t len = base + (s < extra ? 1 : 0);
        idx.shards.emplace_back(begin, begin + len);
        begin += len;
    }
    return idx;
}

namespace detail {

inline std::uint32_t clamp_k(std::uint32_t k, std::size_t n, const char* who) {
    if (k < 1) throw validation_error(std::string(who) + ": k must be >= 1");
    if (k > n) {
        warn(std::string(who) + ": k=" + std::to_string(k) +
             " clamped to corpus size " + std::to_string(n));
        return static_cast<std::uint32_t>(n);
    }
    return k;
}

inline void check_dims(std::uint32_t index_dim, std::uint32_t query_dim,
                       const char* who) {
    if (index_dim != query_dim)
        throw validation_error(std::string(who) + ": dimension mismatch (index dim " +
                               std::to_string(index_dim) + ", query dim " +
                               std::to_string(query_dim) + ")");
}

}  // namespace detail

// Exact top-k by cosine for every query row: per-shard bounded heaps merged
// into the global top-k. Parallel over query blocks; each query's result is
// computed independently, so output is invariant to thread count.
inline std::vector<Neighborhood> search_flat(const FlatIndex& idx,
                                             const EmbeddingMatrix& queries,
                                             std::uint32_t k) {
    detail::check_dims(idx.dim(), queries.dim(), "search_flat");
    const std::size_t n = idx.rows();
    const std::size_t nq = queries.rows();
    std::vector<Neighborhood> out(nq);
    if (n == 0) {
        for (std::size_t q = 0; q < nq; ++q) out[q].query = static_cast<std::uint32_t>(q);
        return out;
    }
    const std::uint32_t kk = detail::clamp_k(k, n, "search_flat");
    const std::uint32_t dim = idx.dim();
    const float* target_data = idx.target->values().data();

    parallel_for(nq, [&](std::size_t q_begin, std::size_t q_end) {
        std::vector<NeighborEntry> merged;
        for (std::size_t q = q_begin; q < q_end; ++q) {
            const float* query_row = queries.values().data() + q * dim;
            merged.clear();
            for (const auto& [s_begin, s_end] : idx.shards) {
                detail::TopK shard_top(kk);
                for (std::size_t t = s_begin; t < s_end; ++t) {
                    shard_top.push(static_cast<std::uint32_t>(t),
                                   detail::dot_f32(query_row, target_data + t * dim, dim));
                }
                auto shard_best = shard_top.take();
                merged.insert(merged.end(), shard_best.begin(), shard_best.end());
            }
            std::sort(merged.begin(), merged.end(),
                      [](const NeighborEntry& a, const NeighborEntry& b) {
                          return detail::better(a.cos, a.ordinal, b.cos, b.ordinal);
                      });
            if (merged.size() > kk) merged.resize(kk);
            out[q].query = static_cast<std::uint32_t>(q);
            out[q].neighbors = merged;
        }
    });
    return out;
}

}  // namespace criss
