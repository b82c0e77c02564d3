#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "criss/error.hpp"

namespace criss {

inline constexpr double kUnitNormTolerance = 1e-4;

// Row-major n x dim matrix of unit-norm f32 sentence vectors. `lang` plus
// `ids` bind rows to the corpus they were embedded from; downstream
// operations check that binding instead of trusting row counts alone.
class EmbeddingMatrix {
public:
    EmbeddingMatrix() = default;
    EmbeddingMatrix(std::uint32_t dim, std::vector<float> values,
                    std::string lang, std::vector<std::string> ids)
        : dim_(dim),
          values_(std::move(values)),
          lang_(std::move(lang)),
          ids_(std::move(ids)) {
        if (dim_ == 0) throw validation_error("embedding matrix: dim must be positive");
        if (values_.size() % dim_ != 0)
            throw validation_error("embedding matrix: value count not a multiple of dim");
        if (!ids_.empty() && ids_.size() != rows())
            throw validation_error("embedding matrix: ids count " +
                                   std::to_string(ids_.size()) +
                                   " does not match row count " +
                                   std::to_string(rows()));
    }

    std::uint32_t dim() const { return dim_; }
    std::size_t rows() const { return dim_ == 0 ? 0 : values_.size() / dim_; }
    const std::string& lang() const { return lang_; }
    const std::vector<std::string>& ids() const { return ids_; }
    const std::vector<float>& values() const { return values_; }

    std::span<const float> row(std::size_t i) const {
        return {values_.data() + i * dim_, dim_};
    }

    // Unit-norm within tolerance, finite entries, consistent ids.
    void validate() const {
        for (std::size_t i = 0; i < rows(); ++i) {
            double sq = 0.0;
            for (float v : row(i)) {
                if (!std::isfinite(v))
                    throw validation_error("embedding matrix: non-finite entry at row " +
                                           std::to_string(i));
                sq += static_cast<double>(v) * static_cast<double>(v);
            }
            const double norm = std::sqrt(sq);
            if (std::abs(norm - 1.0) > kUnitNormTolerance)
                throw validation_error("embedding matrix: row " + std::to_string(i) +
                                       " has L2 norm " + std::to_string(norm));
        }
    }

private:
    std::uint32_t dim_ = 0;
    std::vector<float> values_;
    std::string lang_;
    std::vector<std::string> ids_;
};

// Scales every row to unit L2 norm (accumulation in double). Zero rows and
// non-finite entries are rejected with the offending ordinal.
inline EmbeddingMatrix normalize_rows(std::vector<float> values, std::uint32_t dim,
                                      std::string lang = {},
                                      std::vector<std::string> ids = {}) {
    if (dim == 0) throw validation_error("normalize: dim must be positive");
    if (values.size() % dim != 0)
        throw validation_error("normalize: value count not a multiple of dim");
    const std::size_t n = values.size() / dim;
    for (std::size_t i = 0; i < n; ++i) {
        float* r = values.data() + i * dim;
        double sq = 0.0;
        for (std::uint32_t j = 0; j < dim; ++j) {
            if (!std::isfinite(r[j]))
                throw validation_error("normalize: non-finite entry at row " +
                                       std::to_string(i));
            sq += static_cast<double>(r[j]) * static_cast<double>(r[j]);
        }
        if (sq < 1e-60)
            throw validation_error("normalize: degenerate (zero) vector at row " +
                                   std::to_string(i));
        const double inv = 1.0 / std::sqrt(sq);
        for (std::uint32_t j = 0; j < dim; ++j)
            r[j] = static_cast<float>(static_cast<double>(r[j]) * inv);
    }
    return EmbeddingMatrix(dim, std::move(values), std::move(lang), std::move(ids));
}

}  // namespace criss
