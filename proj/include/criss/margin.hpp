#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "criss/knn.hpp"

namespace criss {

// Denominators at or below this are unscorable: the pair is skipped rather
// than scored or raised as an error.
inline constexpr double kMarginDenominatorFloor = 1e-9;

enum class CandidateRule { union_rule, intersection_rule };

struct MarginConfig {
    std::uint32_t k = 5;            // KNN neighborhood size
    double tau = 1.06;              // minimum margin score kept
    std::optional<std::size_t> max_pairs;  // M; unset = unbounded
    CandidateRule candidate_rule = CandidateRule::union_rule;

    void validate() const {
        if (k < 1) throw validation_error("margin config: k must be >= 1");
        if (!(tau > 0)) throw validation_error("margin config: tau must be > 0");
        if (max_pairs && *max_pairs < 1)
            throw validation_error("margin config: max_pairs must be >= 1");
    }
};

// One side's share of the margin denominator: the average cosine to the
// neighborhood, against the CONFIGURED divisor 2k. A neighborhood clamped
// below k contributes its missing terms as zero-similarity mass, which keeps
// tau comparable across corpus sizes.
inline double neighborhood_mass(const Neighborhood& n, std::uint32_t k) {
    double sum = 0.0;
    for (const auto& e : n.neighbors) sum += e.cos;
    return sum / (2.0 * static_cast<double>(k));
}

// Ratio margin: cos(x,y) over the average cosine to the two cross-lingual
// KNN margins. Near-zero denominators make the pair unscorable.
inline std::optional<double> margin_from_masses(double cos_xy, double mass_x,
                                                double mass_y) {
    const double denom = mass_x + mass_y;
    if (denom <= kMarginDenominatorFloor) return std::nullopt;
    return cos_xy / denom;
}

// Direct form: x against y with their cross-lingual neighborhoods. Nx must
// be x's neighborhood in y's language and Ny the reverse.
inline std::optional<double> margin_score(std::span<const float> x,
                                          std::span<const float> y,
                                          const Neighborhood& nx,
                                          const Neighborhood& ny,
                                          std::uint32_t k) {
    if (k < 1) throw validation_error("margin_score: k must be >= 1");
    const double cos_xy =
        detail::dot_f32(x.data(), y.data(), static_cast<std::uint32_t>(x.size()));
    return margin_from_masses(cos_xy, neighborhood_mass(nx, k),
                              neighborhood_mass(ny, k));
}

}  // namespace criss
