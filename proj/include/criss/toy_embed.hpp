#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "criss/corpus.hpp"
#include "criss/matrix.hpp"
#include "criss/rng.hpp"

namespace criss {

// Deterministic stand-in for a sentence encoder: each character 2-/3-gram
// hashes to a dense pseudo-gaussian basis vector, the sentence embedding is
// the normalized sum. Identical text gives the identical vector; sentences
// sharing n-grams land closer than disjoint ones.
inline EmbeddingMatrix toy_embed(const Corpus& corpus, std::uint32_t dim,
                                 std::uint64_t seed) {
    if (dim < 8) throw validation_error("toy_embed: dim must be >= 8");

    std::vector<float> values(corpus.size() * dim);
    std::vector<double> acc(dim);

    for (std::size_t row = 0; row < corpus.size(); ++row) {
        const std::string& text = corpus.sentences[row];
        std::fill(acc.begin(), acc.end(), 0.0);

        auto add_gram = [&](std::string_view gram) {
            const std::uint64_t h = hash64(gram, seed);
            for (std::uint32_t j = 0; j < dim; ++j)
                acc[j] += keyed_gaussian(h, j);
        };

        if (text.size() < 2) {
            add_gram(text);  // single-char sentences fall back to the whole text
        } else {
            for (std::size_t i = 0; i + 2 <= text.size(); ++i)
                add_gram(std::string_view(text).substr(i, 2));
            for (std::size_t i = 0; i + 3 <= text.size(); ++i)
                add_gram(std::string_view(text).substr(i, 3));
        }

        for (std::uint32_t j = 0; j < dim; ++j)
            values[row * dim + j] = static_cast<float>(acc[j]);
    }

    return normalize_rows(std::move(values), dim, corpus.lang, corpus.ids);
}

}  // namespace criss
