#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "criss/error.hpp"
#include "criss/rng.hpp"

namespace criss {

// Monolingual sentence store. Row position is the ordinal used everywhere
// downstream; `ids` are the external identifiers carried through artifacts.
struct Corpus {
    std::string lang;
    std::vector<std::string> sentences;
    std::vector<std::string> ids;

    std::size_t size() const { return sentences.size(); }
    bool empty() const { return sentences.empty(); }
};

enum class CorpusFormat { plain, jsonl };

namespace detail {

inline bool valid_utf8(std::string_view s) {
    std::size_t i = 0;
    const std::size_t n = s.size();
    while (i < n) {
        const unsigned char c = static_cast<unsigned char>(s[i]);
        std::size_t extra;
        std::uint32_t cp;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c >> 5) == 0x6) {
            extra = 1;
            cp = c & 0x1f;
        } else if ((c >> 4) == 0xe) {
            extra = 2;
            cp = c & 0x0f;
        } else if ((c >> 3) == 0x1e) {
            extra = 3;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + extra >= n) return false;
        std::uint32_t decoded = cp;
        for (std::size_t j = 1; j <= extra; ++j) {
            const unsigned char cc = static_cast<unsigned char>(s[i + j]);
            if ((cc >> 6) != 0x2) return false;
            decoded = (decoded << 6) | (cc & 0x3f);
        }
        // Reject overlong encodings, surrogates, and out-of-range points.
        if (extra == 1 && decoded < 0x80) return false;
        if (extra == 2 && decoded < 0x800) return false;
        if (extra == 3 && decoded < 0x10000) return false;
        if (decoded >= 0xd800 && decoded <= 0xdfff) return false;
        if (decoded > 0x10ffff) return false;
        i += extra + 1;
    }
    return true;
}

inline bool blank(std::string_view s) {
    for (char c : s) {
        if (c != ' ' && c != '\t' && c != '\r' && c != '\v' && c != '\f') return false;
    }
    return true;
}

// Mined-pair TSV safety: sentence text must not carry TSV separators.
inline void check_sentence_text(const std::string& text, const std::string& where) {
    if (!valid_utf8(text))
        throw format_error(where + ": malformed UTF-8");
    if (text.find('\t') != std::string::npos)
        throw format_error(where + ": tab character in sentence text");
    if (text.find('\n') != std::string::npos || text.find('\r') != std::string::npos)
        throw format_error(where + ": newline character in sentence text");
}

}  // namespace detail

// Reads one sentence per line (plain) or one {id, text, lang} object per
// line (jsonl). Blank lines are dropped; order is preserved; ordinals are
// the post-drop row positions.
inline Corpus load_corpus(const std::string& path, const std::string& lang,
                          CorpusFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open corpus file: " + path);

    Corpus corpus;
    corpus.lang = lang;
    std::unordered_set<std::string> seen_ids;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::blank(line)) continue;
        const std::string where = path + ":" + std::to_string(line_no);
        if (format == CorpusFormat::plain) {
            detail::check_sentence_text(line, where);
            corpus.sentences.push_back(line);
            corpus.ids.push_back(std::to_string(line_no - 1));
        } else {
            nlohmann::json row;
            try {
                row = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw format_error(where + ": invalid JSON: " + e.what());
            }
            for (const char* field : {"id", "text", "lang"}) {
                if (!row.contains(field) || !row[field].is_string())
                    throw format_error(where + ": missing or non-string field '" +
                                       field + "'");
            }
            if (row["lang"].get<std::string>() != lang)
                throw format_error(where + ": row lang '" +
                                   row["lang"].get<std::string>() +
                                   "' does not match declared lang '" + lang + "'");
            std::string text = row["text"].get<std::string>();
            if (detail::blank(text)) continue;
            detail::check_sentence_text(text, where);
            std::string id = row["id"].get<std::string>();
            if (!seen_ids.insert(id).second)
                throw format_error(where + ": duplicate external id '" + id + "'");
            corpus.sentences.push_back(std::move(text));
            corpus.ids.push_back(std::move(id));
        }
    }
    if (in.bad()) throw io_error("read failure on corpus file: " + path);
    return corpus;
}

// Exact-string dedup, first occurrence kept, order preserved. Idempotent.
inline Corpus dedup(const Corpus& c) {
    Corpus out;
    out.lang = c.lang;
    std::unordered_set<std::string_view> seen;
    seen.reserve(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (seen.insert(c.sentences[i]).second) {
            out.sentences.push_back(c.sentences[i]);
            out.ids.push_back(c.ids[i]);
        }
    }
    return out;
}

// Uniform sample of exactly `cap` sentences when the corpus exceeds the cap.
// Sampled ordinals are sorted, so the result is a subsequence of the input.
inline Corpus subsample(const Corpus& c, std::size_t cap, std::uint64_t seed) {
    if (cap < 1) throw validation_error("subsample: cap must be >= 1");
    if (c.size() <= cap) return c;
    Rng rng(seed);
    const std::vector<std::size_t> keep = rng.sample_sorted(c.size(), cap);
    Corpus out;
    out.lang = c.lang;
    out.sentences.reserve(cap);
    out.ids.reserve(cap);
    for (std::size_t i : keep) {
        out.sentences.push_back(c.sentences[i]);
        out.ids.push_back(c.ids[i]);
    }
    return out;
}

}  // namespace criss
